// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

// Serial reference vs OpenMP kernels on synthetic completions.
//   drp_bench --benchmark_filter=Histogram

#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "drp/kernels.hpp"
#include "drp/tokenizer.hpp"

namespace {

using namespace drp;

const BpeTokenizer& tokenizer() {
    static const BpeTokenizer tok = BpeTokenizer::from_file(DRP_FIXTURE_DIR "/tokenizers/qwen_style.json");
    return tok;
}

std::vector<std::string> completions(std::size_t n) {
    std::mt19937_64 rng(1);
    const char* pieces[] = {"Okay, let me work through this carefully. ", "First, 48 + 24 = 72. ",
                            "So the result of that step is 72. ", "Wait, let me double-check: ",
                            "Joy reads 0.4 pages per minute. ", "\n\n"};
    std::vector<std::string> out(n);
    for (auto& s : out) {
        s = "<think>\n";
        const std::size_t k = 20 + rng() % 200;
        for (std::size_t j = 0; j < k; ++j) {
            s += pieces[rng() % std::size(pieces)];
        }
        s += "\n</think>\n\nThe answer is \\boxed{72}.";
    }
    return out;
}

std::vector<AnswerValue> golds(std::size_t n) {
    return std::vector<AnswerValue>(n, *AnswerValue::parse("72"));
}

std::vector<std::size_t> lengths(std::size_t n) {
    std::mt19937_64 rng(2);
    std::vector<std::size_t> out(n);
    for (auto& v : out) {
        v = rng() % 140000;
    }
    return out;
}

template <auto Fn>
void BM_CountTokens(benchmark::State& state) {
    const auto texts = completions(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(Fn(texts, tokenizer()));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Fn>
void BM_Score(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto texts = completions(n);
    const auto g = golds(n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(Fn(texts, g));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Fn>
void BM_Histogram(benchmark::State& state) {
    const auto tokens = lengths(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(Fn(tokens, 131072, 50));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK(BM_CountTokens<kernels::serial::count_tokens>)->Name("CountTokens/serial")->Arg(256);
BENCHMARK(BM_CountTokens<kernels::parallel::count_tokens>)->Name("CountTokens/parallel")->Arg(256);
BENCHMARK(BM_Score<kernels::serial::score>)->Name("Score/serial")->Arg(4096);
BENCHMARK(BM_Score<kernels::parallel::score>)->Name("Score/parallel")->Arg(4096);
BENCHMARK(BM_Histogram<kernels::serial::histogram>)->Name("Histogram/serial")->Arg(1 << 20);
BENCHMARK(BM_Histogram<kernels::parallel::histogram>)->Name("Histogram/parallel")->Arg(1 << 20);

}  // namespace

BENCHMARK_MAIN();
