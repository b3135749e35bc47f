// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "drp/kernels.hpp"
#include "drp/metrics.hpp"

namespace drp::kernels {

int max_threads() noexcept {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace parallel {

std::vector<std::size_t> count_tokens(std::span<const std::string> texts, const TokenCounter& tokenizer) {
    std::vector<std::size_t> out(texts.size());
    const auto n = static_cast<std::int64_t>(texts.size());
    // Completion lengths vary by orders of magnitude; dynamic keeps threads busy.
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t i = 0; i < n; ++i) {
        out[i] = drp::count_tokens(texts[i], tokenizer);
    }
    return out;
}

std::vector<std::uint8_t> score(std::span<const std::string> completions, std::span<const AnswerValue> golds) {
    std::vector<std::uint8_t> out(completions.size());
    const auto n = static_cast<std::int64_t>(completions.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < n; ++i) {
        out[i] = score_answer(completions[i], golds[i]) ? 1 : 0;
    }
    return out;
}

std::vector<std::size_t> histogram(std::span<const std::size_t> tokens, std::size_t max_len, std::size_t bins) {
    std::vector<std::size_t> counts(bins, 0);
    const auto n = static_cast<std::int64_t>(tokens.size());
#pragma omp parallel
    {
        std::vector<std::size_t> local(bins, 0);
#pragma omp for schedule(static) nowait
        for (std::int64_t i = 0; i < n; ++i) {
            ++local[bin_of(tokens[i], max_len, bins)];
        }
#pragma omp critical(drp_histogram_merge)
        for (std::size_t b = 0; b < bins; ++b) {
            counts[b] += local[b];
        }
    }
    return counts;
}

}  // namespace parallel

}  // namespace drp::kernels
