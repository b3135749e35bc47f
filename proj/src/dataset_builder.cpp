// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#include "drp/dataset_builder.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "drp/error.hpp"
#include "drp/jsonl.hpp"
#include "drp/text.hpp"

namespace drp {

namespace {

using json = nlohmann::json;

// Uniform draw in [0, range) by rejection; avoids the implementation-defined
// std::uniform_int_distribution so samples match across standard libraries.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t range) {
    const std::uint64_t threshold = (0 - range) % range;
    for (;;) {
        const std::uint64_t r = rng();
        if (r >= threshold) {
            return r % range;
        }
    }
}

TokenStats stats(const std::vector<std::size_t>& values) {
    TokenStats s;
    s.total = std::accumulate(values.begin(), values.end(), std::size_t{0});
    s.mean = values.empty() ? 0.0 : static_cast<double>(s.total) / static_cast<double>(values.size());
    return s;
}

struct ConfigKey {
    std::string_view key;
    std::string_view value;
};

// LLaMA-Factory key names.
constexpr ConfigKey kTrainingDefaults[] = {
    {"stage", "sft"},
    {"do_train", "true"},
    {"finetuning_type", "lora"},
    {"dataset", "drp_pruned"},
    {"cutoff_len", "4096"},
    {"max_samples", "8000"},
    {"overwrite_cache", "true"},
    {"preprocessing_num_workers", "8"},
    {"per_device_train_batch_size", "2"},
    {"gradient_accumulation_steps", "4"},
    {"learning_rate", "3.0e-5"},
    {"num_train_epochs", "3.0"},
    {"lr_scheduler_type", "cosine"},
    {"bf16", "true"},
    {"val_size", "0.05"},
    {"eval_strategy", "steps"},
    {"eval_steps", "300"},
    {"per_device_eval_batch_size", "1"},
};

}  // namespace

TrainingExample build_training_example(const Problem& problem, const Response& revised, const Response& original,
                                       const TokenCounter& tokenizer) {
    require(!trim(problem.question).empty(), "build_training_example: question must be non-empty");
    require(!revised.raw.empty(), "build_training_example: revised response must be assembled");
    const std::size_t before = count_tokens(render_response(original.thinking, original.answer), tokenizer);
    const std::size_t after = count_tokens(revised.raw, tokenizer);
    if (after >= before) {
        throw Error(Errc::TokenInflation, problem.id + ": revised response has " + std::to_string(after) +
                                              " tokens, original " + std::to_string(before));
    }
    return TrainingExample{problem.id, problem.question, revised.raw};
}

nlohmann::json DatasetManifest::to_json() const {
    return json{
        {"ingested", ingested},
        {"exported", exported},
        {"drop_reasons", drop_reasons},
        {"tokens_before", {{"total", tokens_before.total}, {"mean", tokens_before.mean}}},
        {"tokens_after", {{"total", tokens_after.total}, {"mean", tokens_after.mean}}},
        {"sha256", sha256},
        {"truncation_risk_ids", truncation_risk_ids},
        {"max_samples", max_samples},
        {"seed", seed},
        {"format", format},
    };
}

std::vector<std::size_t> subsample_indices(std::size_t count, std::size_t max_samples, std::uint64_t seed) {
    std::vector<std::size_t> all(count);
    std::iota(all.begin(), all.end(), std::size_t{0});
    if (count <= max_samples) {
        return all;
    }
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < max_samples; ++i) {
        const auto j = i + static_cast<std::size_t>(bounded(rng, count - i));
        std::swap(all[i], all[j]);
    }
    all.resize(max_samples);
    std::sort(all.begin(), all.end());
    return all;
}

DatasetManifest export_dataset(std::span<const DatasetEntry> entries, const std::filesystem::path& path,
                               const ExportOptions& options, const TokenCounter& tokenizer,
                               const std::map<std::string, std::size_t>& upstream_drops) {
    require(!entries.empty(), "export_dataset: no examples to export");
    require(options.max_samples >= 1, "export_dataset: max_samples must be >= 1");

    DatasetManifest m;
    m.max_samples = options.max_samples;
    m.seed = options.seed;
    m.format = options.format == DatasetFormat::Messages ? "messages" : "instruction_output";
    m.drop_reasons = upstream_drops;

    const auto keep = subsample_indices(entries.size(), options.max_samples, options.seed);
    if (keep.size() < entries.size()) {
        m.drop_reasons["subsampled"] += entries.size() - keep.size();
    }

    std::string content;
    std::vector<std::size_t> before;
    std::vector<std::size_t> after;
    for (auto i : keep) {
        const auto& e = entries[i];
        json record;
        if (options.format == DatasetFormat::Messages) {
            record = {{"messages",
                       {{{"role", "user"}, {"content", e.example.instruction}},
                        {{"role", "assistant"}, {"content", e.example.output}}}}};
        } else {
            record = {{"instruction", e.example.instruction}, {"output", e.example.output}};
        }
        content += record.dump();
        content += '\n';
        before.push_back(e.tokens_before);
        after.push_back(e.tokens_after);
        if (tokenizer.count(e.example.instruction) + tokenizer.count(e.example.output) > options.cutoff_len) {
            m.truncation_risk_ids.push_back(e.example.problem_id);
        }
    }
    m.sha256 = write_file_atomic(path, content);
    m.exported = keep.size();
    m.ingested = m.exported;
    for (const auto& [reason, n] : m.drop_reasons) {
        m.ingested += n;
    }
    m.tokens_before = stats(before);
    m.tokens_after = stats(after);
    return m;
}

std::string export_training_config(const std::vector<std::pair<std::string, std::string>>& overrides) {
    std::vector<std::pair<std::string, std::string>> config;
    for (const auto& d : kTrainingDefaults) {
        config.emplace_back(d.key, d.value);
    }
    for (const auto& [key, value] : overrides) {
        auto it = std::find_if(config.begin(), config.end(), [&](const auto& kv) { return kv.first == key; });
        if (it == config.end()) {
            throw Error(Errc::InvalidOverrideKey, "unknown training config key \"" + key + "\"");
        }
        it->second = value;
    }
    std::string out;
    for (const auto& [key, value] : config) {
        out += key + ": " + value + "\n";
    }
    return out;
}

}  // namespace drp
