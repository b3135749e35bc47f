// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "drp/tokenizer.hpp"
#include "drp/trace_model.hpp"

namespace drp {

/// Pairs the question with the think-tag-wrapped revised response. Rejects
/// revisions that do not strictly shrink the token count, including
/// KEEP-only revisions with no savings. Throws TokenInflation.
TrainingExample build_training_example(const Problem& problem, const Response& revised, const Response& original,
                                       const TokenCounter& tokenizer);

struct DatasetEntry {
    TrainingExample example;
    std::size_t tokens_before = 0;  // original response
    std::size_t tokens_after = 0;   // revised response
};

enum class DatasetFormat { InstructionOutput, Messages };

struct ExportOptions {
    std::size_t max_samples = 8000;
    std::uint64_t seed = 0;
    DatasetFormat format = DatasetFormat::InstructionOutput;
    std::size_t cutoff_len = 4096;  // trainer sequence budget
};

struct TokenStats {
    std::size_t total = 0;
    double mean = 0.0;
};

struct DatasetManifest {
    std::size_t ingested = 0;  // exported + sum(drop_reasons)
    std::size_t exported = 0;
    std::map<std::string, std::size_t> drop_reasons;
    TokenStats tokens_before;
    TokenStats tokens_after;
    std::string sha256;
    std::vector<std::string> truncation_risk_ids;
    std::size_t max_samples = 0;
    std::uint64_t seed = 0;
    std::string format;

    nlohmann::json to_json() const;
};

/// Indices of `count` items kept when at most `max_samples` may be exported:
/// a seeded uniform sample without replacement, returned in ascending order.
/// Stable across platforms (no std distributions involved).
std::vector<std::size_t> subsample_indices(std::size_t count, std::size_t max_samples, std::uint64_t seed);

/// Writes one JSON record per line and returns the manifest. `upstream_drops`
/// carries examples rejected before this point so that the manifest accounts
/// for every ingested example. Throws IoError.
DatasetManifest export_dataset(std::span<const DatasetEntry> entries, const std::filesystem::path& path,
                               const ExportOptions& options, const TokenCounter& tokenizer,
                               const std::map<std::string, std::size_t>& upstream_drops = {});

/// Flat "key: value" trainer configuration with the default SFT recipe,
/// updated with `overrides`. Throws InvalidOverrideKey.
std::string export_training_config(const std::vector<std::pair<std::string, std::string>>& overrides = {});

}  // namespace drp
