// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "drp/config.hpp"

namespace drp {

enum class Stage { Generate, Decompose, Prune, BuildDataset, Score, Judge, Report };

std::string_view to_string(Stage stage) noexcept;
/// Throws ConfigError.
Stage parse_stage(std::string_view text);

namespace artifacts {
inline constexpr std::string_view kCompletions = "completions.jsonl";
inline constexpr std::string_view kDecompositions = "decompositions.jsonl";
inline constexpr std::string_view kRevisions = "revisions.jsonl";
inline constexpr std::string_view kDataset = "dataset.jsonl";
inline constexpr std::string_view kTrainingConfig = "training_config.yaml";
inline constexpr std::string_view kScores = "scores.jsonl";
inline constexpr std::string_view kScoreReport = "report.json";
inline constexpr std::string_view kCaptureCurve = "capture_curve.csv";
inline constexpr std::string_view kHistogram = "histogram.csv";
inline constexpr std::string_view kJudge = "judge.json";
inline constexpr std::string_view kCompression = "compression.json";
inline constexpr std::string_view kCompressionCsv = "compression.csv";
}  // namespace artifacts

/// "<stage>.manifest.json" under the output directory.
std::filesystem::path manifest_path(const Config& config, Stage stage);

struct StageReport {
    Stage stage = Stage::Generate;
    bool skipped = false;  // outputs were up to date; nothing ran
    std::size_t ingested = 0;
    std::size_t exported = 0;
    std::map<std::string, std::size_t> drops;
    std::size_t hard_failures = 0;  // examples lost to client or I/O errors
    std::size_t backend_calls = 0;  // model calls that missed the cache
    std::filesystem::path manifest;

    int exit_code() const noexcept { return hard_failures == 0 ? 0 : 1; }
    std::string summary() const;
};

/// Runs one stage. Stages exchange data only through files in
/// config.output_dir and each writes a manifest recording input hashes,
/// counts, drop reasons, seed and template version. A stage whose manifest
/// matches the current inputs and settings is skipped unless config.force.
/// Throws ConfigError or MissingUpstreamArtifact.
StageReport run_stage(Stage stage, Config config, const EnvLookup& env = process_env());

}  // namespace drp
