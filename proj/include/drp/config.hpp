// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "drp/dataset_builder.hpp"
#include "drp/metrics.hpp"
#include "drp/trace_model.hpp"

namespace drp {

/// Effective run configuration. Every field except the two resolved secrets
/// can be set from a JSON config file, a DRP_<KEY> environment variable or a
/// command-line flag, in increasing order of precedence.
struct Config {
    std::filesystem::path output_dir = "drp_out";
    std::vector<std::string> inputs;
    std::string tokenizer;            // tokenizer.json path
    std::filesystem::path cache_dir;  // empty: <output_dir>/cache
    bool mock = false;
    bool force = false;

    std::string teacher_endpoint;
    std::string teacher_model = "gpt-4o";
    std::string teacher_api_key_env = "OPENAI_API_KEY";
    double teacher_temperature = 0.0;
    int teacher_max_tokens = 4096;

    std::string student_endpoint;
    std::string student_model = "DeepSeek-R1-Distill-Qwen-7B";
    std::string student_api_key_env = "STUDENT_API_KEY";
    double student_temperature = 0.0;
    int student_max_tokens = 32768;

    std::string judge_model;  // empty: teacher_model
    bool randomize_positions = true;

    SegmentationMode mode = SegmentationMode::Skill;
    double fuzzy_threshold = 0.95;
    std::size_t compress_word_threshold = 20;  // mock backend only

    std::size_t cutoff = 12000;
    CutoffMode cutoff_mode = CutoffMode::Truncate;
    std::size_t max_generation_length = kMaxGenerationLength;
    std::size_t histogram_bins = kDefaultHistogramBins;
    std::size_t capture_step = 1000;
    std::string benchmark = "default";

    std::size_t max_samples = 8000;
    std::uint64_t seed = 0;
    std::size_t concurrency = 8;
    DatasetFormat dataset_format = DatasetFormat::InstructionOutput;
    std::size_t cutoff_len = 4096;
    std::vector<std::pair<std::string, std::string>> training_overrides;

    int max_attempts = 5;
    long retry_base_delay_ms = 1000;

    // Resolved from the environment variables named above; never serialized.
    std::string teacher_api_key;
    std::string student_api_key;

    /// Configuration as JSON, secrets excluded. Used in stage manifests.
    nlohmann::json to_json() const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string& name)>;

/// Reads the process environment.
EnvLookup process_env();

/// Applies one layer of settings. Keys are the Config field names; values may
/// be JSON-typed or strings (as from the environment). Unknown keys and bad
/// values throw ConfigError naming the key.
void apply_settings(Config& config, const nlohmann::json& settings);

/// defaults < file < environment (DRP_<UPPERCASE_KEY>) < flags.
/// Throws ConfigError.
Config load_config(const std::optional<std::filesystem::path>& path, const EnvLookup& env,
                   const nlohmann::json& flags = nlohmann::json::object());

/// Range checks shared by every stage. Throws ConfigError.
void validate_config(const Config& config);

/// Fills the API keys for the live endpoints a stage uses. A live endpoint
/// whose key variable is unset throws ConfigError naming the variable; an
/// empty variable name means the endpoint needs no key. Mock runs need none.
void resolve_secrets(Config& config, const EnvLookup& env, bool needs_teacher, bool needs_student);

}  // namespace drp
