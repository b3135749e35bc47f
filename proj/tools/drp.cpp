// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

// drp: stage-oriented driver for the reasoning-pruning pipeline.
//
//   drp --stage generate --input problems.jsonl --output-dir run --mock
//   drp --stage decompose --output-dir run --mock
//   drp --stage report --input base/scores.jsonl --input pruned/scores.jsonl

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "drp/config.hpp"
#include "drp/error.hpp"
#include "drp/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Distilled reasoning pruning pipeline"};
    app.set_version_flag("--version", "drp 0.1.0");

    std::string config_path;
    std::string stage;
    std::vector<std::string> inputs;
    std::optional<std::string> output_dir;
    std::optional<std::string> teacher_endpoint;
    std::optional<std::string> student_endpoint;
    std::optional<std::string> mode;
    std::optional<std::size_t> cutoff;
    std::optional<std::string> cutoff_mode;
    std::optional<std::size_t> max_samples;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> concurrency;
    std::optional<std::string> tokenizer;
    std::optional<std::string> benchmark;
    bool mock = false;
    bool force = false;
    bool no_position_shuffle = false;
    std::vector<std::string> sets;

    app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--stage", stage, "generate|decompose|prune|build-dataset|score|judge|report")->required();
    app.add_option("--input", inputs, "input file(s); report takes the before and after score files");
    app.add_option("--output-dir", output_dir, "directory for artifacts and manifests");
    app.add_option("--teacher-endpoint", teacher_endpoint, "chat-completions URL of the teacher/judge model");
    app.add_option("--student-endpoint", student_endpoint, "chat-completions URL of the student model");
    app.add_option("--mode", mode, "segmentation mode")->check(CLI::IsMember({"skill", "default"}));
    app.add_option("--cutoff", cutoff, "token cutoff threshold");
    app.add_option("--cutoff-mode", cutoff_mode, "truncate|clip")->check(CLI::IsMember({"truncate", "clip"}));
    app.add_option("--max-samples", max_samples, "dataset size cap");
    app.add_option("--seed", seed, "seed for subsampling and judge positions");
    app.add_option("--concurrency", concurrency, "maximum in-flight model requests");
    app.add_option("--tokenizer", tokenizer, "tokenizer.json used for token counts");
    app.add_option("--benchmark", benchmark, "benchmark label for score records");
    app.add_option("--set", sets, "any config key, as key=value");
    app.add_flag("--mock", mock, "use the deterministic mock backend instead of live endpoints");
    app.add_flag("--force", force, "rerun even when outputs are up to date");
    app.add_flag("--no-position-shuffle", no_position_shuffle, "judge: always show the skill segmentation as A");

    CLI11_PARSE(app, argc, argv);

    nlohmann::json flags = nlohmann::json::object();
    for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::cerr << "drp: --set expects key=value, got \"" << kv << "\"\n";
            return 2;
        }
        flags[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    if (!inputs.empty()) {
        flags["inputs"] = inputs;
    }
    const auto put = [&](const char* key, const auto& value) {
        if (value) {
            flags[key] = *value;
        }
    };
    put("output_dir", output_dir);
    put("teacher_endpoint", teacher_endpoint);
    put("student_endpoint", student_endpoint);
    put("mode", mode);
    put("cutoff", cutoff);
    put("cutoff_mode", cutoff_mode);
    put("max_samples", max_samples);
    put("seed", seed);
    put("concurrency", concurrency);
    put("tokenizer", tokenizer);
    put("benchmark", benchmark);
    if (mock) {
        flags["mock"] = true;
    }
    if (force) {
        flags["force"] = true;
    }
    if (no_position_shuffle) {
        flags["randomize_positions"] = false;
    }

    try {
        const auto env = drp::process_env();
        std::optional<std::filesystem::path> path;
        if (!config_path.empty()) {
            path = config_path;
        }
        const auto config = drp::load_config(path, env, flags);
        const auto report = drp::run_stage(drp::parse_stage(stage), config, env);
        std::cout << report.summary() << "\n";
        std::cout << "manifest: " << report.manifest.string() << "\n";
        return report.exit_code();
    } catch (const drp::Error& e) {
        std::cerr << "drp: " << e.what() << "\n";
        return e.code() == drp::Errc::ConfigError ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "drp: " << e.what() << "\n";
        return 1;
    }
}
