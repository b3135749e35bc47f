// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

// Helpers shared by the unit tests and the acceptance runner.

#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "drp/judge_eval.hpp"
#include "drp/metrics.hpp"
#include "drp/pipeline.hpp"
#include "drp/tokenizer.hpp"
#include "drp/trace_model.hpp"

namespace drp::testing {

std::filesystem::path fixture_path(std::string_view relative);
std::string read_fixture(std::string_view relative);

/// The Qwen-style fixture tokenizer, loaded once.
const BpeTokenizer& qwen_tokenizer();
const BpeTokenizer& gpt2_tokenizer();

/// Fresh empty directory under the system temp dir; removed on destruction.
class TempDir {
public:
    explicit TempDir(std::string_view tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

struct StubReply {
    int status = 200;
    std::string body;
};

/// OpenAI-style chat-completions body with `content` as the first choice.
std::string chat_body(std::string_view content);

/// Local HTTP server on 127.0.0.1 answering POSTs to /v1/chat/completions.
/// Tracks the number of requests and the peak number handled at once.
class StubServer {
public:
    using Handler = std::function<StubReply(const std::string& request_body)>;

    explicit StubServer(Handler handler, std::size_t threads = 16);
    ~StubServer();
    StubServer(const StubServer&) = delete;
    StubServer& operator=(const StubServer&) = delete;

    /// Base URL ("http://127.0.0.1:<port>/v1").
    std::string url() const;
    std::size_t requests() const noexcept { return requests_.load(); }
    std::size_t peak_in_flight() const noexcept { return peak_.load(); }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::atomic<std::size_t> requests_{0};
    std::atomic<std::size_t> in_flight_{0};
    std::atomic<std::size_t> peak_{0};
};

struct PropertyResult {
    bool ok = true;
    std::string detail;  // first counterexample when !ok
};

// Property suites. Each is deterministic in `seed`.

/// Random traces cut into random ordered partitions: coverage holds and
/// render/parse round-trips.
PropertyResult check_partition_coverage(std::size_t trials, std::uint64_t seed);
/// Capture fraction never decreases with the budget and reaches 1.0.
PropertyResult check_capture_monotone(std::size_t trials, std::uint64_t seed);
/// Histogram density integrates to 1 within 1e-9 for non-empty inputs.
PropertyResult check_histogram_mass(std::size_t trials, std::uint64_t seed);
/// Lowering the threshold never raises mean tokens or accuracy (truncate), and
/// clip mode never changes accuracy.
PropertyResult check_cutoff_monotone(std::size_t trials, std::uint64_t seed);
/// Cached replies are byte-identical with zero backend calls on a hit.
PropertyResult check_cache_determinism();
/// A TeacherClient with concurrency `bound` never has more than `bound`
/// requests in flight at the stub during a burst of `burst` requests.
PropertyResult check_concurrency_bound(std::size_t bound, std::size_t burst);

/// Pairs "p00".."p<n-1>" over traces that embed the pair id. method1 (skill)
/// has two steps and method2 (default) has one.
std::vector<JudgePair> synthetic_judge_pairs(std::size_t n);

/// Judge that reads the pair id and both candidates from the prompt and votes
/// for the method named in `preference` ("skill", "default" or "same"),
/// answering with whichever position that method occupies.
JudgeFn canned_judge(std::vector<std::string> preference);

/// Environment with no variables set.
EnvLookup empty_env();

/// Runs generate, decompose, prune and build-dataset with the mock backends
/// over tests/fixtures/problems20.jsonl into `output_dir`.
std::vector<StageReport> run_mock_pipeline(const std::filesystem::path& output_dir, std::uint64_t seed,
                                           bool force = false);

/// Re-derives every exported dataset record from the run's artifacts and
/// checks m' <= m, strictly fewer tokens than the original completion, and
/// that the revised answer equals both the original answer and the gold.
PropertyResult check_mock_dataset(const std::filesystem::path& output_dir);

/// Deterministic records for metric tests.
std::vector<EvalRecord> random_records(std::size_t n, std::size_t max_tokens, std::uint64_t seed);

}  // namespace drp::testing
