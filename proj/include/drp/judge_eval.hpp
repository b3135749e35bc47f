// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "drp/trace_model.hpp"

namespace drp {

class TeacherClient;

/// Judge instruction followed by the original trace and the two candidates,
/// each rendered as "Step n: text" lines. Both candidates must have been
/// derived from `trace`. Throws TraceMismatch.
std::string build_judge_prompt(std::string_view trace, const Decomposition& a, const Decomposition& b);

enum class Verdict { A, B, Same };

std::string_view to_string(Verdict verdict) noexcept;

/// First standalone verdict token. "Same" matches in any case; a bare "A" or
/// "B" must be uppercase unless it is the entire reply, so the article "a" in
/// prose is not read as a vote. Throws UnparseableVerdict.
Verdict parse_verdict(std::string_view raw);

struct JudgePair {
    std::string id;
    std::string trace;
    Decomposition method1;
    Decomposition method2;
};

struct PairwiseOptions {
    std::uint64_t seed = 0;
    bool randomize_positions = true;  // false: method1 is always candidate A
    std::string method1_name = "skill";
    std::string method2_name = "default";
    std::size_t concurrency = 8;
};

/// true when method1 is shown as candidate A. Deterministic in (seed, id).
bool method1_is_a(std::uint64_t seed, std::string_view pair_id, bool randomize = true) noexcept;

struct PairOutcome {
    std::string id;
    bool method1_is_a = true;
    std::optional<Verdict> verdict;  // position verdict as returned by the judge
    std::string winner;              // method name, "same" or "skipped"
    std::string error;               // why the pair was skipped
};

struct PairwiseResult {
    std::size_t total = 0;
    std::size_t method1_wins = 0;
    std::size_t method2_wins = 0;
    std::size_t same = 0;
    std::size_t skipped = 0;
    std::string method1_name;
    std::string method2_name;
    std::vector<PairOutcome> per_pair;

    nlohmann::json to_json() const;
};

/// Sends one prompt to a judge and returns its reply.
using JudgeFn = std::function<std::string(const std::string& prompt)>;

/// Judges every pair, re-prompting once when the verdict cannot be parsed.
/// Pairs whose judge call fails are counted as skipped.
PairwiseResult run_pairwise(std::span<const JudgePair> pairs, const JudgeFn& judge, const PairwiseOptions& options);
PairwiseResult run_pairwise(std::span<const JudgePair> pairs, TeacherClient& judge, const PairwiseOptions& options);

}  // namespace drp
