// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#include "drp/judge_eval.hpp"

#include "drp/error.hpp"
#include "drp/parallel.hpp"
#include "drp/prompts.hpp"
#include "drp/teacher_client.hpp"
#include "drp/text.hpp"

namespace drp {

namespace {

std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

bool is_alpha(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z');
}

std::string render_candidate(const Decomposition& d) {
    std::string out;
    for (const auto& step : d.steps) {
        out += "Step " + std::to_string(step.index) + ": " + step.text + "\n";
    }
    return out;
}

}  // namespace

std::string build_judge_prompt(std::string_view trace, const Decomposition& a, const Decomposition& b) {
    require(!a.steps.empty() && !b.steps.empty(), "build_judge_prompt: candidates must be non-empty");
    const std::string hash = trace_hash(trace);
    if (a.source_hash != hash || b.source_hash != hash) {
        throw Error(Errc::TraceMismatch, "candidate segmentations were derived from a different trace");
    }
    std::string prompt(prompts::kPairwiseJudge);
    prompt += "\n\nOriginal reasoning:\n";
    prompt += trim(trace);
    prompt += "\n\n";
    prompt += prompts::kVersionAHeader;
    prompt += render_candidate(a);
    prompt += "\n";
    prompt += prompts::kVersionBHeader;
    prompt += render_candidate(b);
    return prompt;
}

std::string_view to_string(Verdict verdict) noexcept {
    switch (verdict) {
    case Verdict::A:
        return "A";
    case Verdict::B:
        return "B";
    case Verdict::Same:
        return "Same";
    }
    return "?";
}

Verdict parse_verdict(std::string_view raw) {
    require(!trim(raw).empty(), "parse_verdict: raw must be non-empty");
    std::string bare;
    for (char c : raw) {
        if (is_alpha(c)) {
            bare += c;
        } else if (c != ' ' && c != '\'' && c != '"' && c != '.' && c != '*' && c != '\n' && c != '\t') {
            bare += '#';
        }
    }
    if (bare == "a" || bare == "b") {
        return bare == "a" ? Verdict::A : Verdict::B;
    }
    std::size_t i = 0;
    while (i < raw.size()) {
        if (!is_alpha(raw[i])) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        while (i < raw.size() && is_alpha(raw[i])) {
            ++i;
        }
        const auto word = raw.substr(start, i - start);
        if (word == "A") {
            return Verdict::A;
        }
        if (word == "B") {
            return Verdict::B;
        }
        if (iequals(word, "same")) {
            return Verdict::Same;
        }
    }
    throw Error(Errc::UnparseableVerdict, "no A/B/Same verdict in \"" + std::string(raw.substr(0, 80)) + "\"");
}

bool method1_is_a(std::uint64_t seed, std::string_view pair_id, bool randomize) noexcept {
    if (!randomize) {
        return true;
    }
    return (splitmix64(seed ^ fnv1a(pair_id)) & 1U) == 0;
}

nlohmann::json PairwiseResult::to_json() const {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : per_pair) {
        nlohmann::json entry = {
            {"id", p.id},
            {"assignment", {{"A", p.method1_is_a ? method1_name : method2_name},
                            {"B", p.method1_is_a ? method2_name : method1_name}}},
            {"verdict", p.verdict ? nlohmann::json(std::string(to_string(*p.verdict))) : nlohmann::json(nullptr)},
            {"winner", p.winner},
        };
        if (!p.error.empty()) {
            entry["error"] = p.error;
        }
        pairs.push_back(std::move(entry));
    }
    return {
        {"total", total},
        {"wins_by_method", {{method1_name, method1_wins}, {method2_name, method2_wins}}},
        {"same", same},
        {"skipped", skipped},
        {"per_pair", std::move(pairs)},
    };
}

PairwiseResult run_pairwise(std::span<const JudgePair> pairs, const JudgeFn& judge, const PairwiseOptions& options) {
    require(!pairs.empty(), "run_pairwise: pairs must be non-empty");
    PairwiseResult result;
    result.total = pairs.size();
    result.method1_name = options.method1_name;
    result.method2_name = options.method2_name;
    result.per_pair.resize(pairs.size());

    run_parallel(pairs.size(), options.concurrency, [&](std::size_t i) {
        const auto& pair = pairs[i];
        auto& out = result.per_pair[i];
        out.id = pair.id;
        out.method1_is_a = method1_is_a(options.seed, pair.id, options.randomize_positions);
        try {
            const auto& a = out.method1_is_a ? pair.method1 : pair.method2;
            const auto& b = out.method1_is_a ? pair.method2 : pair.method1;
            const std::string prompt = build_judge_prompt(pair.trace, a, b);
            try {
                out.verdict = parse_verdict(judge(prompt));
            } catch (const Error& e) {
                if (e.code() != Errc::UnparseableVerdict && e.code() != Errc::PreconditionViolation) {
                    throw;
                }
                out.verdict = parse_verdict(judge(prompt + "\n\n" + std::string(prompts::kVerdictReminder)));
            }
        } catch (const Error& e) {
            out.error = std::string(to_string(e.code()));
        }
    });

    for (auto& p : result.per_pair) {
        if (!p.verdict) {
            p.winner = "skipped";
            ++result.skipped;
        } else if (*p.verdict == Verdict::Same) {
            p.winner = "same";
            ++result.same;
        } else if ((*p.verdict == Verdict::A) == p.method1_is_a) {
            p.winner = options.method1_name;
            ++result.method1_wins;
        } else {
            p.winner = options.method2_name;
            ++result.method2_wins;
        }
    }
    return result;
}

PairwiseResult run_pairwise(std::span<const JudgePair> pairs, TeacherClient& judge, const PairwiseOptions& options) {
    return run_pairwise(
        pairs, [&judge](const std::string& prompt) { return judge.ask(prompt).text; }, options);
}

}  // namespace drp
