// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#include "drp/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "drp/error.hpp"
#include "drp/kernels.hpp"
#include "drp/text.hpp"

namespace drp {

std::string_view to_string(CutoffMode mode) noexcept {
    return mode == CutoffMode::Truncate ? "truncate" : "clip";
}

CutoffMode parse_cutoff_mode(std::string_view text) {
    const auto t = to_lower_ascii(trim(text));
    if (t == "truncate") {
        return CutoffMode::Truncate;
    }
    if (t == "clip") {
        return CutoffMode::Clip;
    }
    throw Error(Errc::ConfigError, "cutoff mode must be truncate or clip, got \"" + std::string(text) + "\"");
}

bool score_answer(std::string_view completion, const AnswerValue& gold) {
    try {
        const auto answer = try_extract_final_answer(completion);
        return answer.has_value() && *answer == gold;
    } catch (...) {
        return false;
    }
}

PassAt1 pass_at_1(std::span<const EvalRecord> records) {
    if (records.empty()) {
        throw Error(Errc::EmptyCollection, "pass_at_1 needs at least one record");
    }
    PassAt1 p;
    p.total = records.size();
    p.correct = static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const auto& r) { return r.correct; }));
    return p;
}

double mean_tokens(std::span<const EvalRecord> records) {
    if (records.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (const auto& r : records) {
        sum += static_cast<double>(r.tokens);
    }
    return sum / static_cast<double>(records.size());
}

CutoffResult apply_cutoff(std::span<const EvalRecord> records, const CutoffPolicy& policy) {
    require(policy.threshold > 0, "apply_cutoff: threshold must be positive");
    require(policy.threshold <= policy.max_generation_length, "apply_cutoff: threshold exceeds max generation length");
    CutoffResult out;
    out.records.assign(records.begin(), records.end());
    out.token_counted.assign(records.size(), true);
    double sum = 0.0;
    std::size_t counted = 0;
    for (std::size_t i = 0; i < out.records.size(); ++i) {
        auto& r = out.records[i];
        if (r.tokens > policy.threshold) {
            ++out.affected;
            if (policy.mode == CutoffMode::Truncate) {
                r.tokens = policy.threshold;
                r.correct = false;
            } else {
                out.token_counted[i] = false;
                continue;
            }
        }
        sum += static_cast<double>(r.tokens);
        ++counted;
    }
    out.mean_tokens = counted == 0 ? 0.0 : sum / static_cast<double>(counted);
    return out;
}

std::vector<std::size_t> budget_grid(std::size_t max_len, std::size_t step) {
    require(step > 0, "budget_grid: step must be positive");
    std::vector<std::size_t> grid;
    for (std::size_t b = 0; b < max_len; b += step) {
        grid.push_back(b);
    }
    grid.push_back(max_len);
    return grid;
}

std::vector<CurvePoint> capture_curve(std::span<const EvalRecord> records, std::span<const std::size_t> budgets) {
    std::vector<std::size_t> lengths;
    for (const auto& r : records) {
        if (r.correct) {
            lengths.push_back(r.tokens);
        }
    }
    if (lengths.empty()) {
        throw Error(Errc::NoCorrectRecords, "capture curve needs at least one correct record");
    }
    std::sort(lengths.begin(), lengths.end());
    std::vector<CurvePoint> curve;
    curve.reserve(budgets.size());
    for (auto budget : budgets) {
        const auto within = std::upper_bound(lengths.begin(), lengths.end(), budget) - lengths.begin();
        curve.push_back({budget, static_cast<double>(within) / static_cast<double>(lengths.size())});
    }
    return curve;
}

double Histogram::total_mass() const {
    double mass = 0.0;
    for (std::size_t b = 0; b < density.size(); ++b) {
        mass += density[b] * (edges[b + 1] - edges[b]);
    }
    return mass;
}

Histogram normalized_histogram(std::span<const EvalRecord> records, std::size_t max_len, std::size_t bins) {
    require(max_len > 0, "normalized_histogram: max_len must be positive");
    require(bins >= 2, "normalized_histogram: bins must be >= 2");
    Histogram h;
    h.edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b) {
        h.edges[b] = static_cast<double>(b) / static_cast<double>(bins);
    }
    std::vector<std::size_t> tokens;
    tokens.reserve(records.size());
    for (const auto& r : records) {
        tokens.push_back(r.tokens);
    }
    h.counts = kernels::parallel::histogram(tokens, max_len, bins);
    h.density.assign(bins, 0.0);
    if (!tokens.empty()) {
        const double n = static_cast<double>(tokens.size());
        for (std::size_t b = 0; b < bins; ++b) {
            h.density[b] = static_cast<double>(h.counts[b]) / (n * (h.edges[b + 1] - h.edges[b]));
        }
    }
    return h;
}

long reduction_percent(double mean_before, double mean_after) {
    require(mean_before > 0.0, "reduction_percent: mean_before must be positive");
    return std::lround((1.0 - mean_after / mean_before) * 100.0);
}

std::string format_reduction(long percent) {
    if (percent == 0) {
        return "0%";
    }
    return (percent > 0 ? "-" : "+") + std::to_string(percent > 0 ? percent : -percent) + "%";
}

CompressionReport compression_report(std::span<const EvalRecord> before, std::span<const EvalRecord> after) {
    if (before.empty() || after.empty()) {
        throw Error(Errc::EmptyCollection, "compression_report needs records on both sides");
    }
    const auto& label = before.front().benchmark;
    const auto same_label = [&](const EvalRecord& r) { return r.benchmark == label; };
    if (!std::all_of(before.begin(), before.end(), same_label) || !std::all_of(after.begin(), after.end(), same_label)) {
        throw Error(Errc::BenchmarkMismatch, "compression_report inputs mix benchmarks");
    }
    CompressionReport report;
    report.benchmark = label;
    report.mean_before = mean_tokens(before);
    report.mean_after = mean_tokens(after);
    report.reduction = reduction_percent(report.mean_before, report.mean_after);
    report.pass_before = pass_at_1(before);
    report.pass_after = pass_at_1(after);
    return report;
}

}  // namespace drp
