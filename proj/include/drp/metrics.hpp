// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drp/answer.hpp"

namespace drp {

inline constexpr std::size_t kMaxGenerationLength = 131072;

struct EvalRecord {
    std::string id;
    bool correct = false;
    std::size_t tokens = 0;  // whole completion, think block and answer
    std::string benchmark;
};

enum class CutoffMode { Truncate, Clip };

std::string_view to_string(CutoffMode mode) noexcept;
CutoffMode parse_cutoff_mode(std::string_view text);

struct CutoffPolicy {
    std::size_t threshold = 12000;
    CutoffMode mode = CutoffMode::Truncate;
    std::size_t max_generation_length = kMaxGenerationLength;
};

/// true iff the completion's final answer equals `gold`; a completion
/// without an extractable answer scores false.
bool score_answer(std::string_view completion, const AnswerValue& gold);

struct PassAt1 {
    std::size_t correct = 0;
    std::size_t total = 0;

    double value() const noexcept { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }
    std::string fraction() const { return std::to_string(correct) + "/" + std::to_string(total); }
};

/// Throws EmptyCollection.
PassAt1 pass_at_1(std::span<const EvalRecord> records);

double mean_tokens(std::span<const EvalRecord> records);

struct CutoffResult {
    std::vector<EvalRecord> records;
    std::vector<bool> token_counted;  // false for records excluded in clip mode
    std::size_t affected = 0;         // records above the threshold
    double mean_tokens = 0.0;         // over counted records

    PassAt1 accuracy() const { return pass_at_1(records); }
};

/// Truncate: tokens above the threshold become the threshold and the record
/// is marked incorrect. Clip: such records keep their correctness but are left
/// out of token statistics.
CutoffResult apply_cutoff(std::span<const EvalRecord> records, const CutoffPolicy& policy = {});

struct CurvePoint {
    std::size_t budget = 0;
    double fraction = 0.0;
};

/// Budgets 0, step, 2*step, ... up to and including max_len.
std::vector<std::size_t> budget_grid(std::size_t max_len, std::size_t step);

/// Fraction of correct records whose completion fits each budget. Records
/// marked incorrect are ignored. Throws NoCorrectRecords.
std::vector<CurvePoint> capture_curve(std::span<const EvalRecord> records, std::span<const std::size_t> budgets);

struct Histogram {
    std::vector<double> edges;    // bins + 1 edges over [0, 1]
    std::vector<double> density;  // integrates to 1 over [0, 1]
    std::vector<std::size_t> counts;

    double total_mass() const;
};

inline constexpr std::size_t kDefaultHistogramBins = 50;

/// Histogram of tokens / max_len; lengths beyond max_len fall in the last bin.
/// Empty input gives zero density everywhere.
Histogram normalized_histogram(std::span<const EvalRecord> records, std::size_t max_len,
                               std::size_t bins = kDefaultHistogramBins);

/// Rounded percent reduction (1 - after/before) * 100.
long reduction_percent(double mean_before, double mean_after);

/// "-64%" for a 64% reduction, "+12%" for growth, "0%" for none.
std::string format_reduction(long percent);

struct CompressionReport {
    std::string benchmark;
    double mean_before = 0.0;
    double mean_after = 0.0;
    long reduction = 0;
    PassAt1 pass_before;
    PassAt1 pass_after;

    std::string reduction_label() const { return format_reduction(reduction); }
};

/// Throws EmptyCollection or BenchmarkMismatch.
CompressionReport compression_report(std::span<const EvalRecord> before, std::span<const EvalRecord> after);

}  // namespace drp
