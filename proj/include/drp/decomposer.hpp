// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drp/trace_model.hpp"

namespace drp {

class TeacherClient;

std::string build_decomposition_prompt(std::string_view thinking, SegmentationMode mode);

/// Extracts "Step n: ..." / "Skill: ..." blocks. Prose before the first step
/// and after a blank line that closes a step is ignored. Markdown bold is
/// tolerated. Throws ParseError, NonConsecutiveIndices or MissingSkillLabel.
std::vector<SkillStep> parse_decomposition(std::string_view raw, SegmentationMode mode);

/// Canonical text rendering; parse_decomposition(render_steps(s), mode) == s.
std::string render_steps(std::span<const SkillStep> steps, SegmentationMode mode);

struct ValidationReport {
    bool coverage = false;  // exact, modulo whitespace
    bool steps_non_empty = true;
    double coverage_ratio = 0.0;  // LCS over trace length; 1.0 when coverage holds
    std::vector<std::size_t> empty_steps;
};

ValidationReport validate_decomposition(std::string_view thinking, std::span<const SkillStep> steps);

enum class CoverageVerdict { Accept, AcceptWithWarning, Reject };

inline constexpr double kFuzzyCoverageThreshold = 0.95;

CoverageVerdict classify_coverage(const ValidationReport& report, double threshold = kFuzzyCoverageThreshold);

/// Length of the longest common subsequence (bit-parallel, O(|a||b|/64)).
std::size_t lcs_length(std::u32string_view a, std::u32string_view b);

/// Baseline segmentation that splits the trace at sentence boundaries.
Decomposition sentence_decomposition(std::string_view thinking);

struct StepCountSummary {
    std::size_t examples = 0;
    double mean = 0.0;
    double median = 0.0;
    std::size_t min = 0;
    std::size_t max = 0;
};

struct StatsSummary {
    StepCountSummary overall;
    std::map<SegmentationMode, StepCountSummary> by_mode;
};

/// Throws EmptyCollection on empty input.
StatsSummary decomposition_stats(std::span<const Decomposition> decompositions);

struct DecomposeOutcome {
    bool ok = false;
    Decomposition decomposition;
    ValidationReport report;
    CoverageVerdict verdict = CoverageVerdict::Reject;
    std::string drop_reason;  // set when !ok
    std::size_t teacher_calls = 0;
};

/// Prompts the teacher, re-prompting once with a format reminder when the
/// reply does not parse, then validates coverage.
DecomposeOutcome decompose_trace(TeacherClient& teacher, std::string_view thinking, SegmentationMode mode,
                                 double fuzzy_threshold = kFuzzyCoverageThreshold);

}  // namespace drp
