// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#include "drp/decomposer.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <optional>
#include <unordered_map>

#include "drp/error.hpp"
#include "drp/prompts.hpp"
#include "drp/teacher_client.hpp"
#include "drp/text.hpp"

namespace drp {

namespace {

struct StepHeader {
    std::size_t index;
    std::string rest;
};

std::string_view strip_emphasis(std::string_view s) {
    s = trim(s);
    while (!s.empty() && (s.front() == '*' || s.front() == '_')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == '*' || s.back() == '_')) {
        s.remove_suffix(1);
    }
    return trim(s);
}

std::optional<StepHeader> match_step_header(std::string_view line) {
    line = strip_emphasis(line);
    if (!istarts_with(line, "step")) {
        return std::nullopt;
    }
    std::size_t p = 4;
    while (p < line.size() && line[p] == ' ') {
        ++p;
    }
    const std::size_t digits = p;
    while (p < line.size() && std::isdigit(static_cast<unsigned char>(line[p]))) {
        ++p;
    }
    if (p == digits || p - digits > 6) {
        return std::nullopt;
    }
    const std::size_t index = std::stoul(std::string(line.substr(digits, p - digits)));
    while (p < line.size() && line[p] == ' ') {
        ++p;
    }
    if (p >= line.size() || (line[p] != ':' && line[p] != '.' && line[p] != ')')) {
        return std::nullopt;
    }
    return StepHeader{index, std::string(strip_emphasis(line.substr(p + 1)))};
}

std::optional<std::string> match_skill_line(std::string_view line) {
    line = strip_emphasis(line);
    if (!istarts_with(line, "skill")) {
        return std::nullopt;
    }
    std::size_t p = 5;
    if (p < line.size() && line[p] == 's') {
        ++p;
    }
    while (p < line.size() && line[p] == ' ') {
        ++p;
    }
    if (p >= line.size() || line[p] != ':') {
        return std::nullopt;
    }
    return std::string(strip_emphasis(line.substr(p + 1)));
}

StepCountSummary summarize(std::vector<std::size_t> counts) {
    StepCountSummary s;
    s.examples = counts.size();
    std::sort(counts.begin(), counts.end());
    double total = 0;
    for (auto c : counts) {
        total += static_cast<double>(c);
    }
    s.mean = total / static_cast<double>(counts.size());
    const std::size_t mid = counts.size() / 2;
    s.median = counts.size() % 2 == 1 ? static_cast<double>(counts[mid])
                                      : (static_cast<double>(counts[mid - 1]) + static_cast<double>(counts[mid])) / 2.0;
    s.min = counts.front();
    s.max = counts.back();
    return s;
}

}  // namespace

std::string build_decomposition_prompt(std::string_view thinking, SegmentationMode mode) {
    require(!trim(thinking).empty(), "build_decomposition_prompt: thinking must be non-empty");
    std::string prompt(mode == SegmentationMode::Skill ? prompts::kSkillSegmentation : prompts::kDefaultSegmentation);
    prompt += "\n\n";
    prompt += prompts::kReasoningPathHeader;
    prompt += trim(thinking);
    return prompt;
}

std::vector<SkillStep> parse_decomposition(std::string_view raw, SegmentationMode mode) {
    require(!trim(raw).empty(), "parse_decomposition: raw must be non-empty");
    std::vector<SkillStep> steps;
    bool collecting = false;  // appending continuation lines to the last step
    const std::string cleaned = strip_markup(raw);
    std::size_t start = 0;
    while (start <= cleaned.size()) {
        std::size_t end = cleaned.find('\n', start);
        if (end == std::string::npos) {
            end = cleaned.size();
        }
        const auto line = trim(std::string_view(cleaned).substr(start, end - start));
        start = end + 1;

        if (auto header = match_step_header(line)) {
            steps.push_back(SkillStep{header->index, header->rest, {}});
            collecting = true;
            continue;
        }
        if (steps.empty()) {
            continue;
        }
        if (auto skill = match_skill_line(line)) {
            if (steps.back().skill.empty()) {
                steps.back().skill = *skill;
            }
            collecting = false;
            continue;
        }
        if (line.empty()) {
            collecting = false;
            continue;
        }
        if (collecting) {
            auto& text = steps.back().text;
            if (!text.empty()) {
                text += ' ';
            }
            text += line;
        }
    }

    if (steps.empty()) {
        throw Error(Errc::ParseError, "no \"Step n:\" lines in teacher reply");
    }
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (steps[i].index != i + 1) {
            throw Error(Errc::NonConsecutiveIndices, "expected step " + std::to_string(i + 1) + ", found step " +
                                                         std::to_string(steps[i].index));
        }
        if (trim(steps[i].text).empty()) {
            throw Error(Errc::ParseError, "step " + std::to_string(i + 1) + " has no text");
        }
        if (mode == SegmentationMode::Skill && steps[i].skill.empty()) {
            throw Error(Errc::MissingSkillLabel, "step " + std::to_string(i + 1) + " has no Skill line");
        }
    }
    return steps;
}

std::string render_steps(std::span<const SkillStep> steps, SegmentationMode mode) {
    std::string out;
    for (const auto& step : steps) {
        out += "Step " + std::to_string(step.index) + ": " + step.text + "\n";
        if (mode == SegmentationMode::Skill || !step.skill.empty()) {
            out += "Skill: " + step.skill + "\n";
        }
    }
    return out;
}

std::size_t lcs_length(std::u32string_view a, std::u32string_view b) {
    if (a.empty() || b.empty()) {
        return 0;
    }
    if (a.size() > b.size()) {
        std::swap(a, b);
    }
    // Allison-Dix / Hyyro bit-vector LCS over the shorter string.
    const std::size_t words = (a.size() + 63) / 64;
    std::unordered_map<char32_t, std::vector<std::uint64_t>> masks;
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto& m = masks[a[i]];
        if (m.empty()) {
            m.assign(words, 0);
        }
        m[i / 64] |= std::uint64_t{1} << (i % 64);
    }
    std::vector<std::uint64_t> v(words, ~std::uint64_t{0});
    for (char32_t c : b) {
        const auto it = masks.find(c);
        if (it == masks.end()) {
            continue;
        }
        const auto& m = it->second;
        std::uint64_t carry = 0;
        std::uint64_t borrow = 0;
        for (std::size_t w = 0; w < words; ++w) {
            const std::uint64_t u = v[w] & m[w];
            const std::uint64_t partial = v[w] + u;
            const std::uint64_t sum = partial + carry;
            carry = (partial < v[w] || sum < partial) ? 1 : 0;
            // u is a subset of v's bits, so v - u never borrows by itself.
            const std::uint64_t delta = v[w] - u;
            const std::uint64_t diff = delta - borrow;
            borrow = delta < borrow ? 1 : 0;
            v[w] = sum | diff;
        }
    }
    std::size_t zeros = 0;
    for (std::size_t w = 0; w < words; ++w) {
        std::uint64_t word = v[w];
        if (w + 1 == words && a.size() % 64 != 0) {
            word |= ~std::uint64_t{0} << (a.size() % 64);
        }
        zeros += static_cast<std::size_t>(std::popcount(~word));
    }
    return zeros;
}

ValidationReport validate_decomposition(std::string_view thinking, std::span<const SkillStep> steps) {
    require(!steps.empty(), "validate_decomposition: steps must be parsed");
    ValidationReport report;
    std::string joined;
    for (const auto& step : steps) {
        if (trim(step.text).empty()) {
            report.steps_non_empty = false;
            report.empty_steps.push_back(step.index);
        }
        joined += step.text;
        joined += ' ';
    }
    const std::string trace_key = coverage_key(thinking);
    const std::string steps_key = coverage_key(joined);
    report.coverage = trace_key == steps_key;
    if (report.coverage) {
        report.coverage_ratio = 1.0;
    } else {
        const auto a = utf8_decode(steps_key);
        const auto b = utf8_decode(trace_key);
        report.coverage_ratio = b.empty() ? 0.0 : static_cast<double>(lcs_length(a, b)) / static_cast<double>(b.size());
    }
    return report;
}

CoverageVerdict classify_coverage(const ValidationReport& report, double threshold) {
    if (!report.steps_non_empty) {
        return CoverageVerdict::Reject;
    }
    if (report.coverage) {
        return CoverageVerdict::Accept;
    }
    return report.coverage_ratio >= threshold ? CoverageVerdict::AcceptWithWarning : CoverageVerdict::Reject;
}

Decomposition sentence_decomposition(std::string_view thinking) {
    std::vector<SkillStep> steps;
    for (auto& sentence : split_sentences(thinking)) {
        steps.push_back(SkillStep{steps.size() + 1, std::move(sentence), {}});
    }
    return Decomposition::make(SegmentationMode::Default, std::move(steps), thinking);
}

StatsSummary decomposition_stats(std::span<const Decomposition> decompositions) {
    if (decompositions.empty()) {
        throw Error(Errc::EmptyCollection, "decomposition_stats needs at least one decomposition");
    }
    std::vector<std::size_t> all;
    std::map<SegmentationMode, std::vector<std::size_t>> grouped;
    for (const auto& d : decompositions) {
        all.push_back(d.steps.size());
        grouped[d.mode].push_back(d.steps.size());
    }
    StatsSummary out;
    out.overall = summarize(std::move(all));
    for (auto& [mode, counts] : grouped) {
        out.by_mode[mode] = summarize(std::move(counts));
    }
    return out;
}

DecomposeOutcome decompose_trace(TeacherClient& teacher, std::string_view thinking, SegmentationMode mode,
                                 double fuzzy_threshold) {
    DecomposeOutcome out;
    const std::string prompt = build_decomposition_prompt(thinking, mode);
    std::vector<SkillStep> steps;
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string request = prompt;
        if (attempt == 1) {
            request += "\n\n";
            request += prompts::kSegmentationReminder;
            if (mode == SegmentationMode::Skill) {
                request += ", each followed by a \"Skill: ...\" line";
            }
            request += ".";
        }
        const auto reply = teacher.ask(request);
        ++out.teacher_calls;
        try {
            steps = parse_decomposition(reply.text, mode);
            break;
        } catch (const Error& e) {
            if (attempt == 1) {
                out.drop_reason = std::string(to_string(e.code()));
                return out;
            }
        }
    }
    out.report = validate_decomposition(thinking, steps);
    out.verdict = classify_coverage(out.report, fuzzy_threshold);
    if (out.verdict == CoverageVerdict::Reject) {
        out.drop_reason = out.report.steps_non_empty ? "CoverageBelowThreshold" : "EmptyStep";
        return out;
    }
    out.decomposition = Decomposition::make(mode, std::move(steps), thinking);
    out.ok = true;
    return out;
}

}  // namespace drp
