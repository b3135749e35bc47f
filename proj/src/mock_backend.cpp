// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#include "mock_backend.hpp"

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "drp/answer.hpp"
#include "drp/decomposer.hpp"
#include "drp/error.hpp"
#include "drp/prompts.hpp"
#include "drp/text.hpp"

namespace drp::mock {

namespace {

bool starts_with(std::string_view s, std::string_view prefix) {
    return s.substr(0, prefix.size()) == prefix;
}

bool contains(std::string_view s, std::string_view needle) {
    return s.find(needle) != std::string_view::npos;
}

std::string_view between(std::string_view s, std::string_view open, std::string_view close) {
    const auto a = s.find(open);
    if (a == std::string_view::npos) {
        return {};
    }
    const auto from = a + open.size();
    const auto b = close.empty() ? std::string_view::npos : s.find(close, from);
    return s.substr(from, b == std::string_view::npos ? std::string_view::npos : b - from);
}

// ---- decomposition ----------------------------------------------------------

std::string skill_for(std::string_view text) {
    const std::string lower = to_lower_ascii(text);
    if (contains(lower, "check") || contains(lower, "verify")) {
        return "Checking a result";
    }
    if (contains(text, "÷") || contains(lower, "divid") || contains(lower, "division") || contains(text, " / ")) {
        return "Division";
    }
    if (contains(text, "×") || contains(lower, "multipl") || contains(lower, "times") || contains(text, " * ")) {
        return "Multiplication";
    }
    if (contains(lower, "convert")) {
        return "Unit conversion";
    }
    if (contains(text, " + ") || contains(lower, " add") || contains(lower, "sum") || contains(lower, "total")) {
        return "Addition";
    }
    if (contains(text, " - ") || contains(lower, "subtract") || contains(lower, "minus") ||
        contains(lower, "difference")) {
        return "Subtraction";
    }
    if (!scan_numbers(text).empty()) {
        return "Interpreting a quantity";
    }
    return "Planning";
}

std::string decomposition_reply(std::string_view prompt, SegmentationMode mode) {
    auto trace = between(prompt, prompts::kReasoningPathHeader, "\n\nReminder:");
    const auto pieces = mode == SegmentationMode::Skill ? split_sentences(trace) : split_lines(trace);
    std::string out;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        out += "Step " + std::to_string(i + 1) + ": " + pieces[i] + "\n";
        if (mode == SegmentationMode::Skill) {
            out += "Skill: " + skill_for(pieces[i]) + "\n";
        }
    }
    return out;
}

// ---- revision ---------------------------------------------------------------

std::string compress(std::string_view text) {
    static constexpr std::array<std::string_view, 10> kLeading = {
        "First, ", "Next, ", "Then, ", "Finally, ", "So, ", "So ", "Okay, ", "Now, ", "Well, ", "Also, ",
    };
    static constexpr std::array<std::pair<std::string_view, std::string_view>, 10> kPhrases = {{
        {"I need to ", ""},
        {"I'll ", ""},
        {"I will ", ""},
        {"let me ", ""},
        {"Let me ", ""},
        {"we need to ", ""},
        {"in order to ", "to "},
        {", which gives ", ", giving "},
        {", resulting in ", ", giving "},
        {", which equals ", ", giving "},
    }};
    std::string s = normalize_text(text);
    for (auto lead : kLeading) {
        if (starts_with(s, lead)) {
            s.erase(0, lead.size());
            break;
        }
    }
    for (auto [from, to] : kPhrases) {
        for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
            s.replace(pos, from.size(), to);
        }
    }
    if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') {
        s[0] = static_cast<char>(s[0] - 'a' + 'A');
    }
    return s;
}

std::vector<AnswerValue> numbers_in(std::string_view text) {
    std::vector<AnswerValue> out;
    for (auto& token : scan_numbers(text)) {
        out.push_back(std::move(token.value));
    }
    return out;
}

std::string last_sentence(std::string_view text) {
    auto sentences = split_sentences(text);
    return sentences.empty() ? std::string() : sentences.back();
}

// A step restates an earlier result when it introduces no new number and ends
// on a value that closed an earlier step.
bool restates_result(const std::vector<AnswerValue>& nums, const std::vector<std::vector<AnswerValue>>& prior) {
    if (nums.empty()) {
        return false;
    }
    const auto seen = [&](const AnswerValue& v) {
        for (const auto& step : prior) {
            for (const auto& p : step) {
                if (p == v) {
                    return true;
                }
            }
        }
        return false;
    };
    for (const auto& v : nums) {
        if (!seen(v)) {
            return false;
        }
    }
    for (const auto& step : prior) {
        if (!step.empty() && step.back() == nums.back()) {
            return true;
        }
    }
    return false;
}

std::string revision_reply(std::string_view prompt, const MockOptions& options) {
    const auto steps_block = between(prompt, prompts::kStepsHeader, "\nOriginal answer:\n");
    const auto original_answer = trim(between(prompt, prompts::kOriginalAnswerHeader, "\n\nOutput format:"));
    const auto steps = parse_decomposition(steps_block, SegmentationMode::Default);

    std::string lines;
    std::vector<std::string> kept;
    std::vector<std::string> prior_texts;
    std::vector<std::vector<AnswerValue>> prior_numbers;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const auto& text = steps[i].text;
        const std::string key = normalize_text(text);
        const auto nums = numbers_in(text);
        const std::string n = std::to_string(i + 1) + ". ";
        const bool states_answer = i + 1 == steps.size() && contains(to_lower_ascii(text), "answer is");

        bool duplicate = false;
        for (const auto& p : prior_texts) {
            duplicate = duplicate || p == key || normalize_text(last_sentence(p)) == key;
        }
        if (i == 0 || states_answer) {
            lines += n + "KEEP: " + text + "\n";
            kept.push_back(text);
        } else if (duplicate || restates_result(nums, prior_numbers)) {
            lines += n + "DELETE: restates an earlier result.\n";
        } else if (word_count(text) > options.compress_word_threshold &&
                   word_count(compress(text)) < word_count(text)) {
            const std::string shorter = compress(text);
            lines += n + "SINGLE-STEP COMPRESS: " + shorter + "\n";
            kept.push_back(shorter);
        } else {
            lines += n + "KEEP: " + text + "\n";
            kept.push_back(text);
        }
        prior_texts.push_back(key);
        prior_numbers.push_back(nums);
    }

    std::string synthesis;
    for (const auto& k : kept) {
        if (!synthesis.empty()) {
            synthesis += ' ';
        }
        synthesis += k;
    }
    if (const auto at = find_answer_sentence(original_answer)) {
        synthesis += ' ';
        synthesis += trim(original_answer.substr(*at));
    }
    return lines + "\nFinal Answer: " + synthesis + "\n";
}

// ---- judge ------------------------------------------------------------------

std::size_t count_steps(std::string_view block) {
    try {
        return parse_decomposition(block, SegmentationMode::Default).size();
    } catch (const Error&) {
        return 0;
    }
}

std::string judge_reply(std::string_view prompt) {
    const auto b_at = prompt.rfind(prompts::kVersionBHeader);
    const auto a_at = prompt.rfind(prompts::kVersionAHeader, b_at);
    if (a_at == std::string_view::npos || b_at == std::string_view::npos) {
        throw Error(Errc::UnrecognizedPrompt, "judge prompt without Version A/B blocks");
    }
    const auto a_start = a_at + prompts::kVersionAHeader.size();
    const std::size_t a = count_steps(prompt.substr(a_start, b_at - a_start));
    const std::size_t b = count_steps(prompt.substr(b_at + prompts::kVersionBHeader.size()));
    if (a > b) {
        return "A";
    }
    return a == b ? "Same" : "B";
}

// ---- student ----------------------------------------------------------------

struct Operation {
    std::string symbol;
    Rational operand;
};

std::optional<Rational> apply(const Rational& lhs, const std::string& op, const Rational& rhs) {
    // Operands are small integers, so plain int64 arithmetic cannot overflow.
    if (op == "+") {
        return Rational::make(lhs.num * rhs.den + rhs.num * lhs.den, lhs.den * rhs.den);
    }
    if (op == "-") {
        return Rational::make(lhs.num * rhs.den - rhs.num * lhs.den, lhs.den * rhs.den);
    }
    if (op == "×") {
        return Rational::make(lhs.num * rhs.num, lhs.den * rhs.den);
    }
    return Rational::make(lhs.num * rhs.den, lhs.den * rhs.num);
}

std::string format(const Rational& r) {
    return AnswerValue::exact(r).to_string();
}

std::string student_reply(std::string_view prompt) {
    const auto q = prompt.find("What is ");
    const auto end = q == std::string_view::npos ? q : prompt.find('?', q);
    if (end == std::string_view::npos) {
        throw Error(Errc::UnrecognizedPrompt, "student prompt without a \"What is ...?\" question");
    }
    const auto expr = prompt.substr(q + 8, end - q - 8);

    std::optional<Rational> first;
    std::vector<Operation> ops;
    std::string pending;
    std::size_t i = 0;
    while (i < expr.size()) {
        const char c = expr[i];
        if (c == ' ') {
            ++i;
        } else if (c >= '0' && c <= '9') {
            std::int64_t v = 0;
            while (i < expr.size() && expr[i] >= '0' && expr[i] <= '9' && v < 100000000) {
                v = v * 10 + (expr[i++] - '0');
            }
            const Rational r{v, 1};
            if (!first) {
                first = r;
            } else if (!pending.empty()) {
                ops.push_back({std::exchange(pending, {}), r});
            } else {
                throw Error(Errc::UnrecognizedPrompt, "two numbers without an operator");
            }
        } else if (c == '+' || c == '-') {
            pending = std::string(1, c);
            ++i;
        } else if (c == '*' || c == 'x') {
            pending = "×";
            ++i;
        } else if (c == '/') {
            pending = "÷";
            ++i;
        } else if (expr.substr(i, 2) == "×" || expr.substr(i, 2) == "÷") {
            pending = std::string(expr.substr(i, 2));
            i += 2;
        } else {
            throw Error(Errc::UnrecognizedPrompt, "unsupported character in student question");
        }
    }
    if (!first || ops.empty() || !pending.empty()) {
        throw Error(Errc::UnrecognizedPrompt, "student question is not a binary arithmetic chain");
    }

    std::string shown = format(*first);
    for (const auto& op : ops) {
        shown += " " + op.symbol + " " + format(op.operand);
    }
    static constexpr std::array<std::string_view, 3> kLeads = {"First", "Then", "Next"};
    std::string trace = "Okay, let me work through this carefully.\nThe question asks for " + shown + ".\n";
    Rational acc = *first;
    for (std::size_t k = 0; k < ops.size(); ++k) {
        const auto next = apply(acc, ops[k].symbol, ops[k].operand);
        if (!next) {
            throw Error(Errc::UnrecognizedPrompt, "division by zero in student question");
        }
        trace += std::string(kLeads[std::min<std::size_t>(k, 2)]) + ", " + format(acc) + " " + ops[k].symbol + " " +
                 format(ops[k].operand) + " = " + format(*next) + ".\n";
        trace += "So the result of that step is " + format(*next) + ".\n";
        acc = *next;
    }
    trace += "Wait, let me double-check: " + shown + " = " + format(acc) + ".\n";
    return "<think>\n" + trace + "</think>\n\nThe answer is \\boxed{" + format(acc) + "}.";
}

}  // namespace

std::string reply(const ChatRequest& request, const MockOptions& options) {
    const std::string_view prompt = request.user_prompt;
    if (request.system_prompt && *request.system_prompt == prompts::kStudentSystem) {
        return student_reply(prompt);
    }
    if (starts_with(prompt, prompts::kSkillSegmentation)) {
        return decomposition_reply(prompt, SegmentationMode::Skill);
    }
    if (starts_with(prompt, prompts::kDefaultSegmentation)) {
        return decomposition_reply(prompt, SegmentationMode::Default);
    }
    if (starts_with(prompt, prompts::kSelfRevision)) {
        return revision_reply(prompt, options);
    }
    if (starts_with(prompt, prompts::kPairwiseJudge)) {
        return judge_reply(prompt);
    }
    throw Error(Errc::UnrecognizedPrompt, "prompt matches no known template family");
}

}  // namespace drp::mock
