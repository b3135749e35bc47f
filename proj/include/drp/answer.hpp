// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace drp {

/// Reduced fraction with a positive denominator.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    static std::optional<Rational> make(std::int64_t num, std::int64_t den);
    double to_double() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
    friend bool operator==(const Rational&, const Rational&) = default;
};

/// A normalized final answer. Numbers compare exactly when both sides are
/// rational; if either side only parsed approximately, they compare within
/// kAnswerTolerance. Non-numeric answers compare as normalized text.
class AnswerValue {
public:
    enum class Kind { Exact, Approximate, Text };

    static constexpr double kAnswerTolerance = 1e-9;

    static AnswerValue exact(Rational value);
    static AnswerValue approximate(double value);
    static AnswerValue text(std::string value);

    /// Interprets a free-form answer string ("5 hours", "\frac{3}{4}", "$1,250").
    /// The first number found wins; otherwise the cleaned text is kept.
    static std::optional<AnswerValue> parse(std::string_view answer);

    Kind kind() const noexcept { return kind_; }
    bool is_numeric() const noexcept { return kind_ != Kind::Text; }
    const Rational& rational() const noexcept { return rational_; }
    double number() const noexcept;
    const std::string& text_value() const noexcept { return text_; }

    std::string to_string() const;

    friend bool operator==(const AnswerValue& a, const AnswerValue& b);

private:
    Kind kind_ = Kind::Text;
    Rational rational_;
    double approx_ = 0.0;
    std::string text_;
};

/// A numeric literal located in a larger text.
struct NumberToken {
    std::size_t offset = 0;
    std::size_t length = 0;
    AnswerValue value;
};

/// All numeric literals in `text`, in order of appearance. Handles signs,
/// thousands separators, decimals, simple fractions (3/4) and exponents.
std::vector<NumberToken> scan_numbers(std::string_view text);

/// Final answer of a completion. Priority: last boxed expression, then the
/// last "The answer is X" statement, then the last numeric token.
/// Throws Error(NoAnswerFound).
AnswerValue extract_final_answer(std::string_view text);

/// Non-throwing variant of extract_final_answer.
std::optional<AnswerValue> try_extract_final_answer(std::string_view text);

/// Offset of the sentence that states the final answer ("The answer is ...",
/// or one containing a boxed expression), if any. Used to split a synthesized
/// explanation into trace and answer.
std::optional<std::size_t> find_answer_sentence(std::string_view text);

}  // namespace drp
