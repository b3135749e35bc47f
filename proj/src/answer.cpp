// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#include "drp/answer.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>

#include "drp/error.hpp"
#include "drp/text.hpp"

namespace drp {

namespace {

bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }
bool is_alpha(char c) noexcept { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

constexpr std::size_t kMaxExactDigits = 18;

std::int64_t pow10(std::size_t k) {
    std::int64_t v = 1;
    while (k-- > 0) {
        v *= 10;
    }
    return v;
}

// Digits-only string to int64; nullopt on overflow.
std::optional<std::int64_t> parse_digits(std::string_view digits) {
    if (digits.empty() || digits.size() > kMaxExactDigits) {
        return std::nullopt;
    }
    std::int64_t v = 0;
    for (char c : digits) {
        v = v * 10 + (c - '0');
    }
    return v;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
}

// Content of a `{...}` group starting at `open` (which must be '{').
std::optional<std::string_view> brace_group(std::string_view s, std::size_t open, std::size_t* end = nullptr) {
    if (open >= s.size() || s[open] != '{') {
        return std::nullopt;
    }
    int depth = 0;
    for (std::size_t i = open; i < s.size(); ++i) {
        if (s[i] == '{') {
            ++depth;
        } else if (s[i] == '}' && --depth == 0) {
            if (end != nullptr) {
                *end = i + 1;
            }
            return s.substr(open + 1, i - open - 1);
        }
    }
    return std::nullopt;
}

// Strips LaTeX presentation noise and rewrites \frac{a}{b} as a/b.
std::string clean_latex(std::string_view raw) {
    std::string s(raw);
    for (std::string_view cmd : {"\\dfrac", "\\tfrac"}) {
        replace_all(s, cmd, "\\frac");
    }
    for (std::string_view noise : {"\\left", "\\right", "\\!", "\\,", "\\;", "\\ ", "\\$", "\\%", "^\\circ", "^{\\circ}", "$", "%"}) {
        replace_all(s, noise, "");
    }
    // \text{...} and \mathrm{...} carry units or words; keep only their content.
    for (std::string_view cmd : {"\\text", "\\mathrm", "\\textbf", "\\mbox"}) {
        std::size_t pos = 0;
        while ((pos = s.find(cmd, pos)) != std::string::npos) {
            std::size_t end = 0;
            if (auto inner = brace_group(s, pos + cmd.size(), &end)) {
                std::string content(*inner);
                s.replace(pos, end - pos, content);
                pos += content.size();
            } else {
                pos += cmd.size();
            }
        }
    }
    std::size_t pos = 0;
    while ((pos = s.find("\\frac", pos)) != std::string::npos) {
        std::size_t mid = 0;
        std::size_t end = 0;
        auto numer = brace_group(s, pos + 5, &mid);
        auto denom = numer ? brace_group(s, mid, &end) : std::nullopt;
        if (!numer || !denom) {
            pos += 5;
            continue;
        }
        std::string repl = std::string(trim(*numer)) + "/" + std::string(trim(*denom));
        s.replace(pos, end - pos, repl);
        pos += repl.size();
    }
    return s;
}

std::string text_key(std::string_view raw) {
    std::string key;
    for (char c : to_lower_ascii(clean_latex(raw))) {
        if (!std::isspace(static_cast<unsigned char>(c))) {
            key.push_back(c);
        }
    }
    while (!key.empty() && (key.back() == '.' || key.back() == '*')) {
        key.pop_back();
    }
    while (!key.empty() && key.front() == '*') {
        key.erase(key.begin());
    }
    if (key.size() >= 2 && key.front() == '(' && key.back() == ')') {
        key = key.substr(1, key.size() - 2);
    }
    return key;
}

bool is_math_symbol(char c) noexcept {
    switch (c) {
    case '^': case '_': case '+': case '*': case '/': case '=': case '(': case ')':
    case '{': case '}': case '[': case ']': case '\\': case '<': case '>':
        return true;
    default:
        return false;
    }
}

}  // namespace

std::optional<Rational> Rational::make(std::int64_t num, std::int64_t den) {
    if (den == 0) {
        return std::nullopt;
    }
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const std::int64_t g = std::gcd(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    return Rational{num, den};
}

AnswerValue AnswerValue::exact(Rational value) {
    AnswerValue v;
    v.kind_ = Kind::Exact;
    v.rational_ = value;
    return v;
}

AnswerValue AnswerValue::approximate(double value) {
    AnswerValue v;
    v.kind_ = Kind::Approximate;
    v.approx_ = value;
    return v;
}

AnswerValue AnswerValue::text(std::string value) {
    AnswerValue v;
    v.kind_ = Kind::Text;
    v.text_ = text_key(value);
    return v;
}

double AnswerValue::number() const noexcept {
    return kind_ == Kind::Exact ? rational_.to_double() : approx_;
}

std::string AnswerValue::to_string() const {
    switch (kind_) {
    case Kind::Exact:
        return rational_.den == 1 ? std::to_string(rational_.num)
                                  : std::to_string(rational_.num) + "/" + std::to_string(rational_.den);
    case Kind::Approximate: {
        std::ostringstream out;
        out.precision(17);
        out << approx_;
        return out.str();
    }
    case Kind::Text:
        return text_;
    }
    return {};
}

bool operator==(const AnswerValue& a, const AnswerValue& b) {
    if (a.is_numeric() != b.is_numeric()) {
        return false;
    }
    if (!a.is_numeric()) {
        return a.text_ == b.text_;
    }
    if (a.kind_ == AnswerValue::Kind::Exact && b.kind_ == AnswerValue::Kind::Exact) {
        return a.rational_ == b.rational_;
    }
    return std::fabs(a.number() - b.number()) <= AnswerValue::kAnswerTolerance;
}

std::vector<NumberToken> scan_numbers(std::string_view s) {
    std::vector<NumberToken> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const std::size_t start = i;
        bool negative = false;
        std::size_t p = i;
        if ((s[p] == '-' || s[p] == '+') && p + 1 < s.size()) {
            const bool prev_ok = p == 0 || !(std::isalnum(static_cast<unsigned char>(s[p - 1])) || s[p - 1] == ')');
            const bool next_ok = is_digit(s[p + 1]) || (s[p + 1] == '.' && p + 2 < s.size() && is_digit(s[p + 2]));
            if (prev_ok && next_ok) {
                negative = s[p] == '-';
                ++p;
            }
        }
        const bool leading_dot = s[p] == '.' && p + 1 < s.size() && is_digit(s[p + 1]) && (p == 0 || !is_digit(s[p - 1]));
        if (!is_digit(s[p]) && !leading_dot) {
            ++i;
            continue;
        }
        std::string int_digits;
        while (p < s.size() && is_digit(s[p])) {
            int_digits.push_back(s[p++]);
        }
        // Thousands separators: 1,234,567 (groups of exactly three digits).
        if (!int_digits.empty() && int_digits.size() <= 3) {
            while (p + 3 < s.size() && s[p] == ',' && is_digit(s[p + 1]) && is_digit(s[p + 2]) && is_digit(s[p + 3]) &&
                   (p + 4 >= s.size() || !is_digit(s[p + 4]))) {
                int_digits.append(s.substr(p + 1, 3));
                p += 4;
            }
        }
        std::string frac_digits;
        if (p + 1 < s.size() && s[p] == '.' && is_digit(s[p + 1])) {
            ++p;
            while (p < s.size() && is_digit(s[p])) {
                frac_digits.push_back(s[p++]);
            }
        }
        bool has_exponent = false;
        int exponent = 0;
        if (p + 1 < s.size() && (s[p] == 'e' || s[p] == 'E')) {
            std::size_t q = p + 1;
            bool exp_neg = false;
            if (q < s.size() && (s[q] == '-' || s[q] == '+')) {
                exp_neg = s[q] == '-';
                ++q;
            }
            std::size_t digits_start = q;
            while (q < s.size() && is_digit(s[q])) {
                ++q;
            }
            if (q > digits_start && (q >= s.size() || !is_alpha(s[q]))) {
                has_exponent = true;
                exponent = std::atoi(std::string(s.substr(digits_start, q - digits_start)).c_str());
                if (exp_neg) {
                    exponent = -exponent;
                }
                p = q;
            }
        }

        std::optional<AnswerValue> value;
        if (!has_exponent && frac_digits.empty() && p + 1 < s.size() && s[p] == '/' && is_digit(s[p + 1])) {
            std::size_t q = p + 1;
            while (q < s.size() && is_digit(s[q])) {
                ++q;
            }
            auto numer = parse_digits(int_digits);
            auto denom = parse_digits(s.substr(p + 1, q - p - 1));
            if (numer && denom && *denom != 0) {
                value = AnswerValue::exact(*Rational::make(negative ? -*numer : *numer, *denom));
                p = q;
            }
        }
        if (!value) {
            const std::string all = int_digits + frac_digits;
            auto mantissa = parse_digits(all.empty() ? std::string("0") : all);
            if (!has_exponent && mantissa) {
                value = AnswerValue::exact(*Rational::make(negative ? -*mantissa : *mantissa, pow10(frac_digits.size())));
            } else {
                std::string literal = (negative ? "-" : "") + (int_digits.empty() ? std::string("0") : int_digits) + "." +
                                      (frac_digits.empty() ? std::string("0") : frac_digits);
                double v = std::strtod(literal.c_str(), nullptr) * std::pow(10.0, exponent);
                value = AnswerValue::approximate(v);
            }
        }
        out.push_back(NumberToken{start, p - start, *value});
        i = p;
    }
    return out;
}

std::optional<AnswerValue> AnswerValue::parse(std::string_view answer) {
    std::string cleaned = clean_latex(answer);
    const auto body = trim(cleaned);
    if (body.empty()) {
        return std::nullopt;
    }
    const auto numbers = scan_numbers(body);
    if (!numbers.empty()) {
        std::size_t lead = 0;
        while (lead < body.size() && (body[lead] == '(' || body[lead] == '*' || body[lead] == ':' || body[lead] == ' ')) {
            ++lead;
        }
        if (numbers.front().offset <= lead) {
            return numbers.front().value;
        }
        if (numbers.size() == 1) {
            const auto& tok = numbers.front();
            const char before = tok.offset > 0 ? body[tok.offset - 1] : ' ';
            const std::size_t after_pos = tok.offset + tok.length;
            const char after = after_pos < body.size() ? body[after_pos] : ' ';
            if (!is_math_symbol(before) && !is_math_symbol(after) && !is_alpha(before) && !is_alpha(after)) {
                return tok.value;
            }
        }
    }
    std::string key = text_key(body);
    if (key.empty()) {
        return std::nullopt;
    }
    return AnswerValue::text(std::string(body));
}

namespace {

std::size_t rfind_ci(std::string_view text, std::string_view needle) {
    const std::string lower = to_lower_ascii(text);
    return lower.rfind(needle);
}

std::optional<AnswerValue> boxed_answer(std::string_view text) {
    std::size_t best = std::string_view::npos;
    std::string_view best_content;
    for (std::string_view cmd : {"\\boxed", "\\fbox"}) {
        std::size_t pos = text.rfind(cmd);
        while (pos != std::string_view::npos) {
            std::size_t brace = pos + cmd.size();
            while (brace < text.size() && text[brace] == ' ') {
                ++brace;
            }
            if (auto content = brace_group(text, brace)) {
                if (best == std::string_view::npos || pos > best) {
                    best = pos;
                    best_content = *content;
                }
                break;
            }
            pos = pos == 0 ? std::string_view::npos : text.rfind(cmd, pos - 1);
        }
    }
    if (best != std::string_view::npos) {
        const std::string cleaned = clean_latex(best_content);
        const auto body = trim(cleaned);
        const auto numbers = scan_numbers(body);
        if (numbers.size() == 1 && numbers.front().offset == 0) {
            // A number optionally followed by unit words.
            const auto rest = trim(body.substr(numbers.front().length));
            bool words_only = true;
            for (char c : rest) {
                if (!is_alpha(c) && c != ' ') {
                    words_only = false;
                }
            }
            if (words_only) {
                return numbers.front().value;
            }
        }
        if (!body.empty()) {
            return AnswerValue::text(std::string(body));
        }
    }
    // Plain-text rendering of boxed notation: "boxed 42".
    const std::size_t plain = rfind_ci(text, "boxed ");
    if (plain != std::string::npos) {
        const auto rest = text.substr(plain + 6);
        const auto numbers = scan_numbers(rest);
        if (!numbers.empty() && trim(rest.substr(0, numbers.front().offset)).empty()) {
            return numbers.front().value;
        }
    }
    return std::nullopt;
}

std::optional<AnswerValue> stated_answer(std::string_view text) {
    const std::size_t pos = rfind_ci(text, "answer is");
    if (pos == std::string::npos) {
        return std::nullopt;
    }
    std::size_t p = pos + 9;
    while (p < text.size() && (text[p] == ' ' || text[p] == ':' || text[p] == '*' || text[p] == '\t')) {
        ++p;
    }
    std::size_t end = p;
    while (end < text.size() && text[end] != '\n') {
        if (text[end] == '.' && (end + 1 >= text.size() || !is_digit(text[end + 1]))) {
            break;
        }
        ++end;
    }
    return AnswerValue::parse(text.substr(p, end - p));
}

}  // namespace

std::optional<AnswerValue> try_extract_final_answer(std::string_view text) {
    if (auto boxed = boxed_answer(text)) {
        return boxed;
    }
    if (auto stated = stated_answer(text)) {
        return stated;
    }
    const auto numbers = scan_numbers(text);
    if (!numbers.empty()) {
        return numbers.back().value;
    }
    return std::nullopt;
}

AnswerValue extract_final_answer(std::string_view text) {
    require(!text.empty(), "extract_final_answer: text must be non-empty");
    if (auto value = try_extract_final_answer(text)) {
        return *value;
    }
    throw Error(Errc::NoAnswerFound, "no boxed expression, answer statement, or number in text");
}

std::optional<std::size_t> find_answer_sentence(std::string_view text) {
    std::size_t pos = rfind_ci(text, "answer is");
    const std::size_t boxed = text.rfind("\\boxed");
    if (pos == std::string::npos || (boxed != std::string::npos && boxed > pos)) {
        pos = boxed;
    }
    if (pos == std::string::npos) {
        return std::nullopt;
    }
    // Walk back to the start of the enclosing sentence.
    std::size_t start = pos;
    while (start > 0) {
        const char c = text[start - 1];
        if (c == '\n') {
            break;
        }
        if ((c == ' ' || c == '\t') && start >= 2) {
            const char prev = text[start - 2];
            if (prev == '.' || prev == '!' || prev == '?') {
                break;
            }
        }
        --start;
    }
    return start;
}

}  // namespace drp
