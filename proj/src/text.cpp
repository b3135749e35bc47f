// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#include "drp/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace drp {

namespace {

struct CodePointRange {
    char32_t lo;
    char32_t hi;
};

#include "unicode_tables.inc"

template <std::size_t N>
bool in_ranges(const CodePointRange (&table)[N], char32_t cp) noexcept {
    auto it = std::upper_bound(std::begin(table), std::end(table), cp,
                               [](char32_t v, const CodePointRange& r) { return v < r.lo; });
    if (it == std::begin(table)) {
        return false;
    }
    --it;
    return cp >= it->lo && cp <= it->hi;
}

char32_t fold_punctuation(char32_t cp) noexcept {
    switch (cp) {
    case 0x2010: case 0x2011: case 0x2012: case 0x2013: case 0x2014: case 0x2015:
    case 0x2212: case 0xFE58: case 0xFE63: case 0xFF0D:
        return U'-';
    case 0x2018: case 0x2019: case 0x201A: case 0x201B: case 0x2032:
        return U'\'';
    case 0x201C: case 0x201D: case 0x201E: case 0x201F: case 0x2033:
        return U'"';
    default:
        return cp;
    }
}

}  // namespace

void utf8_append(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::u32string utf8_decode(std::string_view text) {
    std::u32string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const auto b0 = static_cast<unsigned char>(text[i]);
        std::size_t len = 0;
        char32_t cp = 0;
        if (b0 < 0x80) {
            len = 1;
            cp = b0;
        } else if ((b0 & 0xE0) == 0xC0) {
            len = 2;
            cp = b0 & 0x1F;
        } else if ((b0 & 0xF0) == 0xE0) {
            len = 3;
            cp = b0 & 0x0F;
        } else if ((b0 & 0xF8) == 0xF0) {
            len = 4;
            cp = b0 & 0x07;
        }
        bool ok = len != 0 && i + len <= text.size();
        for (std::size_t k = 1; ok && k < len; ++k) {
            const auto b = static_cast<unsigned char>(text[i + k]);
            if ((b & 0xC0) != 0x80) {
                ok = false;
            } else {
                cp = (cp << 6) | (b & 0x3F);
            }
        }
        if (!ok) {
            out.push_back(0xFFFD);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::string utf8_encode(std::u32string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char32_t cp : text) {
        utf8_append(out, cp);
    }
    return out;
}

bool is_unicode_letter(char32_t cp) noexcept {
    if (cp < 0x80) {
        return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
    }
    return in_ranges(kLetterRanges, cp);
}

bool is_unicode_number(char32_t cp) noexcept {
    if (cp < 0x80) {
        return cp >= '0' && cp <= '9';
    }
    return in_ranges(kNumberRanges, cp);
}

// White_Space property.
bool is_unicode_space(char32_t cp) noexcept {
    switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
        return true;
    default:
        return cp >= 0x2000 && cp <= 0x200A;
    }
}

std::string normalize_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char32_t cp : utf8_decode(text)) {
        if (is_unicode_space(cp)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        utf8_append(out, fold_punctuation(cp));
    }
    return out;
}

std::string coverage_key(std::string_view text) {
    std::string out = normalize_text(text);
    std::erase(out, ' ');
    return out;
}

std::string_view trim(std::string_view text) noexcept {
    const auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
    while (!text.empty() && is_ws(text.front())) {
        text.remove_prefix(1);
    }
    while (!text.empty() && is_ws(text.back())) {
        text.remove_suffix(1);
    }
    return text;
}

std::string to_lower_ascii(std::string_view text) {
    std::string out(text);
    for (char& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

bool iequals(std::string_view a, std::string_view b) noexcept {
    return a.size() == b.size() && istarts_with(a, b);
}

bool istarts_with(std::string_view text, std::string_view prefix) noexcept {
    if (text.size() < prefix.size()) {
        return false;
    }
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(text[i])) != std::tolower(static_cast<unsigned char>(prefix[i]))) {
            return false;
        }
    }
    return true;
}

std::size_t word_count(std::string_view text) {
    std::size_t count = 0;
    bool in_word = false;
    for (char c : text) {
        const bool ws = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!ws && !in_word) {
            ++count;
        }
        in_word = !ws;
    }
    return count;
}

namespace {

bool ends_with_abbreviation(std::string_view sentence) {
    static constexpr std::array<std::string_view, 8> kAbbrev = {"e.g.", "i.e.", "mr.", "mrs.", "dr.", "vs.", "etc.", "approx."};
    const std::string lower = to_lower_ascii(sentence);
    for (auto abbrev : kAbbrev) {
        if (lower.size() >= abbrev.size() && lower.compare(lower.size() - abbrev.size(), abbrev.size(), abbrev) == 0) {
            const std::size_t before = lower.size() - abbrev.size();
            if (before == 0 || !std::isalpha(static_cast<unsigned char>(lower[before - 1]))) {
                return true;
            }
        }
    }
    return false;
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    const auto flush = [&](std::size_t end) {
        const auto piece = trim(text.substr(start, end - start));
        if (!piece.empty()) {
            out.emplace_back(piece);
        }
        start = end;
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '\n' && i + 1 < text.size() && text[i + 1] == '\n') {
            flush(i);
            continue;
        }
        if (c != '.' && c != '!' && c != '?') {
            continue;
        }
        std::size_t end = i + 1;
        while (end < text.size() && (text[end] == '"' || text[end] == '\'' || text[end] == ')')) {
            ++end;
        }
        if (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) {
            continue;
        }
        if (c == '.' && ends_with_abbreviation(text.substr(start, i + 1 - start))) {
            continue;
        }
        flush(end);
        i = end - 1;
    }
    flush(text.size());
    return out;
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        const auto line = trim(text.substr(start, end - start));
        if (!line.empty()) {
            out.emplace_back(line);
        }
        start = end + 1;
    }
    return out;
}

std::string strip_markup(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if ((text[i] == '*' || text[i] == '_') && i + 1 < text.size() && text[i + 1] == text[i]) {
            ++i;
            continue;
        }
        if (text[i] == '`') {
            continue;
        }
        out.push_back(text[i]);
    }
    return out;
}

}  // namespace drp
