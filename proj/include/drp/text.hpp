// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace drp {

// UTF-8 helpers. Invalid sequences decode to U+FFFD, one byte at a time.
std::u32string utf8_decode(std::string_view text);
std::string utf8_encode(std::u32string_view text);
void utf8_append(std::string& out, char32_t cp);

bool is_unicode_letter(char32_t cp) noexcept;
bool is_unicode_number(char32_t cp) noexcept;
bool is_unicode_space(char32_t cp) noexcept;

/// Collapses whitespace runs to one space, trims, and folds unicode
/// dashes/quotes/spaces to their ASCII forms. Idempotent.
std::string normalize_text(std::string_view text);

/// normalize_text with every space removed; the key used for coverage checks.
std::string coverage_key(std::string_view text);

std::string_view trim(std::string_view text) noexcept;
std::string to_lower_ascii(std::string_view text);
bool iequals(std::string_view a, std::string_view b) noexcept;
bool istarts_with(std::string_view text, std::string_view prefix) noexcept;
std::size_t word_count(std::string_view text);

/// Splits prose on sentence terminators (. ! ?) followed by whitespace.
/// Blank lines also end a sentence; decimal points and common abbreviations
/// do not.
std::vector<std::string> split_sentences(std::string_view text);

/// Splits on blank-line or newline boundaries; empty paragraphs are skipped.
std::vector<std::string> split_lines(std::string_view text);

/// Removes markdown bold markers (`**`, `__`) and backticks.
std::string strip_markup(std::string_view text);

}  // namespace drp
