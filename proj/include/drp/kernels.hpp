// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

// Batch kernels behind the metrics module. `serial` is the reference; the
// `parallel` variants use OpenMP and must return identical results.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "drp/answer.hpp"
#include "drp/tokenizer.hpp"

namespace drp::kernels {

/// Histogram bin of `tokens` for `bins` equal bins over [0, max_len].
inline std::size_t bin_of(std::size_t tokens, std::size_t max_len, std::size_t bins) noexcept {
    const std::uint64_t t = tokens < max_len ? tokens : max_len;
    const std::uint64_t b = t * bins / max_len;
    return b >= bins ? bins - 1 : static_cast<std::size_t>(b);
}

namespace serial {

std::vector<std::size_t> count_tokens(std::span<const std::string> texts, const TokenCounter& tokenizer);
std::vector<std::uint8_t> score(std::span<const std::string> completions, std::span<const AnswerValue> golds);
std::vector<std::size_t> histogram(std::span<const std::size_t> tokens, std::size_t max_len, std::size_t bins);

}  // namespace serial

namespace parallel {

std::vector<std::size_t> count_tokens(std::span<const std::string> texts, const TokenCounter& tokenizer);
std::vector<std::uint8_t> score(std::span<const std::string> completions, std::span<const AnswerValue> golds);
std::vector<std::size_t> histogram(std::span<const std::size_t> tokens, std::size_t max_len, std::size_t bins);

}  // namespace parallel

/// Threads OpenMP will use (1 when built without OpenMP).
int max_threads() noexcept;

}  // namespace drp::kernels
