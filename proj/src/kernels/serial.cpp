// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#include "drp/kernels.hpp"
#include "drp/metrics.hpp"

namespace drp::kernels::serial {

std::vector<std::size_t> count_tokens(std::span<const std::string> texts, const TokenCounter& tokenizer) {
    std::vector<std::size_t> out(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        out[i] = drp::count_tokens(texts[i], tokenizer);
    }
    return out;
}

std::vector<std::uint8_t> score(std::span<const std::string> completions, std::span<const AnswerValue> golds) {
    std::vector<std::uint8_t> out(completions.size());
    for (std::size_t i = 0; i < completions.size(); ++i) {
        out[i] = score_answer(completions[i], golds[i]) ? 1 : 0;
    }
    return out;
}

std::vector<std::size_t> histogram(std::span<const std::size_t> tokens, std::size_t max_len, std::size_t bins) {
    std::vector<std::size_t> counts(bins, 0);
    for (auto t : tokens) {
        ++counts[bin_of(t, max_len, bins)];
    }
    return counts;
}

}  // namespace drp::kernels::serial
