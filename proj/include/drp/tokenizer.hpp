// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace drp {

/// Anything that can count tokens. Implementations must be safe to call
/// concurrently from several threads.
class TokenCounter {
public:
    virtual ~TokenCounter() = default;
    virtual std::size_t count(std::string_view text) const = 0;
};

/// Byte-level BPE tokenizer loaded from a `tokenizer.json` definition
/// (model/vocab/merges plus normalizer and pre-tokenizer sections).
///
/// Supported pre-tokenizers: ByteLevel with its built-in GPT-2 pattern, and
/// Split on the Qwen2 / Llama-3 patterns followed by ByteLevel. Added tokens
/// are matched before pre-tokenization and count as one token each.
/// Anything else raises Error(TokenizerLoadError).
class BpeTokenizer final : public TokenCounter {
public:
    enum class SplitPattern { Gpt2, Qwen2, Llama3 };

    static BpeTokenizer from_file(const std::string& path);
    static BpeTokenizer from_json(std::string_view json_text);

    std::size_t count(std::string_view text) const override;
    std::vector<std::uint32_t> encode(std::string_view text) const;
    /// Token strings in the byte-level alphabet (e.g. "Ġclips").
    std::vector<std::string> tokenize(std::string_view text) const;

    std::size_t vocab_size() const noexcept { return id_to_token_.size(); }
    SplitPattern split_pattern() const noexcept { return pattern_; }

private:
    struct MergeRule {
        std::uint32_t rank = 0;
        std::uint32_t merged = 0;
    };

    BpeTokenizer() = default;

    void encode_piece(std::string_view piece, std::vector<std::uint32_t>& out) const;
    void encode_plain(std::string_view text, std::vector<std::uint32_t>& out) const;

    std::unordered_map<std::string, std::uint32_t> vocab_;
    std::vector<std::string> id_to_token_;
    std::unordered_map<std::uint64_t, MergeRule> merges_;
    std::vector<std::pair<std::string, std::uint32_t>> added_;  // longest first
    std::uint32_t byte_ids_[256] = {};
    bool byte_known_[256] = {};
    SplitPattern pattern_ = SplitPattern::Gpt2;
    bool add_prefix_space_ = false;
    bool ignore_merges_ = false;
};

/// Subword token count of `text`; the empty string has zero tokens.
std::size_t count_tokens(std::string_view text, const TokenCounter& tokenizer);

/// Splits `text` into pre-tokenizer pieces (code point spans re-encoded as
/// UTF-8). Exposed for tests.
std::vector<std::string> pre_tokenize(std::string_view text, BpeTokenizer::SplitPattern pattern);

}  // namespace drp
