// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#include "drp/tokenizer.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <sstream>

#include <nlohmann/json.hpp>

#include "drp/error.hpp"
#include "drp/text.hpp"

namespace drp {

namespace {

using json = nlohmann::json;

constexpr std::string_view kGpt2Pattern =
    R"('s|'t|'re|'ve|'m|'ll|'d| ?\p{L}+| ?\p{N}+| ?[^\s\p{L}\p{N}]+|\s+(?!\S)|\s+)";
constexpr std::string_view kQwen2Pattern =
    R"((?i:'s|'t|'re|'ve|'m|'ll|'d)|[^\r\n\p{L}\p{N}]?\p{L}+|\p{N}| ?[^\s\p{L}\p{N}]+[\r\n]*|\s*[\r\n]+|\s+(?!\S)|\s+)";
constexpr std::string_view kLlama3Pattern =
    R"((?i:'s|'t|'re|'ve|'m|'ll|'d)|[^\r\n\p{L}\p{N}]?\p{L}+|\p{N}{1,3}| ?[^\s\p{L}\p{N}]+[\r\n]*|\s*[\r\n]+|\s+(?!\S)|\s+)";

[[noreturn]] void load_error(const std::string& what) {
    throw Error(Errc::TokenizerLoadError, what);
}

// GPT-2 byte <-> printable code point table.
std::array<char32_t, 256> byte_to_unicode() {
    std::array<char32_t, 256> table{};
    std::array<bool, 256> direct{};
    for (int b = 0; b < 256; ++b) {
        direct[b] = (b >= 33 && b <= 126) || (b >= 161 && b <= 172) || (b >= 174 && b <= 255);
    }
    char32_t next = 256;
    for (int b = 0; b < 256; ++b) {
        table[b] = direct[b] ? static_cast<char32_t>(b) : next++;
    }
    return table;
}

std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) noexcept {
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

bool is_cr_lf(char32_t c) noexcept { return c == U'\r' || c == U'\n'; }

// [^\s\p{L}\p{N}]
bool is_other(char32_t c) noexcept {
    return !is_unicode_space(c) && !is_unicode_letter(c) && !is_unicode_number(c);
}

char32_t lower(char32_t c) noexcept { return (c >= U'A' && c <= U'Z') ? c + 32 : c; }

std::size_t match_contraction(const std::u32string& s, std::size_t i, bool case_insensitive) {
    if (s[i] != U'\'' || i + 1 >= s.size()) {
        return 0;
    }
    const auto fold = [&](char32_t c) { return case_insensitive ? lower(c) : c; };
    const char32_t a = fold(s[i + 1]);
    if (a == U's' || a == U't') {
        return 2;
    }
    if (i + 2 < s.size()) {
        const char32_t b = fold(s[i + 2]);
        if ((a == U'r' && b == U'e') || (a == U'v' && b == U'e') || (a == U'l' && b == U'l')) {
            return 3;
        }
    }
    if (a == U'm' || a == U'd') {
        return 2;
    }
    return 0;
}

template <class Pred>
std::size_t run_end(const std::u32string& s, std::size_t j, Pred pred) {
    while (j < s.size() && pred(s[j])) {
        ++j;
    }
    return j;
}

// Whitespace alternatives shared by both pattern families:
// [\s*[\r\n]+ |] \s+(?!\S) | \s+
std::size_t match_whitespace(const std::u32string& s, std::size_t i, bool newline_alt) {
    const std::size_t e = run_end(s, i, is_unicode_space);
    if (newline_alt) {
        for (std::size_t q = e; q > i; --q) {
            if (is_cr_lf(s[q - 1])) {
                return q - i;
            }
        }
    }
    if (e == s.size() || e - i >= 2) {
        return e == s.size() ? e - i : e - i - 1;
    }
    return e - i;
}

std::size_t match_gpt2(const std::u32string& s, std::size_t i) {
    if (std::size_t n = match_contraction(s, i, false)) {
        return n;
    }
    const bool lead_space = s[i] == U' ' && i + 1 < s.size();
    const std::size_t j = lead_space ? i + 1 : i;
    for (auto pred : {is_unicode_letter, is_unicode_number, is_other}) {
        if (pred(s[i])) {
            return run_end(s, i, pred) - i;
        }
        if (lead_space && pred(s[j])) {
            return run_end(s, j, pred) - i;
        }
    }
    return match_whitespace(s, i, false);
}

std::size_t match_qwen(const std::u32string& s, std::size_t i, std::size_t max_digits) {
    if (std::size_t n = match_contraction(s, i, true)) {
        return n;
    }
    const char32_t c = s[i];
    if (!is_cr_lf(c) && !is_unicode_letter(c) && !is_unicode_number(c) && i + 1 < s.size() && is_unicode_letter(s[i + 1])) {
        return run_end(s, i + 1, is_unicode_letter) - i;
    }
    if (is_unicode_letter(c)) {
        return run_end(s, i, is_unicode_letter) - i;
    }
    if (is_unicode_number(c)) {
        return std::min(run_end(s, i, is_unicode_number) - i, max_digits);
    }
    std::size_t j = i;
    if (c == U' ' && i + 1 < s.size() && is_other(s[i + 1])) {
        j = i + 1;
    }
    if (is_other(s[j])) {
        const std::size_t e = run_end(s, j, is_other);
        return run_end(s, e, is_cr_lf) - i;
    }
    return match_whitespace(s, i, true);
}

}  // namespace

std::vector<std::string> pre_tokenize(std::string_view text, BpeTokenizer::SplitPattern pattern) {
    const std::u32string s = utf8_decode(text);
    std::vector<std::string> pieces;
    std::size_t i = 0;
    while (i < s.size()) {
        std::size_t n = 0;
        switch (pattern) {
        case BpeTokenizer::SplitPattern::Gpt2: n = match_gpt2(s, i); break;
        case BpeTokenizer::SplitPattern::Qwen2: n = match_qwen(s, i, 1); break;
        case BpeTokenizer::SplitPattern::Llama3: n = match_qwen(s, i, 3); break;
        }
        n = std::max<std::size_t>(n, 1);
        pieces.push_back(utf8_encode(std::u32string_view(s).substr(i, n)));
        i += n;
    }
    return pieces;
}

BpeTokenizer BpeTokenizer::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        load_error("cannot open tokenizer file " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

BpeTokenizer BpeTokenizer::from_json(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        load_error(std::string("invalid tokenizer JSON: ") + e.what());
    }
    if (!doc.contains("model") || !doc["model"].is_object()) {
        load_error("tokenizer definition has no model section");
    }
    const json& model = doc["model"];
    if (model.value("type", std::string("BPE")) != "BPE") {
        load_error("unsupported model type " + model.value("type", std::string("?")));
    }
    if (!model.contains("vocab") || !model["vocab"].is_object() || !model.contains("merges")) {
        load_error("BPE model needs vocab and merges");
    }

    BpeTokenizer tok;
    tok.ignore_merges_ = model.value("ignore_merges", false);
    std::uint32_t max_id = 0;
    for (const auto& [token, id] : model["vocab"].items()) {
        const auto v = id.get<std::uint32_t>();
        tok.vocab_.emplace(token, v);
        max_id = std::max(max_id, v);
    }
    if (doc.contains("added_tokens") && doc["added_tokens"].is_array()) {
        for (const auto& added : doc["added_tokens"]) {
            const auto content = added.at("content").get<std::string>();
            const auto id = added.at("id").get<std::uint32_t>();
            tok.added_.emplace_back(content, id);
            tok.vocab_.emplace(content, id);
            max_id = std::max(max_id, id);
        }
        std::stable_sort(tok.added_.begin(), tok.added_.end(),
                         [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
    }
    tok.id_to_token_.resize(static_cast<std::size_t>(max_id) + 1);
    for (const auto& [token, id] : tok.vocab_) {
        tok.id_to_token_[id] = token;
    }

    const auto table = byte_to_unicode();
    for (int b = 0; b < 256; ++b) {
        std::string sym;
        utf8_append(sym, table[b]);
        if (auto it = tok.vocab_.find(sym); it != tok.vocab_.end()) {
            tok.byte_ids_[b] = it->second;
            tok.byte_known_[b] = true;
        }
    }

    std::uint32_t rank = 0;
    for (const auto& merge : model["merges"]) {
        std::string left;
        std::string right;
        if (merge.is_array() && merge.size() == 2) {
            left = merge[0].get<std::string>();
            right = merge[1].get<std::string>();
        } else if (merge.is_string()) {
            const auto text = merge.get<std::string>();
            const auto space = text.find(' ', 1);
            if (space == std::string::npos) {
                load_error("malformed merge entry '" + text + "'");
            }
            left = text.substr(0, space);
            right = text.substr(space + 1);
        } else {
            load_error("malformed merge entry");
        }
        const auto l = tok.vocab_.find(left);
        const auto r = tok.vocab_.find(right);
        const auto m = tok.vocab_.find(left + right);
        if (l == tok.vocab_.end() || r == tok.vocab_.end() || m == tok.vocab_.end()) {
            load_error("merge references unknown token: " + left + " " + right);
        }
        tok.merges_.emplace(pair_key(l->second, r->second), MergeRule{rank++, m->second});
    }

    // Normalizer: none or NFC. NFC is applied as identity; inputs are
    // expected to be NFC already (true for model-generated text).
    if (doc.contains("normalizer") && !doc["normalizer"].is_null()) {
        const json& norm = doc["normalizer"];
        std::vector<json> parts;
        if (norm.value("type", "") == "Sequence") {
            parts = norm.at("normalizers").get<std::vector<json>>();
        } else {
            parts.push_back(norm);
        }
        for (const auto& part : parts) {
            if (part.value("type", "") != "NFC") {
                load_error("unsupported normalizer " + part.value("type", std::string("?")));
            }
        }
    }

    if (!doc.contains("pre_tokenizer") || doc["pre_tokenizer"].is_null()) {
        load_error("tokenizer has no pre_tokenizer; only byte-level BPE is supported");
    }
    const json& pre = doc["pre_tokenizer"];
    std::vector<json> stages;
    if (pre.value("type", "") == "Sequence") {
        stages = pre.at("pretokenizers").get<std::vector<json>>();
    } else {
        stages.push_back(pre);
    }
    bool byte_level = false;
    bool have_split = false;
    for (const auto& stage : stages) {
        const auto type = stage.value("type", std::string());
        if (type == "ByteLevel") {
            byte_level = true;
            tok.add_prefix_space_ = stage.value("add_prefix_space", false);
            if (stage.value("use_regex", true)) {
                if (have_split) {
                    load_error("ByteLevel regex after Split is not supported");
                }
                tok.pattern_ = SplitPattern::Gpt2;
                have_split = true;
            }
        } else if (type == "Split") {
            const auto regex = stage.at("pattern").value("Regex", std::string());
            if (stage.value("invert", false) || stage.value("behavior", std::string()) != "Isolated") {
                load_error("only isolated, non-inverted Split is supported");
            }
            if (regex == kQwen2Pattern) {
                tok.pattern_ = SplitPattern::Qwen2;
            } else if (regex == kLlama3Pattern) {
                tok.pattern_ = SplitPattern::Llama3;
            } else if (regex == kGpt2Pattern) {
                tok.pattern_ = SplitPattern::Gpt2;
            } else {
                load_error("unsupported Split pattern " + regex);
            }
            have_split = true;
        } else {
            load_error("unsupported pre-tokenizer " + type);
        }
    }
    if (!byte_level || !have_split) {
        load_error("pre-tokenizer must be byte-level with a known split pattern");
    }
    for (int b = 0; b < 256; ++b) {
        if (!tok.byte_known_[b]) {
            load_error("byte-level vocabulary is missing byte " + std::to_string(b));
        }
    }
    return tok;
}

void BpeTokenizer::encode_piece(std::string_view piece, std::vector<std::uint32_t>& out) const {
    if (piece.empty()) {
        return;
    }
    if (ignore_merges_) {
        static const auto table = byte_to_unicode();
        std::string mapped;
        for (unsigned char b : piece) {
            utf8_append(mapped, table[b]);
        }
        if (auto it = vocab_.find(mapped); it != vocab_.end()) {
            out.push_back(it->second);
            return;
        }
    }

    struct Symbol {
        std::uint32_t id;
        int prev;
        int next;
        bool alive;
    };
    std::vector<Symbol> syms;
    syms.reserve(piece.size());
    for (std::size_t k = 0; k < piece.size(); ++k) {
        syms.push_back(Symbol{byte_ids_[static_cast<unsigned char>(piece[k])], static_cast<int>(k) - 1,
                              k + 1 < piece.size() ? static_cast<int>(k) + 1 : -1, true});
    }

    struct Candidate {
        std::uint32_t rank;
        int pos;
        std::uint32_t merged;
        bool operator>(const Candidate& o) const noexcept {
            return rank != o.rank ? rank > o.rank : pos > o.pos;
        }
    };
    std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> queue;
    const auto push_pair = [&](int left) {
        const int right = syms[left].next;
        if (right < 0) {
            return;
        }
        if (auto it = merges_.find(pair_key(syms[left].id, syms[right].id)); it != merges_.end()) {
            queue.push(Candidate{it->second.rank, left, it->second.merged});
        }
    };
    for (int k = 0; k + 1 < static_cast<int>(syms.size()); ++k) {
        push_pair(k);
    }
    while (!queue.empty()) {
        const Candidate top = queue.top();
        queue.pop();
        Symbol& left = syms[top.pos];
        if (!left.alive || left.next < 0) {
            continue;
        }
        Symbol& right = syms[left.next];
        const auto it = merges_.find(pair_key(left.id, right.id));
        if (it == merges_.end() || it->second.merged != top.merged) {
            continue;
        }
        left.id = top.merged;
        right.alive = false;
        left.next = right.next;
        if (right.next >= 0) {
            syms[right.next].prev = top.pos;
        }
        if (left.prev >= 0) {
            push_pair(left.prev);
        }
        push_pair(top.pos);
    }
    for (int k = 0; k >= 0; k = syms[k].next) {
        out.push_back(syms[k].id);
    }
}

void BpeTokenizer::encode_plain(std::string_view text, std::vector<std::uint32_t>& out) const {
    if (text.empty()) {
        return;
    }
    std::string prefixed;
    if (add_prefix_space_ && text.front() != ' ') {
        prefixed = " " + std::string(text);
        text = prefixed;
    }
    for (const auto& piece : pre_tokenize(text, pattern_)) {
        encode_piece(piece, out);
    }
}

std::vector<std::uint32_t> BpeTokenizer::encode(std::string_view text) const {
    std::vector<std::uint32_t> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t best = std::string_view::npos;
        const std::pair<std::string, std::uint32_t>* hit = nullptr;
        for (const auto& added : added_) {
            const std::size_t at = text.find(added.first, pos);
            if (at != std::string_view::npos && (best == std::string_view::npos || at < best)) {
                best = at;
                hit = &added;
            }
        }
        if (hit == nullptr) {
            encode_plain(text.substr(pos), out);
            break;
        }
        encode_plain(text.substr(pos, best - pos), out);
        out.push_back(hit->second);
        pos = best + hit->first.size();
    }
    return out;
}

std::vector<std::string> BpeTokenizer::tokenize(std::string_view text) const {
    std::vector<std::string> out;
    for (auto id : encode(text)) {
        out.push_back(id_to_token_.at(id));
    }
    return out;
}

std::size_t BpeTokenizer::count(std::string_view text) const {
    return encode(text).size();
}

std::size_t count_tokens(std::string_view text, const TokenCounter& tokenizer) {
    return text.empty() ? 0 : tokenizer.count(text);
}

}  // namespace drp
