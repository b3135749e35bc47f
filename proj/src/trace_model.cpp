// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#include "drp/trace_model.hpp"

#include "drp/error.hpp"
#include "drp/hash.hpp"
#include "drp/text.hpp"

namespace drp {

std::string_view to_string(SegmentationMode mode) noexcept {
    return mode == SegmentationMode::Skill ? "skill" : "default";
}

SegmentationMode parse_segmentation_mode(std::string_view text) {
    if (iequals(text, "skill")) {
        return SegmentationMode::Skill;
    }
    if (iequals(text, "default")) {
        return SegmentationMode::Default;
    }
    throw Error(Errc::ConfigError, "mode must be skill or default, got '" + std::string(text) + "'");
}

std::string trace_hash(std::string_view thinking) {
    return sha256_hex(normalize_text(thinking));
}

Decomposition Decomposition::make(SegmentationMode mode, std::vector<SkillStep> steps, std::string_view thinking) {
    require(!steps.empty(), "decomposition needs at least one step");
    for (std::size_t i = 0; i < steps.size(); ++i) {
        require(steps[i].index == i + 1, "step indices must be 1..m");
        require(!trim(steps[i].text).empty(), "step text must be non-empty");
        require(mode == SegmentationMode::Default || !trim(steps[i].skill).empty(), "skill mode requires skill labels");
    }
    return Decomposition{mode, std::move(steps), trace_hash(thinking)};
}

std::string_view action_label(const PruneAction& action) noexcept {
    switch (action.index()) {
    case 0: return "KEEP";
    case 1: return "DELETE";
    case 2: return "SINGLE-STEP COMPRESS";
    default: return "MULTI-STEP COMPRESS";
    }
}

std::vector<std::string> apply_actions(const std::vector<SkillStep>& steps, const std::vector<StepAction>& actions) {
    std::vector<std::string> out;
    out.reserve(actions.size());
    for (const auto& sa : actions) {
        require(sa.index >= 1 && sa.index <= steps.size(), "action index out of range");
        std::visit(
            [&](const auto& a) {
                using T = std::decay_t<decltype(a)>;
                if constexpr (std::is_same_v<T, action::Keep>) {
                    out.push_back(steps[sa.index - 1].text);
                } else if constexpr (std::is_same_v<T, action::Rewrite>) {
                    out.push_back(a.new_text);
                } else if constexpr (std::is_same_v<T, action::Merge>) {
                    out.push_back(a.merged_text);
                }
            },
            sa.action);
    }
    return out;
}

Response parse_response(std::string_view raw, const ThinkTags& tags) {
    require(!raw.empty(), "parse_response: raw must be non-empty");
    const std::size_t open = raw.find(tags.open);
    std::size_t body_begin = 0;
    if (open == std::string_view::npos) {
        if (raw.find(tags.close) == std::string_view::npos) {
            throw Error(Errc::MissingThinkBlock, "no " + tags.open + " block in completion");
        }
    } else {
        body_begin = open + tags.open.size();
    }

    // Matching close: nested open tags increase the depth.
    std::size_t depth = 1;
    std::size_t pos = body_begin;
    std::size_t close = std::string_view::npos;
    while (pos < raw.size()) {
        const std::size_t next_open = raw.find(tags.open, pos);
        const std::size_t next_close = raw.find(tags.close, pos);
        if (next_close == std::string_view::npos) {
            break;
        }
        if (next_open != std::string_view::npos && next_open < next_close) {
            ++depth;
            pos = next_open + tags.open.size();
            continue;
        }
        if (--depth == 0) {
            close = next_close;
            break;
        }
        pos = next_close + tags.close.size();
    }
    if (close == std::string_view::npos) {
        throw Error(Errc::UnclosedThinkBlock, tags.open + " without matching " + tags.close);
    }

    const auto thinking = trim(raw.substr(body_begin, close - body_begin));
    if (thinking.empty()) {
        throw Error(Errc::EmptyTrace, "think block is empty");
    }
    const auto answer = trim(raw.substr(close + tags.close.size()));
    return Response{std::string(thinking), std::string(answer), std::string(raw)};
}

std::string render_response(std::string_view thinking, std::string_view answer, const ThinkTags& tags) {
    std::string out;
    out.reserve(thinking.size() + answer.size() + tags.open.size() + tags.close.size() + 4);
    out += tags.open;
    out += '\n';
    out += trim(thinking);
    out += '\n';
    out += tags.close;
    if (!trim(answer).empty()) {
        out += "\n\n";
        out += trim(answer);
    }
    return out;
}

}  // namespace drp
