// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace drp {

/// Think-block sentinels. Defaults follow the DeepSeek-R1 family.
struct ThinkTags {
    std::string open = "<think>";
    std::string close = "</think>";
};

struct Problem {
    std::string id;
    std::string question;
    std::optional<std::string> gold;  // raw gold answer; see AnswerValue::parse
};

/// A model completion split into thinking trace and answer summary.
struct Response {
    std::string thinking;
    std::string answer;
    std::string raw;
};

struct SkillStep {
    std::size_t index = 0;  // 1-based, consecutive
    std::string text;
    std::string skill;  // may be empty in default mode

    friend bool operator==(const SkillStep&, const SkillStep&) = default;
};

enum class SegmentationMode { Skill, Default };

std::string_view to_string(SegmentationMode mode) noexcept;
SegmentationMode parse_segmentation_mode(std::string_view text);

struct Decomposition {
    SegmentationMode mode = SegmentationMode::Skill;
    std::vector<SkillStep> steps;
    std::string source_hash;  // sha256 of normalize_text(thinking)

    /// Checks steps >= 1, indices 1..m, non-empty texts and (skill mode)
    /// non-empty skills. Throws PreconditionViolation otherwise.
    static Decomposition make(SegmentationMode mode, std::vector<SkillStep> steps, std::string_view thinking);
};

/// Hash identifying a trace independent of whitespace layout.
std::string trace_hash(std::string_view thinking);

namespace action {
struct Keep {
    friend bool operator==(const Keep&, const Keep&) = default;
};
struct Delete {
    friend bool operator==(const Delete&, const Delete&) = default;
};
struct Rewrite {
    std::string new_text;
    friend bool operator==(const Rewrite&, const Rewrite&) = default;
};
struct Merge {
    std::vector<std::size_t> absorbed;  // indices folded into the acting step
    std::string merged_text;
    friend bool operator==(const Merge&, const Merge&) = default;
};
}  // namespace action

using PruneAction = std::variant<action::Keep, action::Delete, action::Rewrite, action::Merge>;

/// Label used in teacher output and revision artifacts ("KEEP", "DELETE", ...).
std::string_view action_label(const PruneAction& action) noexcept;

struct StepAction {
    std::size_t index = 0;
    PruneAction action;
};

struct Revision {
    std::vector<StepAction> actions;  // ordered by step index
    std::vector<std::string> revised_steps;
    std::string revised_trace;
    std::string revised_answer;
    bool answer_backfilled = false;

    std::size_t revised_step_count() const noexcept { return revised_steps.size(); }
};

/// Applies per-step actions to the original step texts, in order.
std::vector<std::string> apply_actions(const std::vector<SkillStep>& steps, const std::vector<StepAction>& actions);

struct TrainingExample {
    std::string problem_id;
    std::string instruction;
    std::string output;
};

/// Splits a completion into thinking and answer. The thinking is the content
/// between the first open tag and its matching close tag, trimmed; the answer
/// is the trimmed remainder. A completion that starts inside the think block
/// (close tag without open tag, as produced when the chat template already
/// emitted the open tag) is accepted.
/// Throws MissingThinkBlock, EmptyTrace or UnclosedThinkBlock.
Response parse_response(std::string_view raw, const ThinkTags& tags = {});

/// Inverse of parse_response for a (thinking, answer) pair.
std::string render_response(std::string_view thinking, std::string_view answer, const ThinkTags& tags = {});

}  // namespace drp
