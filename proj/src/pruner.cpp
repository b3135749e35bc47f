// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#include "drp/pruner.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <set>

#include "drp/error.hpp"
#include "drp/prompts.hpp"
#include "drp/teacher_client.hpp"
#include "drp/text.hpp"

namespace drp {

namespace {

enum class ActionKind { Keep, Delete, Rewrite, Merge };

struct PendingAction {
    std::size_t index = 0;
    ActionKind kind = ActionKind::Keep;
    std::vector<std::size_t> listed;  // explicit merge targets
    std::string text;
    bool collecting = true;
};

bool is_upper(char c) {
    return c >= 'A' && c <= 'Z';
}

bool is_digit(char c) {
    return c >= '0' && c <= '9';
}

std::string canonical_label(std::string_view label) {
    std::string out;
    for (char c : label) {
        const bool sep = c == '-' || c == ' ' || c == '_';
        if (sep) {
            if (!out.empty() && out.back() != ' ') {
                out += ' ';
            }
        } else {
            out += c;
        }
    }
    while (!out.empty() && out.back() == ' ') {
        out.pop_back();
    }
    return out;
}

ActionKind kind_for(const std::string& label, bool has_targets) {
    static const std::map<std::string, ActionKind, std::less<>> kLabels = {
        {"KEEP", ActionKind::Keep},
        {"RETAIN", ActionKind::Keep},
        {"DELETE", ActionKind::Delete},
        {"REMOVE", ActionKind::Delete},
        {"SINGLE STEP COMPRESS", ActionKind::Rewrite},
        {"REWRITE", ActionKind::Rewrite},
        {"COMPRESS", ActionKind::Rewrite},
        {"MULTI STEP COMPRESS", ActionKind::Merge},
        {"MERGE", ActionKind::Merge},
    };
    const auto it = kLabels.find(label);
    if (it == kLabels.end()) {
        throw Error(Errc::UnknownAction, "unknown action label \"" + label + "\"");
    }
    if (it->second == ActionKind::Rewrite && has_targets) {
        return ActionKind::Merge;
    }
    return it->second;
}

std::vector<std::size_t> parse_index_list(std::string_view list) {
    std::vector<std::size_t> out;
    std::size_t i = 0;
    std::optional<std::size_t> range_start;
    while (i < list.size()) {
        if (is_digit(list[i])) {
            std::size_t v = 0;
            const std::size_t from = i;
            while (i < list.size() && is_digit(list[i]) && i - from < 6) {
                v = v * 10 + static_cast<std::size_t>(list[i++] - '0');
            }
            if (range_start) {
                for (std::size_t k = *range_start + 1; k <= v && k - *range_start <= 1000; ++k) {
                    out.push_back(k);
                }
                range_start.reset();
            } else {
                out.push_back(v);
            }
        } else if (list[i] == '-' && !out.empty()) {
            range_start = out.back();
            ++i;
        } else {
            ++i;
        }
    }
    return out;
}

// "[Step] n[.:)] LABEL [targets][:] text"
std::optional<PendingAction> match_action_line(std::string_view line) {
    std::size_t p = 0;
    if (istarts_with(line, "step")) {
        p = 4;
        while (p < line.size() && line[p] == ' ') {
            ++p;
        }
    }
    const std::size_t digits = p;
    while (p < line.size() && is_digit(line[p])) {
        ++p;
    }
    if (p == digits || p - digits > 6) {
        return std::nullopt;
    }
    PendingAction action;
    action.index = std::stoul(std::string(line.substr(digits, p - digits)));
    if (p >= line.size() || (line[p] != '.' && line[p] != ':' && line[p] != ')')) {
        return std::nullopt;
    }
    ++p;
    while (p < line.size() && line[p] == ' ') {
        ++p;
    }
    const std::size_t label_start = p;
    while (p < line.size() && (is_upper(line[p]) || line[p] == '-' || line[p] == ' ' || line[p] == '_')) {
        ++p;
    }
    std::size_t label_end = p;
    if (p < line.size() && line[p] != ':' && line[p] != '[' && line[p] != '(') {
        // Label directly followed by prose ("KEEP The step ..."): back off to
        // the last space inside the run.
        const auto space = line.substr(label_start, p - label_start).rfind(' ');
        if (space == std::string_view::npos) {
            return std::nullopt;
        }
        label_end = label_start + space;
        p = label_end;
    }
    const std::string label = canonical_label(line.substr(label_start, label_end - label_start));
    std::size_t letters = 0;
    for (char c : label) {
        letters += is_upper(c) ? 1 : 0;
    }
    if (letters < 2) {
        return std::nullopt;
    }
    while (p < line.size() && line[p] == ' ') {
        ++p;
    }
    bool has_targets = false;
    if (p < line.size() && (line[p] == '[' || line[p] == '(')) {
        const char close = line[p] == '[' ? ']' : ')';
        const auto end = line.find(close, p);
        if (end != std::string_view::npos) {
            action.listed = parse_index_list(line.substr(p + 1, end - p - 1));
            has_targets = !action.listed.empty();
            p = end + 1;
        }
    }
    action.kind = kind_for(label, has_targets);
    while (p < line.size() && (line[p] == ' ' || line[p] == ':')) {
        ++p;
    }
    action.text = std::string(trim(line.substr(p)));
    return action;
}

std::optional<std::string_view> match_synthesis_header(std::string_view line) {
    static constexpr std::array<std::string_view, 8> kHeaders = {
        "final answer", "synthesized explanation", "synthesised explanation", "synthesis",
        "coherent explanation", "revised explanation", "revised reasoning", "revised trace",
    };
    for (auto header : kHeaders) {
        if (!istarts_with(line, header)) {
            continue;
        }
        auto rest = trim(line.substr(header.size()));
        if (!rest.empty() && rest.front() == ':') {
            return trim(rest.substr(1));
        }
        if (rest.empty()) {
            return rest;
        }
    }
    return std::nullopt;
}

std::optional<std::string_view> match_revised_line(std::string_view line) {
    static constexpr std::array<std::string_view, 5> kPrefixes = {"revised", "rewritten", "merged", "compressed",
                                                                  "text"};
    for (auto prefix : kPrefixes) {
        if (istarts_with(line, prefix)) {
            auto rest = trim(line.substr(prefix.size()));
            if (!rest.empty() && rest.front() == ':') {
                return trim(rest.substr(1));
            }
        }
    }
    return std::nullopt;
}

std::string idx(std::size_t i) {
    return std::to_string(i);
}

}  // namespace

std::string build_revision_prompt(std::span<const SkillStep> steps, std::string_view answer) {
    require(!steps.empty(), "build_revision_prompt: steps must be non-empty");
    std::string prompt(prompts::kSelfRevision);
    prompt += "\n\n";
    prompt += prompts::kStepsHeader;
    for (const auto& step : steps) {
        prompt += "Step " + idx(step.index) + ": " + step.text + "\n";
        if (!step.skill.empty()) {
            prompt += "Skill: " + step.skill + "\n";
        }
    }
    prompt += "\n";
    prompt += prompts::kOriginalAnswerHeader;
    prompt += trim(answer);
    prompt += "\n\n";
    prompt += prompts::kRevisionOutputFormat;
    return prompt;
}

Revision parse_revision(std::string_view raw, std::size_t step_count) {
    require(!trim(raw).empty(), "parse_revision: raw must be non-empty");
    require(step_count >= 1, "parse_revision: step count must be >= 1");

    const std::string cleaned = strip_markup(raw);
    const auto lines = [&] {
        std::vector<std::string_view> out;
        std::size_t start = 0;
        while (start <= cleaned.size()) {
            auto end = cleaned.find('\n', start);
            if (end == std::string::npos) {
                end = cleaned.size();
            }
            out.push_back(std::string_view(cleaned).substr(start, end - start));
            start = end + 1;
        }
        return out;
    }();

    std::vector<PendingAction> found;
    std::optional<std::string> synthesis;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const auto line = trim(lines[li]);
        if (auto head = match_synthesis_header(line)) {
            std::string text(*head);
            for (std::size_t k = li + 1; k < lines.size(); ++k) {
                text += '\n';
                text += lines[k];
            }
            synthesis = std::string(trim(text));
            break;
        }
        if (auto action = match_action_line(line)) {
            found.push_back(std::move(*action));
            continue;
        }
        if (found.empty()) {
            continue;
        }
        auto& last = found.back();
        if (line.empty()) {
            last.collecting = false;
            continue;
        }
        if (auto revised = match_revised_line(line)) {
            last.text = std::string(*revised);
            last.collecting = true;
        } else if (last.collecting) {
            if (!last.text.empty()) {
                last.text += ' ';
            }
            last.text += line;
        }
    }

    if (found.empty()) {
        throw Error(Errc::ParseError, "no per-step action lines in teacher reply");
    }
    std::map<std::size_t, std::size_t> owner;  // step index -> position in `found`
    for (std::size_t k = 0; k < found.size(); ++k) {
        const auto i = found[k].index;
        if (i < 1 || i > step_count) {
            throw Error(Errc::StepIndexOutOfRange, "action for step " + idx(i) + " of " + idx(step_count));
        }
        if (!owner.emplace(i, k).second) {
            throw Error(Errc::DuplicateStepIndex, "step " + idx(i) + " has more than one action");
        }
    }

    std::set<std::size_t> folded;  // positions in `found` absorbed by a merge
    std::map<std::size_t, std::vector<std::size_t>> absorbed;
    for (std::size_t k = 0; k < found.size(); ++k) {
        auto& a = found[k];
        if (a.kind != ActionKind::Merge) {
            continue;
        }
        std::vector<std::size_t> targets = a.listed;
        if (targets.empty()) {
            for (std::size_t j = a.index + 1; j <= step_count && !owner.contains(j); ++j) {
                targets.push_back(j);
            }
        }
        std::sort(targets.begin(), targets.end());
        targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
        std::erase(targets, a.index);
        for (auto t : targets) {
            if (t < 1 || t > step_count) {
                throw Error(Errc::StepIndexOutOfRange, "merge target " + idx(t) + " of " + idx(step_count));
            }
        }
        if (!targets.empty()) {
            const std::size_t lo = std::min(targets.front(), a.index);
            const std::size_t hi = std::max(targets.back(), a.index);
            if (hi - lo != targets.size()) {
                throw Error(Errc::InvalidMergeTarget, "step " + idx(a.index) + " merges non-adjacent steps");
            }
        }
        for (auto t : targets) {
            const auto it = owner.find(t);
            if (it != owner.end()) {
                // "5. DELETE" next to "4. MULTI-STEP COMPRESS [5]" restates the merge.
                if (found[it->second].kind != ActionKind::Delete || folded.contains(it->second)) {
                    throw Error(Errc::DuplicateStepIndex, "step " + idx(t) + " is both merged and acted on");
                }
                folded.insert(it->second);
            }
        }
        absorbed[a.index] = targets;
    }

    std::set<std::size_t> covered;
    for (std::size_t k = 0; k < found.size(); ++k) {
        if (folded.contains(k)) {
            continue;
        }
        covered.insert(found[k].index);
        if (auto it = absorbed.find(found[k].index); it != absorbed.end()) {
            for (auto t : it->second) {
                if (!covered.insert(t).second) {
                    throw Error(Errc::DuplicateStepIndex, "step " + idx(t) + " is merged twice");
                }
            }
        }
    }
    for (std::size_t i = 1; i <= step_count; ++i) {
        if (!covered.contains(i)) {
            throw Error(Errc::MissingStepAction, "no action for step " + idx(i));
        }
    }

    Revision revision;
    for (std::size_t k = 0; k < found.size(); ++k) {
        if (folded.contains(k)) {
            continue;
        }
        const auto& a = found[k];
        StepAction sa;
        sa.index = a.index;
        switch (a.kind) {
        case ActionKind::Keep:
            sa.action = action::Keep{};
            break;
        case ActionKind::Delete:
            sa.action = action::Delete{};
            break;
        case ActionKind::Rewrite:
            if (a.text.empty()) {
                throw Error(Errc::ParseError, "step " + idx(a.index) + " is compressed without text");
            }
            sa.action = action::Rewrite{a.text};
            break;
        case ActionKind::Merge:
            if (a.text.empty()) {
                throw Error(Errc::ParseError, "step " + idx(a.index) + " is merged without text");
            }
            sa.action = action::Merge{absorbed[a.index], a.text};
            break;
        }
        revision.actions.push_back(std::move(sa));
    }
    std::sort(revision.actions.begin(), revision.actions.end(),
              [](const StepAction& x, const StepAction& y) { return x.index < y.index; });

    if (!synthesis || synthesis->empty()) {
        throw Error(Errc::MissingSynthesis, "no synthesized explanation after the step list");
    }
    if (const auto at = find_answer_sentence(*synthesis)) {
        revision.revised_trace = std::string(trim(std::string_view(*synthesis).substr(0, *at)));
        revision.revised_answer = std::string(trim(std::string_view(*synthesis).substr(*at)));
    } else {
        revision.revised_trace = *synthesis;
    }
    return revision;
}

Revision parse_revision(std::string_view raw, std::span<const SkillStep> steps) {
    auto revision = parse_revision(raw, steps.size());
    revision.revised_steps = apply_actions(std::vector<SkillStep>(steps.begin(), steps.end()), revision.actions);
    return revision;
}

std::string_view to_string(RejectReason reason) noexcept {
    switch (reason) {
    case RejectReason::StepInflation:
        return "StepInflation";
    case RejectReason::TokenInflation:
        return "TokenInflation";
    case RejectReason::AnswerMismatch:
        return "AnswerMismatch";
    case RejectReason::EmptyTrace:
        return "EmptyTrace";
    }
    return "Unknown";
}

AcceptDecision validate_revision(const Response& original, const Decomposition& decomposition,
                                 const Revision& revision, const TokenCounter& tokenizer,
                                 const std::optional<AnswerValue>& gold) {
    AcceptDecision d;
    d.steps_before = decomposition.steps.size();
    d.steps_after = revision.revised_step_count();
    if (d.steps_after > d.steps_before) {
        d.reasons.push_back(RejectReason::StepInflation);
    }

    const std::string_view answer =
        trim(revision.revised_answer).empty() ? std::string_view(original.answer) : revision.revised_answer;
    try {
        d.token_before = count_tokens(render_response(original.thinking, original.answer), tokenizer);
        d.token_after = count_tokens(render_response(revision.revised_trace, answer), tokenizer);
    } catch (const std::exception&) {
        d.token_after = d.token_before;
    }
    if (d.token_after >= d.token_before) {
        d.reasons.push_back(RejectReason::TokenInflation);
    }

    const auto revised_value = try_extract_final_answer(answer);
    const auto original_value = try_extract_final_answer(original.answer);
    bool consistent = revised_value.has_value() && (original_value.has_value() || gold.has_value());
    if (consistent && original_value) {
        consistent = *revised_value == *original_value;
    }
    if (consistent && gold) {
        consistent = *revised_value == *gold;
    }
    if (!consistent) {
        d.reasons.push_back(RejectReason::AnswerMismatch);
    }

    if (trim(revision.revised_trace).empty()) {
        d.reasons.push_back(RejectReason::EmptyTrace);
    }
    d.accepted = d.reasons.empty();
    return d;
}

Response assemble_revised_response(const Revision& revision, std::string_view fallback_answer,
                                   const ThinkTags& tags) {
    Response out;
    out.thinking = std::string(trim(revision.revised_trace));
    out.answer = std::string(trim(trim(revision.revised_answer).empty() ? fallback_answer : revision.revised_answer));
    out.raw = render_response(out.thinking, out.answer, tags);
    return out;
}

PruneOutcome prune_response(TeacherClient& teacher, const Response& original, const Decomposition& decomposition,
                            const TokenCounter& tokenizer, const std::optional<AnswerValue>& gold) {
    PruneOutcome out;
    const auto reply = teacher.ask(build_revision_prompt(decomposition.steps, original.answer));
    try {
        out.revision = parse_revision(reply.text, decomposition.steps);
    } catch (const Error& e) {
        out.drop_reason = std::string(to_string(e.code()));
        return out;
    }
    out.parsed = true;
    if (trim(out.revision.revised_answer).empty()) {
        out.revision.answer_backfilled = true;
    }
    out.decision = validate_revision(original, decomposition, out.revision, tokenizer, gold);
    if (!out.decision.accepted) {
        out.drop_reason = std::string(to_string(out.decision.reasons.front()));
        return out;
    }
    out.revised = assemble_revised_response(out.revision, original.answer);
    return out;
}

}  // namespace drp
