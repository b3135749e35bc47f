// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drp/answer.hpp"
#include "drp/tokenizer.hpp"
#include "drp/trace_model.hpp"

namespace drp {

class TeacherClient;

/// Self-revision prompt: the template, the numbered steps (with skills when
/// present), the original answer and the expected output format.
std::string build_revision_prompt(std::span<const SkillStep> steps, std::string_view answer);

/// Parses per-step action lines and the synthesized explanation. Accepted
/// action lines look like "3. SINGLE-STEP COMPRESS: text" or
/// "Step 3: MULTI-STEP COMPRESS [4, 5]: text", with optional markdown bold and
/// an optional "Revised:" continuation line. The explanation follows a
/// "Final Answer:" (or "Synthesized explanation:") header; the sentence stating
/// the final answer becomes the revised answer.
/// revised_steps is left empty; see the overload below.
/// Throws UnknownAction, DuplicateStepIndex, StepIndexOutOfRange,
/// MissingStepAction, InvalidMergeTarget, MissingSynthesis, ParseError.
Revision parse_revision(std::string_view raw, std::size_t step_count);

/// parse_revision plus revised_steps computed from the original step texts.
Revision parse_revision(std::string_view raw, std::span<const SkillStep> steps);

enum class RejectReason { StepInflation, TokenInflation, AnswerMismatch, EmptyTrace };

std::string_view to_string(RejectReason reason) noexcept;

struct AcceptDecision {
    bool accepted = false;
    std::vector<RejectReason> reasons;
    std::size_t token_before = 0;
    std::size_t token_after = 0;
    std::size_t steps_before = 0;
    std::size_t steps_after = 0;
};

/// Accepts iff the step count does not grow, the rendered revised response has
/// strictly fewer tokens than the original, the revised answer matches the
/// original answer (and the gold answer when one is given), and the revised
/// trace is non-empty. An empty revised answer is backfilled from the original
/// before the checks. Never throws.
AcceptDecision validate_revision(const Response& original, const Decomposition& decomposition,
                                 const Revision& revision, const TokenCounter& tokenizer,
                                 const std::optional<AnswerValue>& gold = std::nullopt);

/// R-hat as a response; an empty revised answer is replaced by `fallback_answer`.
Response assemble_revised_response(const Revision& revision, std::string_view fallback_answer,
                                   const ThinkTags& tags = {});

struct PruneOutcome {
    bool parsed = false;
    Revision revision;
    AcceptDecision decision;
    std::optional<Response> revised;  // set when accepted
    std::string drop_reason;          // error code or first reject reason
};

/// Prompts the teacher for a revision of one decomposed response, parses and
/// validates it. Parse failures are not retried.
PruneOutcome prune_response(TeacherClient& teacher, const Response& original, const Decomposition& decomposition,
                            const TokenCounter& tokenizer, const std::optional<AnswerValue>& gold = std::nullopt);

}  // namespace drp
