// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

// Teacher prompt templates. Any edit to these strings must bump
// kPromptTemplateVersion so cached teacher replies are not reused.

#pragma once

#include <string_view>

namespace drp::prompts {

inline constexpr std::string_view kPromptTemplateVersion = "drp-templates-v1";

inline constexpr std::string_view kSkillSegmentation =
    "You are given a complete reasoning path for a math problem. Your task is to segment it into a sequence of "
    "clear, non-overlapping steps, where each step corresponds to exactly one atomic mathematical skill. These "
    "skills may include, for example, addition, subtraction, applying a formula, interpreting a quantity, "
    "simplifying, checking a condition, and so on.\n"
    "\n"
    "Use the following format for each step:\n"
    "\n"
    "Step n: {{original text segment}}\n"
    "Skill: {{name of the skill used}}\n"
    "\n"
    "Only segment and label the steps \u2014 do not solve or modify the original content in any way.";

inline constexpr std::string_view kDefaultSegmentation =
    "Segment the explanation into clear, non-overlapping steps.\n"
    "\n"
    "Use the following format for each step:\n"
    "\n"
    "Step n: {{original text segment}}\n"
    "\n"
    "Only segment the steps \u2014 do not solve or modify the original content in any way.";

inline constexpr std::string_view kReasoningPathHeader = "Reasoning path:\n";

inline constexpr std::string_view kSegmentationReminder =
    "Reminder: reply only with the step list, one \"Step n: ...\" line per step";

inline constexpr std::string_view kSelfRevision =
    "You are an expert in mathematical reasoning compression.\n"
    "\n"
    "Given a list of reasoning steps labeled with their respective skills, your task is to evaluate and revise "
    "each step according to one of the following four actions:\n"
    "\n"
    "1. KEEP: The step is necessary and already concise. Keep it unchanged.\n"
    "2. DELETE: The step is unnecessary and should be removed entirely.\n"
    "3. SINGLE-STEP COMPRESS: The step is necessary but verbose; rewrite it in a more concise way.\n"
    "4. MULTI-STEP COMPRESS: The step can be merged with neighboring steps; write a combined, cleaner version.\n"
    "\n"
    "If the final step clarifies the final answer (e.g., \u201cThe answer is...\u201d), retain it.\n"
    "\n"
    "After completing the revision of each step, synthesize the revised steps into a coherent explanation. "
    "Ensure the output is fluent, logically sound, and matches the speaker\u2019s tone and style.";

inline constexpr std::string_view kStepsHeader = "Steps:\n";
inline constexpr std::string_view kOriginalAnswerHeader = "Original answer:\n";

inline constexpr std::string_view kRevisionOutputFormat =
    "Output format: one line per step, \"n. ACTION: text\". For SINGLE-STEP COMPRESS the text is the rewritten "
    "step; for MULTI-STEP COMPRESS list the absorbed step numbers in brackets after the action "
    "(\"3. MULTI-STEP COMPRESS [4, 5]: combined text\"). Then write \"Final Answer:\" followed by the "
    "synthesized explanation, ending with the final answer sentence.";

inline constexpr std::string_view kPairwiseJudge =
    "Given two versions of step-by-step reasoning derived from the same original trace, please choose the "
    "version that shows better semantic coherence, structural consistency, and appropriate granularity. "
    "Respond with 'A', 'B', or 'Same'.";

inline constexpr std::string_view kVersionAHeader = "Version A:\n";
inline constexpr std::string_view kVersionBHeader = "Version B:\n";

inline constexpr std::string_view kVerdictReminder = "Reply with exactly one of: A, B, Same.";

/// System prompt for student generation (DeepSeek-R1 evaluation convention).
inline constexpr std::string_view kStudentSystem =
    "Please reason step by step, and put your final answer within \\boxed{}.";

}  // namespace drp::prompts
