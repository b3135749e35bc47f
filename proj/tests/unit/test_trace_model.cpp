// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "drp/error.hpp"
#include "drp/trace_model.hpp"

using namespace drp;

namespace {

Errc code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return Errc::PreconditionViolation;
}

}  // namespace

TEST_SUITE("trace_model") {

TEST_CASE("parse_response splits thinking and answer") {
    const auto r = parse_response(
        "<think>Natalia sold 48 clips in April. Total clips sold: 48 + 24 = 72</think>The answer is 72.");
    CHECK(r.thinking == "Natalia sold 48 clips in April. Total clips sold: 48 + 24 = 72");
    CHECK(r.answer == "The answer is 72.");
}

TEST_CASE("parse_response errors") {
    CHECK(code_of([] { parse_response("just an answer, no tags"); }) == Errc::MissingThinkBlock);
    CHECK(code_of([] { parse_response("<think></think>x"); }) == Errc::EmptyTrace);
    CHECK(code_of([] { parse_response("<think>  \n </think>x"); }) == Errc::EmptyTrace);
    CHECK(code_of([] { parse_response("<think>never closed"); }) == Errc::UnclosedThinkBlock);
}

TEST_CASE("parse_response accepts a completion that starts inside the think block") {
    const auto r = parse_response("reasoning here\n</think>\n\nThe answer is 3.");
    CHECK(r.thinking == "reasoning here");
    CHECK(r.answer == "The answer is 3.");
}

TEST_CASE("custom think tags") {
    const ThinkTags tags{"<reasoning>", "</reasoning>"};
    const auto r = parse_response("<reasoning>t</reasoning>a", tags);
    CHECK(r.thinking == "t");
    CHECK(r.answer == "a");
}

TEST_CASE("render_response round-trips") {
    const auto raw = render_response("step one\nstep two", "The answer is 5.");
    const auto r = parse_response(raw);
    CHECK(r.thinking == "step one\nstep two");
    CHECK(r.answer == "The answer is 5.");
    CHECK(raw.rfind("<think>", 0) == 0);
}

TEST_CASE("Decomposition::make preconditions") {
    CHECK(code_of([] { Decomposition::make(SegmentationMode::Skill, {}, "t"); }) == Errc::PreconditionViolation);
    CHECK(code_of([] {
              Decomposition::make(SegmentationMode::Skill, {SkillStep{1, "a", ""}}, "a");
          }) == Errc::PreconditionViolation);
    CHECK(code_of([] {
              Decomposition::make(SegmentationMode::Default, {SkillStep{2, "a", ""}}, "a");
          }) == Errc::PreconditionViolation);
    const auto d = Decomposition::make(SegmentationMode::Default, {SkillStep{1, "a", ""}}, "a");
    CHECK(d.source_hash == trace_hash("a"));
    CHECK(trace_hash("a  b") == trace_hash("a b"));
    CHECK(trace_hash("a b") != trace_hash("a c"));
}

TEST_CASE("apply_actions") {
    const std::vector<SkillStep> steps = {{1, "one", "s"}, {2, "two", "s"}, {3, "three", "s"}, {4, "four", "s"}};
    const std::vector<StepAction> actions = {
        {1, action::Keep{}},
        {2, action::Merge{{3}, "two and three"}},
        {4, action::Rewrite{"4"}},
    };
    const auto out = apply_actions(steps, actions);
    REQUIRE(out.size() == 3);
    CHECK(out[0] == "one");
    CHECK(out[1] == "two and three");
    CHECK(out[2] == "4");

    const std::vector<StepAction> deletes = {{1, action::Delete{}}, {2, action::Keep{}}, {3, action::Delete{}},
                                             {4, action::Delete{}}};
    CHECK(apply_actions(steps, deletes) == std::vector<std::string>{"two"});
}

TEST_CASE("action labels and mode names") {
    CHECK(action_label(action::Keep{}) == "KEEP");
    CHECK(action_label(action::Delete{}) == "DELETE");
    CHECK(action_label(action::Rewrite{"x"}) == "SINGLE-STEP COMPRESS");
    CHECK(action_label(action::Merge{{2}, "x"}) == "MULTI-STEP COMPRESS");
    CHECK(parse_segmentation_mode("default") == SegmentationMode::Default);
    CHECK(to_string(SegmentationMode::Skill) == "skill");
}

}  // TEST_SUITE
