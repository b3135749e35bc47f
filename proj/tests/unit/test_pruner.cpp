// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "drp/decomposer.hpp"
#include "drp/error.hpp"
#include "drp/pruner.hpp"
#include "drp/teacher_client.hpp"
#include "drp/text.hpp"
#include "support.hpp"

using namespace drp;
using drp::testing::read_fixture;

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

std::vector<SkillStep> joy_skill_steps() {
    return parse_decomposition(read_fixture("joy/skill_decomposition.txt"), SegmentationMode::Skill);
}

Response joy_original() {
    Response r;
    r.thinking = std::string(trim(read_fixture("joy/original_cot.txt")));
    r.answer = "The answer is 5 hours.";
    r.raw = render_response(r.thinking, r.answer);
    return r;
}

Decomposition joy_decomposition() {
    return Decomposition::make(SegmentationMode::Skill, joy_skill_steps(), joy_original().thinking);
}

std::vector<std::string> labels(const Revision& r) {
    std::vector<std::string> out;
    for (const auto& a : r.actions) {
        out.emplace_back(action_label(a.action));
    }
    return out;
}

std::string steps_reply(std::size_t m) {
    std::string out;
    for (std::size_t i = 1; i <= m; ++i) {
        out += std::to_string(i) + ". KEEP\n";
    }
    return out;
}

}  // namespace

TEST_SUITE("pruner") {

TEST_CASE("revision prompt carries the full template") {
    const auto steps = joy_skill_steps();
    const auto prompt = build_revision_prompt(steps, "The answer is 5 hours.");
    for (const char* needle : {"KEEP:", "DELETE:", "SINGLE-STEP COMPRESS:", "MULTI-STEP COMPRESS:",
                               "merged with neighboring steps", "If the final step clarifies the final answer",
                               "matches the speaker’s tone and style", "Step 2: Calculate how many pages",
                               "Skill: Division", "Original answer:\nThe answer is 5 hours."}) {
        CAPTURE(needle);
        CHECK(prompt.find(needle) != std::string::npos);
    }
    const std::vector<SkillStep> one = {{1, "only step", "Planning"}};
    const auto single = build_revision_prompt(one, "x");
    CHECK(single.find("MULTI-STEP COMPRESS") != std::string::npos);
    CHECK(single.find("KEEP") != std::string::npos);
    CHECK(code_of([] { build_revision_prompt(std::span<const SkillStep>{}, "x"); }) == Errc::PreconditionViolation);
}

TEST_CASE("Joy skill revision") {
    const auto steps = joy_skill_steps();
    const auto rev = parse_revision(read_fixture("joy/skill_revision.txt"), steps);
    CHECK(labels(rev) == std::vector<std::string>{"KEEP", "SINGLE-STEP COMPRESS", "DELETE", "SINGLE-STEP COMPRESS",
                                                  "DELETE", "SINGLE-STEP COMPRESS", "DELETE"});
    REQUIRE(rev.revised_step_count() == 4);
    CHECK(rev.revised_steps[0] == steps[0].text);
    CHECK(rev.revised_steps[1] == "Joy reads 8 pages in 20 minutes, so she reads 0.4 pages per minute (8 ÷ 20).");
    CHECK(rev.revised_answer == "The answer is 5 hours.");
    CHECK(extract_final_answer(rev.revised_answer) == *AnswerValue::parse("5"));
    CHECK(rev.revised_trace.rfind("Okay, let's calculate", 0) == 0);
    CHECK(rev.revised_trace.find("which gives us 5 hours.") != std::string::npos);
}

TEST_CASE("Joy default revision with Revised: lines") {
    const auto steps = parse_decomposition(read_fixture("joy/default_decomposition.txt"), SegmentationMode::Default);
    const auto rev = parse_revision(read_fixture("joy/default_revision.txt"), steps);
    REQUIRE(rev.actions.size() == 4);
    for (const auto& a : rev.actions) {
        CHECK(std::holds_alternative<action::Rewrite>(a.action));
    }
    CHECK(rev.revised_steps[3] == "Converting 300 minutes to hours: 300 ÷ 60 = 5 hours.");
    CHECK(rev.revised_answer == "The answer is 5.");
}

TEST_CASE("parse errors") {
    CHECK(code_of([] { parse_revision("1. EXPAND: more words\n\nFinal Answer: The answer is 1.", 1); }) ==
          Errc::UnknownAction);
    CHECK(code_of([] {
              parse_revision("1. MULTI-STEP COMPRESS [5]: a\n2. KEEP\n3. KEEP\n4. KEEP\n\nFinal Answer: The answer is 1.", 5);
          }) == Errc::InvalidMergeTarget);
    CHECK(code_of([] { parse_revision("1. KEEP\n1. DELETE\n\nFinal Answer: The answer is 1.", 1); }) ==
          Errc::DuplicateStepIndex);
    CHECK(code_of([] { parse_revision("1. KEEP\n3. KEEP\n\nFinal Answer: The answer is 1.", 2); }) ==
          Errc::StepIndexOutOfRange);
    CHECK(code_of([] { parse_revision("1. KEEP\n\nFinal Answer: The answer is 1.", 2); }) == Errc::MissingStepAction);
    CHECK(code_of([] { parse_revision("1. KEEP\n2. KEEP\n", 2); }) == Errc::MissingSynthesis);
    CHECK(code_of([] { parse_revision("I refuse.", 2); }) == Errc::ParseError);
    CHECK(code_of([] { parse_revision("1. SINGLE-STEP COMPRESS:\n\nFinal Answer: x", 1); }) == Errc::ParseError);
    CHECK(code_of([] { parse_revision("", 2); }) == Errc::PreconditionViolation);
}

TEST_CASE("merges: listed, implicit, and restated deletes") {
    const std::vector<SkillStep> steps = {{1, "a", "s"}, {2, "b", "s"}, {3, "c", "s"}, {4, "d", "s"}};
    const auto listed = parse_revision(
        "1. KEEP\n2. MULTI-STEP COMPRESS [3, 4]: b+c+d\n\nFinal Answer: done. The answer is 4.", steps);
    REQUIRE(listed.actions.size() == 2);
    CHECK(std::get<action::Merge>(listed.actions[1].action).absorbed == std::vector<std::size_t>{3, 4});
    CHECK(listed.revised_steps == std::vector<std::string>{"a", "b+c+d"});

    const auto implicit =
        parse_revision("1. MULTI-STEP COMPRESS: a+b\n3. KEEP\n4. DELETE\n\nFinal Answer: The answer is 4.", steps);
    CHECK(std::get<action::Merge>(implicit.actions[0].action).absorbed == std::vector<std::size_t>{2});
    CHECK(implicit.revised_steps == std::vector<std::string>{"a+b", "c"});
    CHECK(implicit.revised_trace.empty());
    CHECK(implicit.revised_answer == "The answer is 4.");

    const auto restated = parse_revision(
        "1. KEEP\n2. MULTI-STEP COMPRESS [3]: b+c\n3. DELETE\n4. KEEP\n\nFinal Answer: x. The answer is 4.", steps);
    CHECK(restated.revised_steps == std::vector<std::string>{"a", "b+c", "d"});

    const auto range = parse_revision("1. MERGE [2-4]: all\n\nFinal Answer: x. The answer is 4.", steps);
    CHECK(std::get<action::Merge>(range.actions[0].action).absorbed == std::vector<std::size_t>{2, 3, 4});
}

TEST_CASE("well-formed revisions parse back exactly") {
    std::mt19937_64 rng(99);
    for (int t = 0; t < 500; ++t) {
        const std::size_t m = 1 + rng() % 12;
        std::vector<SkillStep> steps;
        for (std::size_t i = 1; i <= m; ++i) {
            steps.push_back(SkillStep{i, "step " + std::to_string(i), "Skill"});
        }
        std::string raw = rng() % 2 ? "Here is my revision.\n\n" : "";
        std::vector<StepAction> expected;
        for (std::size_t i = 1; i <= m;) {
            const bool bold = rng() % 2;
            const std::string head = (rng() % 2 ? "Step " + std::to_string(i) + ":" : std::to_string(i) + ".") + " ";
            const auto wrap = [&](const std::string& label) { return bold ? "**" + label + ":**" : label + ":"; };
            const int choice = static_cast<int>(rng() % 4);
            if (choice == 3 && i < m) {
                const std::size_t span = 1 + rng() % std::min<std::size_t>(3, m - i);
                std::vector<std::size_t> absorbed;
                std::string list;
                for (std::size_t k = i + 1; k <= i + span; ++k) {
                    absorbed.push_back(k);
                    list += (list.empty() ? "" : ", ") + std::to_string(k);
                }
                const std::string text = "merged " + std::to_string(i);
                raw += head + (bold ? "**MULTI-STEP COMPRESS [" + list + "]:**" : "MULTI-STEP COMPRESS [" + list + "]:") +
                       " " + text + "\n";
                expected.push_back({i, action::Merge{absorbed, text}});
                i += span + 1;
                continue;
            }
            if (choice == 2) {
                const std::string text = "short " + std::to_string(i);
                if (rng() % 2) {
                    raw += head + wrap("SINGLE-STEP COMPRESS") + "\nRevised: " + text + "\n\n";
                } else {
                    raw += head + wrap("SINGLE-STEP COMPRESS") + " " + text + "\n";
                }
                expected.push_back({i, action::Rewrite{text}});
            } else if (choice == 1) {
                raw += head + wrap("DELETE") + " redundant.\n";
                expected.push_back({i, action::Delete{}});
            } else {
                raw += head + wrap("KEEP") + "\n";
                expected.push_back({i, action::Keep{}});
            }
            ++i;
        }
        raw += "\nFinal Answer: Put together. The answer is " + std::to_string(m) + ".";
        CAPTURE(raw);
        const auto rev = parse_revision(raw, steps);
        REQUIRE(rev.actions.size() == expected.size());
        for (std::size_t k = 0; k < expected.size(); ++k) {
            CHECK(rev.actions[k].index == expected[k].index);
            CHECK(rev.actions[k].action == expected[k].action);
        }
        CHECK(rev.revised_steps == apply_actions(steps, expected));
        CHECK(rev.revised_answer == "The answer is " + std::to_string(m) + ".");
    }
}

TEST_CASE("mangled replies fail with library errors only") {
    const std::string base = read_fixture("joy/skill_revision.txt");
    std::mt19937_64 rng(7);
    const std::string noise = "0123456789.:[]-*_ \nKEEPDLTMRGabc";
    for (int t = 0; t < 2000; ++t) {
        std::string s = base;
        const int edits = 1 + static_cast<int>(rng() % 8);
        for (int e = 0; e < edits && !s.empty(); ++e) {
            const std::size_t at = rng() % s.size();
            switch (rng() % 3) {
            case 0:
                s.erase(at, 1 + rng() % 20);
                break;
            case 1:
                s.insert(at, 1, noise[rng() % noise.size()]);
                break;
            default:
                s[at] = noise[rng() % noise.size()];
            }
        }
        try {
            parse_revision(s, 7);
        } catch (const Error&) {
        } catch (const std::exception& e) {
            FAIL("non-library exception: " << e.what());
        }
    }
}

TEST_CASE("validate_revision on the Joy example") {
    const auto original = joy_original();
    const auto d = joy_decomposition();
    const auto& tok = drp::testing::qwen_tokenizer();
    const auto rev = parse_revision(read_fixture("joy/skill_revision.txt"), d.steps);
    const auto ok = validate_revision(original, d, rev, tok, AnswerValue::parse("5"));
    CHECK(ok.accepted);
    CHECK(ok.steps_before == 7);
    CHECK(ok.steps_after == 4);
    CHECK(ok.token_after < ok.token_before);
    CHECK(ok.token_before == count_tokens(original.raw, tok));

    auto wrong = rev;
    wrong.revised_answer = "The answer is 6 hours.";
    const auto mismatch = validate_revision(original, d, wrong, tok);
    CHECK_FALSE(mismatch.accepted);
    CHECK(mismatch.reasons == std::vector<RejectReason>{RejectReason::AnswerMismatch});

    const auto gold_mismatch = validate_revision(original, d, rev, tok, AnswerValue::parse("6"));
    CHECK_FALSE(gold_mismatch.accepted);

    auto bloated = rev;
    bloated.revised_trace = original.thinking + " " + original.thinking;
    const auto inflated = validate_revision(original, d, bloated, tok);
    CHECK_FALSE(inflated.accepted);
    CHECK(inflated.reasons == std::vector<RejectReason>{RejectReason::TokenInflation});

    auto grown = rev;
    grown.revised_steps.assign(8, "x");
    CHECK(validate_revision(original, d, grown, tok).reasons == std::vector<RejectReason>{RejectReason::StepInflation});

    auto hollow = rev;
    hollow.revised_trace = " ";
    CHECK(validate_revision(original, d, hollow, tok).reasons == std::vector<RejectReason>{RejectReason::EmptyTrace});
}

TEST_CASE("empty revised answer is backfilled") {
    const auto original = joy_original();
    const auto d = joy_decomposition();
    auto rev = parse_revision(read_fixture("joy/skill_revision.txt"), d.steps);
    rev.revised_answer.clear();
    const auto decision = validate_revision(original, d, rev, drp::testing::qwen_tokenizer());
    CHECK(decision.accepted);
    const auto out = assemble_revised_response(rev, original.answer);
    CHECK(out.answer == "The answer is 5 hours.");
}

TEST_CASE("assembled responses round-trip") {
    const auto original = joy_original();
    const auto d = joy_decomposition();
    const auto rev = parse_revision(read_fixture("joy/skill_revision.txt"), d.steps);
    const auto out = assemble_revised_response(rev, original.answer);
    CHECK(out.raw.rfind("<think>", 0) == 0);
    CHECK(out.raw.find("The answer is 5 hours.") != std::string::npos);
    const auto back = parse_response(out.raw);
    CHECK(back.thinking == rev.revised_trace);
    CHECK(back.answer == rev.revised_answer);
}

TEST_CASE("prune_response through the mock teacher") {
    ClientOptions opts;
    opts.mock = true;
    TeacherClient teacher(opts);
    const auto original = joy_original();
    const auto decomposed = decompose_trace(teacher, original.thinking, SegmentationMode::Skill);
    REQUIRE(decomposed.ok);
    const auto outcome = prune_response(teacher, original, decomposed.decomposition, drp::testing::qwen_tokenizer(),
                                        AnswerValue::parse("5"));
    REQUIRE(outcome.parsed);
    CHECK(outcome.decision.accepted);
    REQUIRE(outcome.revised.has_value());
    CHECK(outcome.decision.steps_after <= outcome.decision.steps_before);
    CHECK(extract_final_answer(outcome.revised->answer) == *AnswerValue::parse("5"));
}

TEST_CASE("KEEP-only replies are rejected") {
    const std::vector<SkillStep> steps = {{1, "Add 2 and 3 to get 5.", "Addition"}};
    Response original;
    original.thinking = "Add 2 and 3 to get 5.";
    original.answer = "The answer is 5.";
    const auto d = Decomposition::make(SegmentationMode::Skill, steps, original.thinking);
    const auto rev = parse_revision(steps_reply(1) + "\nFinal Answer: Add 2 and 3 to get 5. The answer is 5.", steps);
    const auto decision = validate_revision(original, d, rev, drp::testing::qwen_tokenizer());
    CHECK_FALSE(decision.accepted);
    CHECK(decision.token_after == decision.token_before);
    CHECK(decision.reasons == std::vector<RejectReason>{RejectReason::TokenInflation});
}

}  // TEST_SUITE
