// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <json.hpp>
#include <random>

#include "drp/error.hpp"
#include "drp/metrics.hpp"
#include "support.hpp"

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

std::vector<EvalRecord> records_from(std::initializer_list<std::pair<std::size_t, bool>> rows,
                                     const std::string& bench = "b") {
    std::vector<EvalRecord> out;
    for (const auto& [tokens, correct] : rows) {
        out.push_back(EvalRecord{"r" + std::to_string(out.size()), correct, tokens, bench});
    }
    return out;
}

std::vector<EvalRecord> with_mean(double mean, std::size_t n, const std::string& bench) {
    // n records whose token counts average exactly `mean` (mean * n integral).
    const auto total = static_cast<std::size_t>(std::llround(mean * static_cast<double>(n)));
    std::vector<EvalRecord> out;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t t = total / n + (i < total % n ? 1 : 0);
        out.push_back(EvalRecord{"r" + std::to_string(i), i % 2 == 0, t, bench});
    }
    return out;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("score_answer") {
    CHECK(score_answer("Total clips: 72. The answer is 72.", *AnswerValue::parse("72")));
    CHECK(score_answer("…The answer is 5 hours.", *AnswerValue::parse("5")));
    CHECK_FALSE(score_answer("no answer emitted", *AnswerValue::parse("72")));
    CHECK_FALSE(score_answer("The answer is 71.", *AnswerValue::parse("72")));
    CHECK(score_answer("<think>x</think>\\boxed{-17}", *AnswerValue::parse("-17")));
}

TEST_CASE("pass_at_1") {
    const auto mixed = records_from({{1, true}, {1, true}, {1, false}, {1, true}});
    CHECK(pass_at_1(mixed).value() == 0.75);

    std::vector<EvalRecord> thirty;
    for (int i = 0; i < 30; ++i) {
        thirty.push_back(EvalRecord{"a" + std::to_string(i), i < 15, 100, "aime24"});
    }
    CHECK(pass_at_1(thirty).fraction() == "15/30");
    CHECK(pass_at_1(thirty).value() == 0.5);

    const auto wrong = records_from({{1, false}, {2, false}});
    CHECK(pass_at_1(wrong).value() == 0.0);
    CHECK(code_of([] { pass_at_1(std::span<const EvalRecord>{}); }) == Errc::EmptyCollection);
}

TEST_CASE("apply_cutoff example") {
    const auto rs = records_from({{500, true}, {800, true}, {130000, true}});
    const auto out = apply_cutoff(rs, CutoffPolicy{12000, CutoffMode::Truncate});
    CHECK(out.records[0].tokens == 500);
    CHECK(out.records[1].tokens == 800);
    CHECK(out.records[2].tokens == 12000);
    CHECK_FALSE(out.records[2].correct);
    CHECK(out.mean_tokens == doctest::Approx(4433.333333).epsilon(1e-9));
    CHECK(out.affected == 1);

    const auto clipped = apply_cutoff(rs, CutoffPolicy{12000, CutoffMode::Clip});
    CHECK(clipped.mean_tokens == 650.0);
    CHECK(clipped.accuracy().correct == 3);
    CHECK(clipped.token_counted == std::vector<bool>{true, true, false});
}

TEST_CASE("cutoff is a no-op under the threshold") {
    const auto rs = records_from({{100, true}, {11999, false}, {12000, true}});
    for (auto mode : {CutoffMode::Truncate, CutoffMode::Clip}) {
        const auto out = apply_cutoff(rs, CutoffPolicy{12000, mode});
        CHECK(out.affected == 0);
        REQUIRE(out.records.size() == rs.size());
        for (std::size_t i = 0; i < rs.size(); ++i) {
            CHECK(out.records[i].tokens == rs[i].tokens);
            CHECK(out.records[i].correct == rs[i].correct);
        }
        CHECK(out.mean_tokens == mean_tokens(rs));
    }
}

TEST_CASE("cutoff mode names") {
    CHECK(parse_cutoff_mode("clip") == CutoffMode::Clip);
    CHECK(to_string(CutoffMode::Truncate) == "truncate");
    CHECK(code_of([] { parse_cutoff_mode("chop"); }) == Errc::ConfigError);
}

TEST_CASE("cutoff monotonicity and clip invariance") {
    const auto r = drp::testing::check_cutoff_monotone(300, 11);
    INFO(r.detail);
    CHECK(r.ok);
}

TEST_CASE("capture curve examples") {
    const auto rs = records_from({{100, true}, {11000, true}, {38000, true}, {5, false}});
    const std::vector<std::size_t> budgets = {0, 11000, 38000};
    const auto curve = capture_curve(rs, budgets);
    REQUIRE(curve.size() == 3);
    CHECK(curve[0].fraction == 0.0);
    CHECK(curve[1].fraction == doctest::Approx(2.0 / 3.0));
    CHECK(curve[2].fraction == 1.0);

    const auto none = records_from({{5, false}});
    CHECK(code_of([&] { capture_curve(none, budgets); }) == Errc::NoCorrectRecords);
}

TEST_CASE("budget grid") {
    CHECK(budget_grid(3000, 1000) == std::vector<std::size_t>{0, 1000, 2000, 3000});
    CHECK(budget_grid(2500, 1000) == std::vector<std::size_t>{0, 1000, 2000, 2500});
}

TEST_CASE("capture curve monotonicity") {
    const auto r = drp::testing::check_capture_monotone(200, 5);
    INFO(r.detail);
    CHECK(r.ok);
}

TEST_CASE("histogram edge cases") {
    std::vector<EvalRecord> spike;
    for (int i = 0; i < 10; ++i) {
        spike.push_back(EvalRecord{"s", true, 1000, "b"});
    }
    const auto h = normalized_histogram(spike, 1000, 50);
    REQUIRE(h.counts.size() == 50);
    REQUIRE(h.edges.size() == 51);
    CHECK(h.counts.back() == 10);
    CHECK(h.density.back() == doctest::Approx(50.0));
    CHECK(h.total_mass() == doctest::Approx(1.0).epsilon(1e-12));

    const auto empty = normalized_histogram(std::span<const EvalRecord>{}, 1000, 50);
    CHECK(empty.total_mass() == 0.0);
    CHECK(empty.density.size() == 50);
    for (double d : empty.density) {
        CHECK(d == 0.0);
    }

    const auto beyond = normalized_histogram(records_from({{5000, true}, {0, true}}), 1000, 10);
    CHECK(beyond.counts.front() == 1);
    CHECK(beyond.counts.back() == 1);
}

TEST_CASE("histogram mass") {
    const auto r = drp::testing::check_histogram_mass(200, 3);
    INFO(r.detail);
    CHECK(r.ok);
}

TEST_CASE("uniform lengths give a flat histogram") {
    // Chi-square against the flat density: 49 degrees of freedom, the 0.999
    // quantile is about 85.4.
    const std::size_t max_len = 131072;
    const std::size_t n = 50000;
    std::mt19937_64 rng(123456789);
    std::vector<EvalRecord> rs;
    for (std::size_t i = 0; i < n; ++i) {
        rs.push_back(EvalRecord{"u", true, static_cast<std::size_t>(rng() % max_len), "b"});
    }
    const auto h = normalized_histogram(rs, max_len, 50);
    double chi2 = 0.0;
    for (std::size_t b = 0; b < 50; ++b) {
        const double lo = std::ceil(h.edges[b] * max_len);
        const double hi = std::ceil(h.edges[b + 1] * max_len);
        const double expected = static_cast<double>(n) * (hi - lo) / static_cast<double>(max_len);
        chi2 += (static_cast<double>(h.counts[b]) - expected) * (static_cast<double>(h.counts[b]) - expected) / expected;
        CHECK(h.density[b] == doctest::Approx(1.0).epsilon(0.1));
    }
    CHECK(chi2 < 85.4);
}

TEST_CASE("reduction labels") {
    CHECK(reduction_percent(917, 328) == 64);
    CHECK(reduction_percent(100, 112) == -12);
    CHECK(format_reduction(reduction_percent(917, 328)) == "-64%");
    CHECK(format_reduction(reduction_percent(8674, 4966)) == "-43%");
    CHECK(format_reduction(reduction_percent(100, 112)) == "+12%");
    CHECK(format_reduction(reduction_percent(100, 100)) == "0%");
}

TEST_CASE("compression report") {
    const auto before = with_mean(917, 100, "gsm8k");
    const auto after = with_mean(328, 100, "gsm8k");
    const auto rep = compression_report(before, after);
    CHECK(rep.mean_before == 917.0);
    CHECK(rep.mean_after == 328.0);
    CHECK(rep.reduction_label() == "-64%");
    CHECK(rep.benchmark == "gsm8k");
    CHECK(rep.pass_before.fraction() == "50/100");

    CHECK(compression_report(before, before).reduction_label() == "0%");
    const auto other = with_mean(328, 100, "aime24");
    CHECK(code_of([&] { compression_report(before, other); }) == Errc::BenchmarkMismatch);
    CHECK(code_of([&] { compression_report(before, std::span<const EvalRecord>{}); }) == Errc::EmptyCollection);
}

}  // TEST_SUITE
