// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "drp/decomposer.hpp"
#include "drp/error.hpp"
#include "drp/jsonl.hpp"
#include "drp/parallel.hpp"
#include "drp/teacher_client.hpp"
#include "drp/text.hpp"

#ifndef DRP_FIXTURE_DIR
#error "DRP_FIXTURE_DIR must point at tests/fixtures"
#endif

namespace drp::testing {

namespace fs = std::filesystem;

fs::path fixture_path(std::string_view relative) {
    return fs::path(DRP_FIXTURE_DIR) / fs::path(std::string(relative));
}

std::string read_fixture(std::string_view relative) {
    std::ifstream in(fixture_path(relative), std::ios::binary);
    if (!in) {
        throw Error(Errc::IoError, "missing fixture " + std::string(relative));
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const BpeTokenizer& qwen_tokenizer() {
    static const BpeTokenizer tok = BpeTokenizer::from_file(fixture_path("tokenizers/qwen_style.json").string());
    return tok;
}

const BpeTokenizer& gpt2_tokenizer() {
    static const BpeTokenizer tok = BpeTokenizer::from_file(fixture_path("tokenizers/gpt2_style.json").string());
    return tok;
}

TempDir::TempDir(std::string_view tag) {
    static std::atomic<unsigned> counter{0};
    std::random_device rd;
    for (;;) {
        path_ = fs::temp_directory_path() /
                ("drp-" + std::string(tag) + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        if (fs::create_directories(path_)) {
            break;
        }
    }
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

std::string chat_body(std::string_view content) {
    nlohmann::json body = {
        {"id", "stub"},
        {"object", "chat.completion"},
        {"choices", {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", content}}}, {"finish_reason", "stop"}}}},
        {"usage", {{"prompt_tokens", 1}, {"completion_tokens", 1}}},
    };
    return body.dump();
}

struct StubServer::Impl {
    httplib::Server server;
    std::thread thread;
    int port = 0;
};

StubServer::StubServer(Handler handler, std::size_t threads) : impl_(std::make_unique<Impl>()) {
    impl_->server.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
    impl_->server.Post("/v1/chat/completions", [this, handler](const httplib::Request& req, httplib::Response& res) {
        ++requests_;
        const std::size_t now = ++in_flight_;
        std::size_t peak = peak_.load();
        while (now > peak && !peak_.compare_exchange_weak(peak, now)) {
        }
        const StubReply reply = handler(req.body);
        --in_flight_;
        res.status = reply.status;
        res.set_content(reply.body, "application/json");
    });
    impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
    if (impl_->port <= 0) {
        throw Error(Errc::IoError, "stub server could not bind");
    }
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

StubServer::~StubServer() {
    impl_->server.stop();
    if (impl_->thread.joinable()) {
        impl_->thread.join();
    }
}

std::string StubServer::url() const {
    return "http://127.0.0.1:" + std::to_string(impl_->port) + "/v1";
}

namespace {

PropertyResult fail(std::string detail) {
    return PropertyResult{false, std::move(detail)};
}

const std::vector<std::string>& words() {
    static const std::vector<std::string> w = {
        "Joy",   "reads", "8",     "pages", "in",    "20",     "minutes,", "so",   "0.4",   "per",
        "120",   "÷",     "60",    "=",     "5",     "hours.", "First,",   "we",   "add",   "48",
        "+",     "24",    "72.",   "Let’s", "check", "that",   "again.",   "×",    "3",     "—",
        "“ok”",  "total", "Wait,", "hmm.",  "naïve", "日本",   "x²",       "(a)",  "Step",  "Skill:",
    };
    return w;
}

}  // namespace

PropertyResult check_partition_coverage(std::size_t trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto& vocab = words();
    const char* separators[] = {" ", " ", " ", "  ", "\n", "\n\n", "\t"};
    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t n_words = 1 + rng() % 80;
        std::string trace;
        std::vector<std::size_t> gaps;  // offsets of separators between words
        for (std::size_t i = 0; i < n_words; ++i) {
            if (i > 0) {
                gaps.push_back(trace.size());
                trace += separators[rng() % std::size(separators)];
            }
            trace += vocab[rng() % vocab.size()];
        }
        // Choose cut points among the gaps; each piece keeps its raw bytes.
        std::vector<std::size_t> cuts;
        for (auto g : gaps) {
            if (rng() % 3 == 0) {
                cuts.push_back(g);
            }
        }
        std::vector<SkillStep> raw_steps;
        std::size_t begin = 0;
        cuts.push_back(trace.size());
        for (auto c : cuts) {
            raw_steps.push_back(SkillStep{raw_steps.size() + 1, trace.substr(begin, c - begin), "Skill " + std::to_string(rng() % 7)});
            begin = c;
        }
        const auto report = validate_decomposition(trace, raw_steps);
        if (!report.coverage || report.coverage_ratio != 1.0) {
            return fail("trial " + std::to_string(t) + ": exact partition not covered");
        }

        std::vector<SkillStep> steps = raw_steps;
        for (auto& s : steps) {
            s.text = normalize_text(s.text);
        }
        const auto normalized_report = validate_decomposition(trace, steps);
        if (!normalized_report.coverage) {
            return fail("trial " + std::to_string(t) + ": whitespace-normalized partition not covered");
        }
        for (auto mode : {SegmentationMode::Skill, SegmentationMode::Default}) {
            auto expected = steps;
            if (mode == SegmentationMode::Default) {
                for (auto& s : expected) {
                    s.skill.clear();
                }
            }
            const auto parsed = parse_decomposition(render_steps(expected, mode), mode);
            if (parsed != expected) {
                return fail("trial " + std::to_string(t) + ": render/parse round trip differs in mode " +
                            std::string(to_string(mode)));
            }
        }
        if (steps.size() > 1) {
            auto swapped = steps;
            const std::size_t i = rng() % (steps.size() - 1);
            std::swap(swapped[i].text, swapped[i + 1].text);
            if (coverage_key(swapped[i].text) != coverage_key(swapped[i + 1].text) &&
                validate_decomposition(trace, swapped).coverage) {
                return fail("trial " + std::to_string(t) + ": reordered steps reported as covering");
            }
        }
    }
    return {};
}

std::vector<JudgePair> synthetic_judge_pairs(std::size_t n) {
    std::vector<JudgePair> out;
    for (std::size_t i = 0; i < n; ++i) {
        const std::string id = (i < 10 ? "p0" : "p") + std::to_string(i);
        const std::string first = "Pair " + id + ": read the numbers.";
        const std::string second = "Then add them.";
        JudgePair pair;
        pair.id = id;
        pair.trace = first + " " + second;
        pair.method1 = Decomposition::make(SegmentationMode::Skill,
                                           {SkillStep{1, first, "Interpreting a quantity"}, SkillStep{2, second, "Addition"}},
                                           pair.trace);
        pair.method2 = Decomposition::make(SegmentationMode::Default, {SkillStep{1, pair.trace, ""}}, pair.trace);
        out.push_back(std::move(pair));
    }
    return out;
}

JudgeFn canned_judge(std::vector<std::string> preference) {
    return [preference = std::move(preference)](const std::string& prompt) -> std::string {
        const auto id_at = prompt.find("Pair p");
        const auto a_at = prompt.find("Version A:\n");
        const auto b_at = prompt.find("Version B:\n");
        if (id_at == std::string::npos || a_at == std::string::npos || b_at == std::string::npos) {
            throw Error(Errc::UnrecognizedPrompt, "canned judge: unexpected prompt");
        }
        const std::size_t index = std::stoul(prompt.substr(id_at + 6, 2));
        const std::string& want = preference.at(index);
        if (want == "same") {
            return "Same";
        }
        const bool skill_is_a = prompt.substr(a_at, b_at - a_at).find("Step 2:") != std::string::npos;
        const bool vote_a = (want == "skill") == skill_is_a;
        return vote_a ? "A" : "B";
    };
}

EnvLookup empty_env() {
    return [](const std::string&) -> std::optional<std::string> { return std::nullopt; };
}

std::vector<StageReport> run_mock_pipeline(const fs::path& output_dir, std::uint64_t seed, bool force) {
    Config config;
    config.output_dir = output_dir;
    config.mock = true;
    config.force = force;
    config.seed = seed;
    config.tokenizer = fixture_path("tokenizers/qwen_style.json").string();
    std::vector<StageReport> reports;
    config.inputs = {fixture_path("problems20.jsonl").string()};
    reports.push_back(run_stage(Stage::Generate, config, empty_env()));
    config.inputs.clear();
    for (auto stage : {Stage::Decompose, Stage::Prune, Stage::BuildDataset}) {
        reports.push_back(run_stage(stage, config, empty_env()));
    }
    return reports;
}

PropertyResult check_mock_dataset(const fs::path& output_dir) {
    const auto& tok = qwen_tokenizer();
    std::map<std::string, nlohmann::json> by_question;
    for (const auto& c : read_jsonl(output_dir / "completions.jsonl")) {
        by_question[c.at("question").get<std::string>()] = c;
    }
    std::map<std::string, nlohmann::json> revisions;
    for (const auto& r : read_jsonl(output_dir / "revisions.jsonl")) {
        revisions[r.at("id").get<std::string>()] = r;
    }
    const auto rows = read_jsonl(output_dir / "dataset.jsonl");
    if (rows.empty()) {
        return fail("empty dataset");
    }
    for (const auto& row : rows) {
        const std::string question = row.at("instruction");
        const std::string output = row.at("output");
        const auto c = by_question.find(question);
        if (c == by_question.end()) {
            return fail("dataset question not in completions: " + question);
        }
        const std::string id = c->second.at("id");
        const auto r = revisions.find(id);
        if (r == revisions.end() || !r->second.at("accepted").get<bool>()) {
            return fail(id + ": exported without an accepted revision");
        }
        if (r->second.at("steps_after").get<std::size_t>() > r->second.at("steps_before").get<std::size_t>()) {
            return fail(id + ": revision has more steps than the decomposition");
        }
        const auto original = parse_response(c->second.at("completion").get<std::string>());
        const auto revised = parse_response(output);
        const auto before = count_tokens(render_response(original.thinking, original.answer), tok);
        const auto after = count_tokens(output, tok);
        if (after >= before) {
            return fail(id + ": " + std::to_string(after) + " tokens, original " + std::to_string(before));
        }
        const auto gold = AnswerValue::parse(c->second.at("gold").get<std::string>());
        const auto a = try_extract_final_answer(original.answer);
        const auto b = try_extract_final_answer(revised.answer);
        if (!gold || !a || !b || !(*a == *b) || !(*b == *gold)) {
            return fail(id + ": answers disagree");
        }
    }
    return {};
}

std::vector<EvalRecord> random_records(std::size_t n, std::size_t max_tokens, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<EvalRecord> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        EvalRecord r;
        r.id = "r" + std::to_string(i);
        r.tokens = rng() % (max_tokens + 1);
        r.correct = rng() % 3 != 0;
        r.benchmark = "synthetic";
        out.push_back(std::move(r));
    }
    return out;
}

PropertyResult check_capture_monotone(std::size_t trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t max_len = 1000 + rng() % 200000;
        auto records = random_records(1 + rng() % 300, max_len, rng());
        records.front().correct = true;
        const auto budgets = budget_grid(max_len, 1 + rng() % (max_len / 4 + 1));
        const auto curve = capture_curve(records, budgets);
        for (std::size_t i = 1; i < curve.size(); ++i) {
            if (curve[i].fraction < curve[i - 1].fraction) {
                return fail("trial " + std::to_string(t) + ": capture fraction decreases at budget " +
                            std::to_string(curve[i].budget));
            }
        }
        if (curve.back().budget != max_len || curve.back().fraction != 1.0) {
            return fail("trial " + std::to_string(t) + ": curve does not reach 1.0 at max_len");
        }
    }
    return {};
}

PropertyResult check_histogram_mass(std::size_t trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t max_len = 1 + rng() % 140000;
        const auto records = random_records(1 + rng() % 500, max_len + rng() % 1000, rng());
        const std::size_t bins = 2 + rng() % 99;
        const auto h = normalized_histogram(records, max_len, bins);
        if (std::abs(h.total_mass() - 1.0) > 1e-9) {
            return fail("trial " + std::to_string(t) + ": mass " + std::to_string(h.total_mass()));
        }
        std::size_t counted = 0;
        for (auto c : h.counts) {
            counted += c;
        }
        if (counted != records.size()) {
            return fail("trial " + std::to_string(t) + ": records lost from bins");
        }
    }
    return {};
}

PropertyResult check_cutoff_monotone(std::size_t trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        const auto records = random_records(1 + rng() % 200, 131072, rng());
        const std::size_t high = 1 + rng() % 131072;
        const std::size_t low = rng() % (high + 1);
        const auto a = apply_cutoff(records, CutoffPolicy{high, CutoffMode::Truncate});
        const auto b = apply_cutoff(records, CutoffPolicy{low, CutoffMode::Truncate});
        if (b.mean_tokens > a.mean_tokens + 1e-9 || b.accuracy().correct > a.accuracy().correct) {
            return fail("trial " + std::to_string(t) + ": lower threshold raised mean or accuracy");
        }
        const auto none = apply_cutoff(records, CutoffPolicy{131072, CutoffMode::Truncate});
        if (a.mean_tokens > none.mean_tokens + 1e-9) {
            return fail("trial " + std::to_string(t) + ": cutoff raised mean tokens");
        }
        const auto clip = apply_cutoff(records, CutoffPolicy{low, CutoffMode::Clip});
        if (clip.accuracy().correct != pass_at_1(records).correct) {
            return fail("trial " + std::to_string(t) + ": clip mode changed accuracy");
        }
    }
    return {};
}

PropertyResult check_cache_determinism() {
    std::atomic<int> counter{0};
    StubServer stub([&](const std::string&) { return StubReply{200, chat_body("Step 1: reply " + std::to_string(counter++))}; });
    TempDir dir("cache");

    ClientOptions opts;
    opts.endpoint = Endpoint{stub.url(), "", std::chrono::seconds(10)};
    opts.cache_dir = dir.path();
    opts.retry.base_delay = std::chrono::milliseconds(1);
    TeacherClient client(opts);

    ChatRequest req{"stub-model", std::nullopt, "Segment this.", 0.0, 256};
    const auto first = client.complete(req);
    const std::size_t calls_after_first = stub.requests();
    const auto second = client.complete(req);
    if (first.cache_hit || !second.cache_hit) {
        return fail("cache_hit flags wrong: first=" + std::to_string(first.cache_hit) +
                    " second=" + std::to_string(second.cache_hit));
    }
    if (second.text != first.text) {
        return fail("cached text differs from the original reply");
    }
    if (stub.requests() != calls_after_first || calls_after_first != 1) {
        return fail("network calls on cache hit: " + std::to_string(stub.requests() - calls_after_first));
    }
    // A second client over the same directory also hits without the network.
    TeacherClient reopened(opts);
    const auto third = reopened.complete(req);
    if (!third.cache_hit || third.text != first.text || stub.requests() != 1) {
        return fail("cache not reused across clients");
    }
    req.temperature = 0.7;
    const auto warm = client.complete(req);
    if (warm.cache_hit || stub.requests() != 2) {
        return fail("temperature change did not miss");
    }
    return {};
}

PropertyResult check_concurrency_bound(std::size_t bound, std::size_t burst) {
    StubServer stub(
        [](const std::string&) {
            std::this_thread::sleep_for(std::chrono::milliseconds(15));
            return StubReply{200, chat_body("ok")};
        },
        burst + 4);
    ClientOptions opts;
    opts.endpoint = Endpoint{stub.url(), "", std::chrono::seconds(30)};
    opts.concurrency = bound;
    opts.retry.base_delay = std::chrono::milliseconds(1);
    TeacherClient client(opts);

    std::atomic<std::size_t> failures{0};
    run_parallel(burst, burst, [&](std::size_t i) {
        try {
            client.complete(ChatRequest{"stub-model", std::nullopt, "request " + std::to_string(i), 0.0, 16});
        } catch (const std::exception&) {
            ++failures;
        }
    });
    if (failures != 0) {
        return fail(std::to_string(failures.load()) + " requests failed");
    }
    if (stub.requests() != burst) {
        return fail("stub saw " + std::to_string(stub.requests()) + " requests");
    }
    if (stub.peak_in_flight() > bound) {
        return fail("peak in flight " + std::to_string(stub.peak_in_flight()) + " > bound " + std::to_string(bound));
    }
    return {};
}

}  // namespace drp::testing
