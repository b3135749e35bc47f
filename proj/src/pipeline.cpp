// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#include "drp/pipeline.hpp"

#include <algorithm>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "drp/answer.hpp"
#include "drp/dataset_builder.hpp"
#include "drp/decomposer.hpp"
#include "drp/error.hpp"
#include "drp/hash.hpp"
#include "drp/judge_eval.hpp"
#include "drp/jsonl.hpp"
#include "drp/kernels.hpp"
#include "drp/metrics.hpp"
#include "drp/parallel.hpp"
#include "drp/prompts.hpp"
#include "drp/pruner.hpp"
#include "drp/teacher_client.hpp"
#include "drp/tokenizer.hpp"

namespace drp {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

bool is_client_error(Errc code) {
    switch (code) {
    case Errc::AuthError:
    case Errc::RateLimited:
    case Errc::MalformedReply:
    case Errc::NetworkError:
    case Errc::HttpError:
    case Errc::UnrecognizedPrompt:
    case Errc::IoError:
        return true;
    default:
        return false;
    }
}

std::string str_field(const json& record, const char* key) {
    if (!record.is_object() || !record.contains(key) || !record[key].is_string()) {
        throw Error(Errc::ParseError, std::string("record has no string field \"") + key + "\"");
    }
    return record[key].get<std::string>();
}

std::optional<std::string> opt_str_field(const json& record, const char* key) {
    if (!record.contains(key) || record[key].is_null()) {
        return std::nullopt;
    }
    if (record[key].is_string()) {
        return record[key].get<std::string>();
    }
    if (record[key].is_number()) {
        return record[key].dump();
    }
    throw Error(Errc::ParseError, std::string("field \"") + key + "\" must be a string or number");
}

// ---- stage bookkeeping --------------------------------------------------------

struct FileRef {
    fs::path path;
    std::string label;  // as recorded in the manifest
};

class StageRun {
public:
    StageRun(Stage stage, const Config& config) : stage_(stage), config_(config) {
        report.stage = stage;
        report.manifest = manifest_path(config, stage);
    }

    void add_input(const fs::path& path) {
        if (!fs::exists(path)) {
            throw Error(Errc::MissingUpstreamArtifact, std::string(to_string(stage_)) + " needs " + path.string() +
                                                           "; run the upstream stage first");
        }
        inputs_.push_back({path, label_for(path), sha256_file(path.string())});
    }

    void write_output(std::string_view name, std::string_view content) {
        const auto path = config_.output_dir / name;
        const auto hash = write_file_atomic(path, content);
        outputs_.push_back({std::string(name), hash});
    }

    void drop(const std::string& reason, std::size_t n = 1) {
        std::lock_guard lock(mutex_);
        report.drops[reason] += n;
    }

    void hard_failure(const std::string& id, const Error& e) {
        std::lock_guard lock(mutex_);
        ++report.hard_failures;
        report.drops["hard_failure:" + std::string(to_string(e.code()))] += 1;
        failures_.push_back({{"id", id}, {"error", e.what()}});
    }

    /// Previous manifest matches the current inputs, settings and outputs.
    bool up_to_date() const {
        if (config_.force || !fs::exists(report.manifest)) {
            return false;
        }
        json previous;
        try {
            previous = json::parse(read_file(report.manifest));
        } catch (const std::exception&) {
            return false;
        }
        if (!previous.value("complete", false) || previous.value("inputs", json()) != inputs_json() ||
            previous.value("settings", json()) != settings()) {
            return false;
        }
        for (const auto& out : previous.value("outputs", json::array())) {
            const auto path = config_.output_dir / out.value("path", std::string());
            if (!fs::exists(path) || sha256_file(path.string()) != out.value("sha256", std::string())) {
                return false;
            }
        }
        return true;
    }

    StageReport load_skipped() const {
        StageReport r = report;
        r.skipped = true;
        const auto previous = json::parse(read_file(report.manifest));
        r.ingested = previous["counts"].value("ingested", std::size_t{0});
        r.exported = previous["counts"].value("exported", std::size_t{0});
        r.drops = previous.value("drops", std::map<std::string, std::size_t>{});
        return r;
    }

    StageReport finish(json extra = json::object()) {
        std::size_t dropped = 0;
        for (const auto& [reason, n] : report.drops) {
            dropped += n;
        }
        report.ingested = report.exported + dropped;
        json outputs = json::array();
        for (const auto& [name, hash] : outputs_) {
            outputs.push_back({{"path", name}, {"sha256", hash}});
        }
        std::sort(failures_.begin(), failures_.end(),
                  [](const json& a, const json& b) { return a["id"].get<std::string>() < b["id"].get<std::string>(); });
        json manifest = {
            {"stage", std::string(to_string(stage_))},
            {"complete", report.hard_failures == 0},
            {"inputs", inputs_json()},
            {"outputs", std::move(outputs)},
            {"counts", {{"ingested", report.ingested}, {"exported", report.exported}, {"dropped", dropped}}},
            {"drops", report.drops},
            {"hard_failures", failures_},
            {"seed", config_.seed},
            {"template_version", std::string(prompts::kPromptTemplateVersion)},
            {"settings", settings()},
            {"details", std::move(extra)},
        };
        write_file_atomic(report.manifest, manifest.dump(2) + "\n");
        return report;
    }

    StageReport report;

private:
    struct InputRef {
        fs::path path;
        std::string label;
        std::string sha256;
    };

    std::string label_for(const fs::path& path) const {
        std::error_code ec;
        const auto rel = fs::relative(path, config_.output_dir, ec);
        if (!ec && !rel.empty() && rel.native().rfind("..", 0) != 0) {
            return rel.generic_string();
        }
        return path.generic_string();
    }

    json inputs_json() const {
        json out = json::array();
        for (const auto& in : inputs_) {
            out.push_back({{"path", in.label}, {"sha256", in.sha256}});
        }
        return out;
    }

    json settings() const {
        json s = config_.to_json();
        for (const char* key : {"output_dir", "cache_dir", "force", "inputs", "tokenizer"}) {
            s.erase(key);
        }
        return s;
    }

    Stage stage_;
    const Config& config_;
    std::vector<InputRef> inputs_;
    std::vector<std::pair<std::string, std::string>> outputs_;
    std::vector<json> failures_;
    std::mutex mutex_;
};

fs::path input_or(const Config& config, std::size_t i, std::string_view fallback) {
    if (config.inputs.size() > i) {
        return config.inputs[i];
    }
    return config.output_dir / fallback;
}

ClientOptions client_options(const Config& config, bool student) {
    ClientOptions o;
    o.mock = config.mock;
    o.mock_options.compress_word_threshold = config.compress_word_threshold;
    o.retry.max_attempts = config.max_attempts;
    o.retry.base_delay = std::chrono::milliseconds{config.retry_base_delay_ms};
    o.cache_dir = config.cache_dir.empty() ? config.output_dir / "cache" : config.cache_dir;
    o.template_version = std::string(prompts::kPromptTemplateVersion);
    o.concurrency = config.concurrency;
    if (student) {
        o.model = config.student_model;
        o.temperature = config.student_temperature;
        o.max_tokens = config.student_max_tokens;
        if (!config.mock) {
            o.endpoint = Endpoint{config.student_endpoint, config.student_api_key};
        }
    } else {
        o.model = config.teacher_model;
        o.temperature = config.teacher_temperature;
        o.max_tokens = config.teacher_max_tokens;
        if (!config.mock) {
            o.endpoint = Endpoint{config.teacher_endpoint, config.teacher_api_key};
        }
    }
    return o;
}

std::unique_ptr<BpeTokenizer> load_tokenizer(const Config& config, StageRun& run) {
    if (config.tokenizer.empty()) {
        throw Error(Errc::ConfigError, "config key \"tokenizer\": a tokenizer.json path is required for this stage");
    }
    run.add_input(config.tokenizer);
    return std::make_unique<BpeTokenizer>(BpeTokenizer::from_file(config.tokenizer));
}

json steps_json(const std::vector<SkillStep>& steps) {
    json out = json::array();
    for (const auto& s : steps) {
        out.push_back({{"index", s.index}, {"text", s.text}, {"skill", s.skill}});
    }
    return out;
}

Decomposition decomposition_from_json(const json& record) {
    Decomposition d;
    d.mode = parse_segmentation_mode(str_field(record, "mode"));
    d.source_hash = str_field(record, "source_hash");
    for (const auto& s : record.at("steps")) {
        d.steps.push_back(SkillStep{s.at("index").get<std::size_t>(), s.at("text").get<std::string>(),
                                    s.value("skill", std::string())});
    }
    return d;
}

json actions_json(const std::vector<StepAction>& actions) {
    json out = json::array();
    for (const auto& sa : actions) {
        json a = {{"index", sa.index}, {"action", std::string(action_label(sa.action))}};
        if (const auto* r = std::get_if<action::Rewrite>(&sa.action)) {
            a["text"] = r->new_text;
        } else if (const auto* m = std::get_if<action::Merge>(&sa.action)) {
            a["text"] = m->merged_text;
            a["absorbed"] = m->absorbed;
        }
        out.push_back(std::move(a));
    }
    return out;
}

struct CompletionRecord {
    std::string id;
    std::string question;
    std::optional<std::string> gold;
    std::string completion;
};

std::vector<CompletionRecord> read_completions(const fs::path& path) {
    std::vector<CompletionRecord> out;
    for (const auto& r : read_jsonl(path)) {
        out.push_back({str_field(r, "id"), str_field(r, "question"), opt_str_field(r, "gold"),
                       str_field(r, "completion")});
    }
    return out;
}

std::string error_code(const Error& e) {
    return std::string(to_string(e.code()));
}

// ---- stages -----------------------------------------------------------------

StageReport run_generate(const Config& config, StageRun& run) {
    if (config.inputs.empty()) {
        throw Error(Errc::ConfigError, "config key \"inputs\": generate needs a problems file");
    }
    run.add_input(config.inputs[0]);
    if (run.up_to_date()) {
        return run.load_skipped();
    }
    const auto problems = read_jsonl(config.inputs[0]);
    TeacherClient student(client_options(config, true));
    std::vector<std::optional<json>> out(problems.size());
    run_parallel(problems.size(), config.concurrency, [&](std::size_t i) {
        const auto& p = problems[i];
        std::string id;
        std::string question;
        std::optional<std::string> gold;
        try {
            id = str_field(p, "id");
            question = str_field(p, "question");
            gold = opt_str_field(p, "gold");
        } catch (const Error&) {
            run.drop("InvalidRecord");
            return;
        }
        try {
            const auto reply = student.ask(question, std::string(prompts::kStudentSystem));
            out[i] = json{{"id", id}, {"question", question}, {"gold", gold ? json(*gold) : json(nullptr)},
                          {"completion", reply.text}};
        } catch (const Error& e) {
            if (!is_client_error(e.code())) {
                throw;
            }
            run.hard_failure(id, e);
        }
    });
    std::vector<json> records;
    for (auto& r : out) {
        if (r) {
            records.push_back(std::move(*r));
        }
    }
    run.report.exported = records.size();
    run.report.backend_calls = student.backend_calls();
    run.write_output(artifacts::kCompletions, to_jsonl(records));
    return run.finish({{"student_model", config.student_model}, {"mock", config.mock}});
}

StageReport run_decompose(const Config& config, StageRun& run) {
    const auto completions_path = input_or(config, 0, artifacts::kCompletions);
    run.add_input(completions_path);
    if (run.up_to_date()) {
        return run.load_skipped();
    }
    const auto completions = read_completions(completions_path);
    TeacherClient teacher(client_options(config, false));
    std::vector<std::optional<json>> out(completions.size());
    run_parallel(completions.size(), config.concurrency, [&](std::size_t i) {
        const auto& c = completions[i];
        Response response;
        try {
            response = parse_response(c.completion);
        } catch (const Error& e) {
            run.drop(error_code(e));
            return;
        }
        try {
            auto outcome = decompose_trace(teacher, response.thinking, config.mode, config.fuzzy_threshold);
            if (!outcome.ok) {
                run.drop(outcome.drop_reason);
                return;
            }
            out[i] = json{
                {"id", c.id},
                {"mode", std::string(to_string(config.mode))},
                {"steps", steps_json(outcome.decomposition.steps)},
                {"coverage", outcome.report.coverage},
                {"coverage_ratio", outcome.report.coverage_ratio},
                {"source_hash", outcome.decomposition.source_hash},
            };
        } catch (const Error& e) {
            if (!is_client_error(e.code())) {
                throw;
            }
            run.hard_failure(c.id, e);
        }
    });
    std::vector<json> records;
    std::vector<Decomposition> all;
    for (auto& r : out) {
        if (r) {
            all.push_back(decomposition_from_json(*r));
            records.push_back(std::move(*r));
        }
    }
    run.report.exported = records.size();
    run.report.backend_calls = teacher.backend_calls();
    run.write_output(artifacts::kDecompositions, to_jsonl(records));
    json details = {{"mode", std::string(to_string(config.mode))}, {"fuzzy_threshold", config.fuzzy_threshold}};
    if (!all.empty()) {
        const auto stats = decomposition_stats(all);
        details["steps"] = {{"mean", stats.overall.mean},
                            {"median", stats.overall.median},
                            {"min", stats.overall.min},
                            {"max", stats.overall.max}};
    }
    return run.finish(std::move(details));
}

StageReport run_prune(const Config& config, StageRun& run) {
    const auto completions_path = input_or(config, 0, artifacts::kCompletions);
    const auto decompositions_path = input_or(config, 1, artifacts::kDecompositions);
    run.add_input(completions_path);
    run.add_input(decompositions_path);
    const auto tokenizer = load_tokenizer(config, run);
    if (run.up_to_date()) {
        return run.load_skipped();
    }
    std::unordered_map<std::string, CompletionRecord> by_id;
    for (auto& c : read_completions(completions_path)) {
        by_id.emplace(c.id, std::move(c));
    }
    const auto decompositions = read_jsonl(decompositions_path);
    TeacherClient teacher(client_options(config, false));
    std::vector<std::optional<json>> out(decompositions.size());
    std::vector<std::uint8_t> accepted(decompositions.size(), 0);
    run_parallel(decompositions.size(), config.concurrency, [&](std::size_t i) {
        const auto& record = decompositions[i];
        const auto id = str_field(record, "id");
        const auto it = by_id.find(id);
        if (it == by_id.end()) {
            run.drop("MissingCompletion");
            return;
        }
        const auto decomposition = decomposition_from_json(record);
        const auto original = parse_response(it->second.completion);
        std::optional<AnswerValue> gold;
        if (it->second.gold) {
            gold = AnswerValue::parse(*it->second.gold);
        }
        try {
            const auto outcome = prune_response(teacher, original, decomposition, *tokenizer, gold);
            json reasons = json::array();
            if (!outcome.parsed) {
                reasons.push_back(outcome.drop_reason);
            }
            for (auto r : outcome.decision.reasons) {
                reasons.push_back(std::string(to_string(r)));
            }
            out[i] = json{
                {"id", id},
                {"actions", actions_json(outcome.revision.actions)},
                {"revised_steps", outcome.revision.revised_steps},
                {"revised_trace", outcome.revision.revised_trace},
                {"revised_answer", outcome.revision.revised_answer},
                {"answer_backfilled", outcome.revision.answer_backfilled},
                {"accepted", outcome.revised.has_value()},
                {"reject_reasons", std::move(reasons)},
                {"steps_before", decomposition.steps.size()},
                {"steps_after", outcome.revision.revised_step_count()},
                {"token_before", outcome.decision.token_before},
                {"token_after", outcome.decision.token_after},
            };
            if (outcome.revised) {
                accepted[i] = 1;
            } else {
                run.drop(outcome.drop_reason);
            }
        } catch (const Error& e) {
            if (!is_client_error(e.code())) {
                throw;
            }
            run.hard_failure(id, e);
        }
    });
    std::vector<json> records;
    for (auto& r : out) {
        if (r) {
            records.push_back(std::move(*r));
        }
    }
    run.report.exported = static_cast<std::size_t>(std::count(accepted.begin(), accepted.end(), 1));
    run.report.backend_calls = teacher.backend_calls();
    run.write_output(artifacts::kRevisions, to_jsonl(records));
    return run.finish();
}

StageReport run_build_dataset(const Config& config, StageRun& run) {
    const auto completions_path = input_or(config, 0, artifacts::kCompletions);
    const auto revisions_path = input_or(config, 1, artifacts::kRevisions);
    run.add_input(completions_path);
    run.add_input(revisions_path);
    const auto tokenizer = load_tokenizer(config, run);
    if (run.up_to_date()) {
        return run.load_skipped();
    }
    std::unordered_map<std::string, CompletionRecord> by_id;
    for (auto& c : read_completions(completions_path)) {
        by_id.emplace(c.id, std::move(c));
    }
    std::map<std::string, std::size_t> drops;
    std::vector<DatasetEntry> entries;
    for (const auto& record : read_jsonl(revisions_path)) {
        const auto id = str_field(record, "id");
        if (!record.value("accepted", false)) {
            const auto& reasons = record.value("reject_reasons", json::array());
            drops[reasons.empty() ? std::string("Rejected") : reasons[0].get<std::string>()] += 1;
            continue;
        }
        const auto it = by_id.find(id);
        if (it == by_id.end()) {
            drops["MissingCompletion"] += 1;
            continue;
        }
        const auto original = parse_response(it->second.completion);
        Revision revision;
        revision.revised_trace = str_field(record, "revised_trace");
        revision.revised_answer = str_field(record, "revised_answer");
        const auto revised = assemble_revised_response(revision, original.answer);
        const Problem problem{id, it->second.question, it->second.gold};
        try {
            DatasetEntry e;
            e.example = build_training_example(problem, revised, original, *tokenizer);
            e.tokens_before = count_tokens(render_response(original.thinking, original.answer), *tokenizer);
            e.tokens_after = count_tokens(revised.raw, *tokenizer);
            entries.push_back(std::move(e));
        } catch (const Error& e) {
            if (e.code() != Errc::TokenInflation && e.code() != Errc::PreconditionViolation) {
                throw;
            }
            drops[error_code(e)] += 1;
        }
    }

    ExportOptions options;
    options.max_samples = config.max_samples;
    options.seed = config.seed;
    options.format = config.dataset_format;
    options.cutoff_len = config.cutoff_len;
    DatasetManifest manifest;
    const auto dataset_path = config.output_dir / artifacts::kDataset;
    if (entries.empty()) {
        manifest.drop_reasons = drops;
        for (const auto& [r, n] : drops) {
            manifest.ingested += n;
        }
        manifest.sha256 = write_file_atomic(dataset_path, "");
    } else {
        manifest = export_dataset(entries, dataset_path, options, *tokenizer, drops);
    }
    manifest.max_samples = options.max_samples;
    manifest.seed = options.seed;
    manifest.format = options.format == DatasetFormat::Messages ? "messages" : "instruction_output";
    run.report.drops = manifest.drop_reasons;
    run.report.exported = manifest.exported;
    // Record the dataset as an output so a modified file invalidates the stage.
    run.write_output(artifacts::kDataset, read_file(dataset_path));
    run.write_output(artifacts::kTrainingConfig, export_training_config(config.training_overrides));
    return run.finish({{"dataset", manifest.to_json()}});
}

std::vector<EvalRecord> read_scores(const fs::path& path) {
    std::vector<EvalRecord> out;
    for (const auto& r : read_jsonl(path)) {
        out.push_back({str_field(r, "id"), r.at("correct").get<bool>(), r.at("tokens").get<std::size_t>(),
                       str_field(r, "benchmark")});
    }
    return out;
}

json pass_json(const PassAt1& p) {
    return {{"correct", p.correct}, {"total", p.total}, {"fraction", p.fraction()}, {"value", p.value()}};
}

std::string format_double(double v) {
    std::ostringstream s;
    s.precision(10);
    s << v;
    return s.str();
}

StageReport run_score(const Config& config, StageRun& run) {
    const auto completions_path = input_or(config, 0, artifacts::kCompletions);
    run.add_input(completions_path);
    const auto tokenizer = load_tokenizer(config, run);
    if (run.up_to_date()) {
        return run.load_skipped();
    }
    std::vector<std::string> ids;
    std::vector<std::string> texts;
    std::vector<AnswerValue> golds;
    for (const auto& c : read_completions(completions_path)) {
        if (!c.gold) {
            run.drop("MissingGold");
            continue;
        }
        auto gold = AnswerValue::parse(*c.gold);
        if (!gold) {
            run.drop("UnparseableGold");
            continue;
        }
        ids.push_back(c.id);
        texts.push_back(c.completion);
        golds.push_back(std::move(*gold));
    }
    const auto tokens = kernels::parallel::count_tokens(texts, *tokenizer);
    const auto correct = kernels::parallel::score(texts, golds);

    std::vector<EvalRecord> records;
    std::vector<json> lines;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        records.push_back({ids[i], correct[i] != 0, tokens[i], config.benchmark});
        lines.push_back({{"id", ids[i]}, {"benchmark", config.benchmark}, {"correct", correct[i] != 0},
                         {"tokens", tokens[i]}});
    }
    run.report.exported = records.size();
    run.write_output(artifacts::kScores, to_jsonl(lines));

    json report = {{"benchmark", config.benchmark}, {"records", records.size()}};
    if (!records.empty()) {
        const CutoffPolicy policy{config.cutoff, config.cutoff_mode, config.max_generation_length};
        const auto cut = apply_cutoff(records, policy);
        report["pass_at_1"] = pass_json(pass_at_1(records));
        report["mean_tokens"] = mean_tokens(records);
        report["cutoff"] = {{"mode", std::string(to_string(policy.mode))},
                            {"threshold", policy.threshold},
                            {"affected", cut.affected},
                            {"mean_tokens", cut.mean_tokens},
                            {"pass_at_1", pass_json(cut.accuracy())}};

        std::string curve_csv = "budget,fraction\n";
        try {
            const auto grid = budget_grid(config.max_generation_length, config.capture_step);
            json curve = json::array();
            for (const auto& p : capture_curve(records, grid)) {
                curve.push_back({{"budget", p.budget}, {"fraction", p.fraction}});
                curve_csv += std::to_string(p.budget) + "," + format_double(p.fraction) + "\n";
            }
            report["capture_curve"] = std::move(curve);
        } catch (const Error& e) {
            if (e.code() != Errc::NoCorrectRecords) {
                throw;
            }
            report["capture_curve"] = nullptr;
        }
        run.write_output(artifacts::kCaptureCurve, curve_csv);

        const auto hist = normalized_histogram(records, config.max_generation_length, config.histogram_bins);
        std::string hist_csv = "bin_start,bin_end,count,density\n";
        for (std::size_t b = 0; b < hist.counts.size(); ++b) {
            hist_csv += format_double(hist.edges[b]) + "," + format_double(hist.edges[b + 1]) + "," +
                        std::to_string(hist.counts[b]) + "," + format_double(hist.density[b]) + "\n";
        }
        report["histogram"] = {{"bins", config.histogram_bins},
                               {"max_len", config.max_generation_length},
                               {"counts", hist.counts},
                               {"density", hist.density}};
        run.write_output(artifacts::kHistogram, hist_csv);
    }
    run.write_output(artifacts::kScoreReport, report.dump(2) + "\n");
    return run.finish({{"cutoff_mode", std::string(to_string(config.cutoff_mode))}, {"cutoff", config.cutoff}});
}

StageReport run_report(const Config& config, StageRun& run) {
    if (config.inputs.size() < 2) {
        throw Error(Errc::ConfigError, "config key \"inputs\": report needs the before and after score files");
    }
    run.add_input(config.inputs[0]);
    run.add_input(config.inputs[1]);
    if (run.up_to_date()) {
        return run.load_skipped();
    }
    const auto before = read_scores(config.inputs[0]);
    const auto after = read_scores(config.inputs[1]);
    if (before.empty() || after.empty()) {
        throw Error(Errc::EmptyCollection, "report needs records on both sides");
    }
    const CutoffPolicy policy{config.cutoff, config.cutoff_mode, config.max_generation_length};
    const auto cut_before = apply_cutoff(before, policy);
    const auto cut_after = apply_cutoff(after, policy);
    const auto counted = [](const CutoffResult& cut) {
        std::vector<EvalRecord> out;
        for (std::size_t i = 0; i < cut.records.size(); ++i) {
            if (cut.token_counted[i]) {
                out.push_back(cut.records[i]);
            }
        }
        return out;
    };
    // Same checks as compression_report, with the cutoff applied first.
    auto report = compression_report(counted(cut_before).empty() ? cut_before.records : counted(cut_before),
                                     counted(cut_after).empty() ? cut_after.records : counted(cut_after));
    report.pass_before = cut_before.accuracy();
    report.pass_after = cut_after.accuracy();

    const json doc = {
        {"benchmark", report.benchmark},
        {"mean_before", report.mean_before},
        {"mean_after", report.mean_after},
        {"reduction_percent", report.reduction},
        {"reduction", report.reduction_label()},
        {"pass_at_1_before", pass_json(report.pass_before)},
        {"pass_at_1_after", pass_json(report.pass_after)},
        {"cutoff", {{"mode", std::string(to_string(policy.mode))}, {"threshold", policy.threshold}}},
    };
    run.report.exported = before.size() + after.size();
    run.write_output(artifacts::kCompression, doc.dump(2) + "\n");
    run.write_output(artifacts::kCompressionCsv,
                     "benchmark,mean_before,mean_after,reduction,pass_before,pass_after\n" + report.benchmark + "," +
                         format_double(report.mean_before) + "," + format_double(report.mean_after) + "," +
                         report.reduction_label() + "," + report.pass_before.fraction() + "," +
                         report.pass_after.fraction() + "\n");
    return run.finish();
}

StageReport run_judge(const Config& config, StageRun& run) {
    const auto completions_path = input_or(config, 0, artifacts::kCompletions);
    run.add_input(completions_path);
    if (run.up_to_date()) {
        return run.load_skipped();
    }
    const auto completions = read_completions(completions_path);
    TeacherClient teacher(client_options(config, false));
    auto judge_options = client_options(config, false);
    if (!config.judge_model.empty()) {
        judge_options.model = config.judge_model;
    }
    TeacherClient judge(judge_options);

    std::vector<std::optional<JudgePair>> slots(completions.size());
    run_parallel(completions.size(), config.concurrency, [&](std::size_t i) {
        const auto& c = completions[i];
        try {
            const auto response = parse_response(c.completion);
            auto skill = decompose_trace(teacher, response.thinking, SegmentationMode::Skill, config.fuzzy_threshold);
            auto plain =
                decompose_trace(teacher, response.thinking, SegmentationMode::Default, config.fuzzy_threshold);
            if (!skill.ok || !plain.ok) {
                run.drop(skill.ok ? plain.drop_reason : skill.drop_reason);
                return;
            }
            slots[i] = JudgePair{c.id, response.thinking, std::move(skill.decomposition),
                                 std::move(plain.decomposition)};
        } catch (const Error& e) {
            if (is_client_error(e.code())) {
                run.hard_failure(c.id, e);
            } else {
                run.drop(error_code(e));
            }
        }
    });
    std::vector<JudgePair> pairs;
    for (auto& s : slots) {
        if (s) {
            pairs.push_back(std::move(*s));
        }
    }
    PairwiseOptions options;
    options.seed = config.seed;
    options.randomize_positions = config.randomize_positions;
    options.concurrency = config.concurrency;
    PairwiseResult result;
    result.method1_name = options.method1_name;
    result.method2_name = options.method2_name;
    if (!pairs.empty()) {
        result = run_pairwise(pairs, judge, options);
    }
    if (result.skipped > 0) {
        run.drop("JudgeSkipped", result.skipped);
    }
    run.report.exported = result.total - result.skipped;
    run.report.backend_calls = teacher.backend_calls() + judge.backend_calls();
    run.write_output(artifacts::kJudge, result.to_json().dump(2) + "\n");
    return run.finish({{"judge_model", judge_options.model}, {"randomize_positions", config.randomize_positions}});
}

}  // namespace

std::string_view to_string(Stage stage) noexcept {
    switch (stage) {
    case Stage::Generate:
        return "generate";
    case Stage::Decompose:
        return "decompose";
    case Stage::Prune:
        return "prune";
    case Stage::BuildDataset:
        return "build-dataset";
    case Stage::Score:
        return "score";
    case Stage::Judge:
        return "judge";
    case Stage::Report:
        return "report";
    }
    return "?";
}

Stage parse_stage(std::string_view text) {
    for (auto s : {Stage::Generate, Stage::Decompose, Stage::Prune, Stage::BuildDataset, Stage::Score, Stage::Judge,
                   Stage::Report}) {
        if (text == to_string(s)) {
            return s;
        }
    }
    throw Error(Errc::ConfigError, "unknown stage \"" + std::string(text) + "\"");
}

fs::path manifest_path(const Config& config, Stage stage) {
    return config.output_dir / (std::string(to_string(stage)) + ".manifest.json");
}

std::string StageReport::summary() const {
    std::string s = std::string(to_string(stage)) + (skipped ? ": up to date" : ": done") +
                    ", ingested=" + std::to_string(ingested) + " exported=" + std::to_string(exported);
    for (const auto& [reason, n] : drops) {
        s += " " + reason + "=" + std::to_string(n);
    }
    if (hard_failures > 0) {
        s += ", " + std::to_string(hard_failures) + " hard failure(s)";
    }
    return s;
}

StageReport run_stage(Stage stage, Config config, const EnvLookup& env) {
    validate_config(config);
    const bool teacher = stage == Stage::Decompose || stage == Stage::Prune || stage == Stage::Judge;
    resolve_secrets(config, env, teacher, stage == Stage::Generate);
    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec) {
        throw Error(Errc::IoError, "cannot create " + config.output_dir.string() + ": " + ec.message());
    }
    StageRun run(stage, config);
    switch (stage) {
    case Stage::Generate:
        return run_generate(config, run);
    case Stage::Decompose:
        return run_decompose(config, run);
    case Stage::Prune:
        return run_prune(config, run);
    case Stage::BuildDataset:
        return run_build_dataset(config, run);
    case Stage::Score:
        return run_score(config, run);
    case Stage::Judge:
        return run_judge(config, run);
    case Stage::Report:
        return run_report(config, run);
    }
    throw Error(Errc::ConfigError, "unhandled stage");
}

}  // namespace drp
