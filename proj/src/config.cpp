// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#include "drp/config.hpp"

#include <charconv>
#include <cstdlib>

#include "drp/error.hpp"
#include "drp/jsonl.hpp"
#include "drp/text.hpp"

namespace drp {

namespace {

using json = nlohmann::json;

[[noreturn]] void bad_value(const std::string& key, const std::string& why) {
    throw Error(Errc::ConfigError, "config key \"" + key + "\": " + why);
}

std::string as_string(const std::string& key, const json& v) {
    if (!v.is_string()) {
        bad_value(key, "expected a string");
    }
    return v.get<std::string>();
}

bool as_bool(const std::string& key, const json& v) {
    if (v.is_boolean()) {
        return v.get<bool>();
    }
    if (v.is_string()) {
        const auto s = to_lower_ascii(trim(v.get<std::string>()));
        if (s == "true" || s == "1" || s == "yes") {
            return true;
        }
        if (s == "false" || s == "0" || s == "no") {
            return false;
        }
    }
    bad_value(key, "expected a boolean");
}

template <typename T>
T as_integer(const std::string& key, const json& v) {
    if (v.is_number_integer()) {
        if (v.is_number_unsigned() || v.get<long long>() >= 0 || std::is_signed_v<T>) {
            return v.get<T>();
        }
        bad_value(key, "must not be negative");
    }
    if (v.is_string()) {
        const auto s = trim(v.get<std::string>());
        T out{};
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        if (ec == std::errc() && ptr == s.data() + s.size() && !s.empty()) {
            return out;
        }
    }
    bad_value(key, "expected a non-negative integer");
}

double as_double(const std::string& key, const json& v) {
    if (v.is_number()) {
        return v.get<double>();
    }
    if (v.is_string()) {
        const std::string s(trim(v.get<std::string>()));
        char* end = nullptr;
        const double d = std::strtod(s.c_str(), &end);
        if (!s.empty() && end == s.c_str() + s.size()) {
            return d;
        }
    }
    bad_value(key, "expected a number");
}

std::vector<std::string> as_list(const std::string& key, const json& v) {
    std::vector<std::string> out;
    if (v.is_array()) {
        for (const auto& item : v) {
            out.push_back(as_string(key, item));
        }
        return out;
    }
    const auto s = as_string(key, v);
    std::size_t start = 0;
    while (start <= s.size()) {
        auto end = s.find(',', start);
        if (end == std::string::npos) {
            end = s.size();
        }
        const auto item = trim(std::string_view(s).substr(start, end - start));
        if (!item.empty()) {
            out.emplace_back(item);
        }
        start = end + 1;
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> as_overrides(const std::string& key, const json& v) {
    std::vector<std::pair<std::string, std::string>> out;
    if (v.is_object()) {
        for (const auto& [k, val] : v.items()) {
            out.emplace_back(k, val.is_string() ? val.get<std::string>() : val.dump());
        }
        return out;
    }
    for (const auto& item : as_list(key, v)) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            bad_value(key, "expected key=value pairs");
        }
        out.emplace_back(std::string(trim(std::string_view(item).substr(0, eq))),
                         std::string(trim(std::string_view(item).substr(eq + 1))));
    }
    return out;
}

struct Field {
    const char* name;
    void (*set)(Config&, const std::string&, const json&);
    json (*get)(const Config&);
};

#define DRP_STRING_FIELD(member)                                                                     \
    Field {                                                                                          \
        #member, [](Config& c, const std::string& k, const json& v) { c.member = as_string(k, v); }, \
            [](const Config& c) { return json(c.member); }                                           \
    }
#define DRP_PATH_FIELD(member)                                                                       \
    Field {                                                                                          \
        #member, [](Config& c, const std::string& k, const json& v) { c.member = as_string(k, v); }, \
            [](const Config& c) { return json(c.member.string()); }                                  \
    }
#define DRP_BOOL_FIELD(member)                                                                     \
    Field {                                                                                        \
        #member, [](Config& c, const std::string& k, const json& v) { c.member = as_bool(k, v); }, \
            [](const Config& c) { return json(c.member); }                                         \
    }
#define DRP_INT_FIELD(member)                                                                      \
    Field {                                                                                        \
        #member,                                                                                   \
            [](Config& c, const std::string& k, const json& v) {                                   \
                c.member = as_integer<decltype(c.member)>(k, v);                                   \
            },                                                                                     \
            [](const Config& c) { return json(c.member); }                                         \
    }
#define DRP_DOUBLE_FIELD(member)                                                                     \
    Field {                                                                                          \
        #member, [](Config& c, const std::string& k, const json& v) { c.member = as_double(k, v); }, \
            [](const Config& c) { return json(c.member); }                                           \
    }

const std::vector<Field>& fields() {
    static const std::vector<Field> kFields = {
        DRP_PATH_FIELD(output_dir),
        Field{"inputs", [](Config& c, const std::string& k, const json& v) { c.inputs = as_list(k, v); },
              [](const Config& c) { return json(c.inputs); }},
        DRP_STRING_FIELD(tokenizer),
        DRP_PATH_FIELD(cache_dir),
        DRP_BOOL_FIELD(mock),
        DRP_BOOL_FIELD(force),
        DRP_STRING_FIELD(teacher_endpoint),
        DRP_STRING_FIELD(teacher_model),
        DRP_STRING_FIELD(teacher_api_key_env),
        DRP_DOUBLE_FIELD(teacher_temperature),
        DRP_INT_FIELD(teacher_max_tokens),
        DRP_STRING_FIELD(student_endpoint),
        DRP_STRING_FIELD(student_model),
        DRP_STRING_FIELD(student_api_key_env),
        DRP_DOUBLE_FIELD(student_temperature),
        DRP_INT_FIELD(student_max_tokens),
        DRP_STRING_FIELD(judge_model),
        DRP_BOOL_FIELD(randomize_positions),
        Field{"mode",
              [](Config& c, const std::string& k, const json& v) {
                  try {
                      c.mode = parse_segmentation_mode(as_string(k, v));
                  } catch (const Error&) {
                      bad_value(k, "expected skill or default");
                  }
              },
              [](const Config& c) { return json(std::string(to_string(c.mode))); }},
        DRP_DOUBLE_FIELD(fuzzy_threshold),
        DRP_INT_FIELD(compress_word_threshold),
        DRP_INT_FIELD(cutoff),
        Field{"cutoff_mode",
              [](Config& c, const std::string& k, const json& v) {
                  try {
                      c.cutoff_mode = parse_cutoff_mode(as_string(k, v));
                  } catch (const Error&) {
                      bad_value(k, "expected truncate or clip");
                  }
              },
              [](const Config& c) { return json(std::string(to_string(c.cutoff_mode))); }},
        DRP_INT_FIELD(max_generation_length),
        DRP_INT_FIELD(histogram_bins),
        DRP_INT_FIELD(capture_step),
        DRP_STRING_FIELD(benchmark),
        DRP_INT_FIELD(max_samples),
        DRP_INT_FIELD(seed),
        DRP_INT_FIELD(concurrency),
        Field{"dataset_format",
              [](Config& c, const std::string& k, const json& v) {
                  const auto s = as_string(k, v);
                  if (s == "instruction_output") {
                      c.dataset_format = DatasetFormat::InstructionOutput;
                  } else if (s == "messages") {
                      c.dataset_format = DatasetFormat::Messages;
                  } else {
                      bad_value(k, "expected instruction_output or messages");
                  }
              },
              [](const Config& c) {
                  return json(c.dataset_format == DatasetFormat::Messages ? "messages" : "instruction_output");
              }},
        DRP_INT_FIELD(cutoff_len),
        Field{"training_overrides",
              [](Config& c, const std::string& k, const json& v) { c.training_overrides = as_overrides(k, v); },
              [](const Config& c) {
                  json o = json::object();
                  for (const auto& [k, v] : c.training_overrides) {
                      o[k] = v;
                  }
                  return o;
              }},
        DRP_INT_FIELD(max_attempts),
        DRP_INT_FIELD(retry_base_delay_ms),
    };
    return kFields;
}

#undef DRP_STRING_FIELD
#undef DRP_PATH_FIELD
#undef DRP_BOOL_FIELD
#undef DRP_INT_FIELD
#undef DRP_DOUBLE_FIELD

const Field* find_field(std::string_view name) {
    for (const auto& f : fields()) {
        if (name == f.name) {
            return &f;
        }
    }
    return nullptr;
}

std::string env_name(std::string_view key) {
    std::string out = "DRP_";
    for (char c : key) {
        out += (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c;
    }
    return out;
}

}  // namespace

json Config::to_json() const {
    json out = json::object();
    for (const auto& f : fields()) {
        out[f.name] = f.get(*this);
    }
    return out;
}

EnvLookup process_env() {
    return [](const std::string& name) -> std::optional<std::string> {
        const char* v = std::getenv(name.c_str());
        if (v == nullptr) {
            return std::nullopt;
        }
        return std::string(v);
    };
}

void apply_settings(Config& config, const json& settings) {
    if (!settings.is_object()) {
        throw Error(Errc::ConfigError, "settings must be a JSON object");
    }
    for (const auto& [key, value] : settings.items()) {
        const auto* field = find_field(key);
        if (field == nullptr) {
            throw Error(Errc::ConfigError, "unknown config key \"" + key + "\"");
        }
        field->set(config, key, value);
    }
}

Config load_config(const std::optional<std::filesystem::path>& path, const EnvLookup& env, const json& flags) {
    Config config;
    if (path) {
        json file;
        try {
            file = json::parse(read_file(*path));
        } catch (const json::parse_error& e) {
            throw Error(Errc::ConfigError, path->string() + ": " + e.what());
        } catch (const Error& e) {
            throw Error(Errc::ConfigError, e.what());
        }
        apply_settings(config, file);
    }
    json from_env = json::object();
    for (const auto& f : fields()) {
        if (auto v = env(env_name(f.name))) {
            from_env[f.name] = *v;
        }
    }
    apply_settings(config, from_env);
    apply_settings(config, flags);
    validate_config(config);
    return config;
}

void validate_config(const Config& c) {
    const auto fail = [](const std::string& key, const std::string& why) {
        throw Error(Errc::ConfigError, "config key \"" + key + "\": " + why);
    };
    if (c.output_dir.empty()) {
        fail("output_dir", "must be set");
    }
    if (c.teacher_temperature < 0.0 || c.teacher_temperature > 2.0) {
        fail("teacher_temperature", "must be in [0, 2]");
    }
    if (c.student_temperature < 0.0 || c.student_temperature > 2.0) {
        fail("student_temperature", "must be in [0, 2]");
    }
    if (c.teacher_max_tokens <= 0) {
        fail("teacher_max_tokens", "must be positive");
    }
    if (c.student_max_tokens <= 0) {
        fail("student_max_tokens", "must be positive");
    }
    if (c.cutoff == 0 || c.cutoff > c.max_generation_length) {
        fail("cutoff", "must be in [1, max_generation_length]");
    }
    if (c.histogram_bins < 2) {
        fail("histogram_bins", "must be >= 2");
    }
    if (c.capture_step == 0) {
        fail("capture_step", "must be positive");
    }
    if (c.max_samples == 0) {
        fail("max_samples", "must be positive");
    }
    if (c.concurrency == 0) {
        fail("concurrency", "must be positive");
    }
    if (c.fuzzy_threshold < 0.0 || c.fuzzy_threshold > 1.0) {
        fail("fuzzy_threshold", "must be in [0, 1]");
    }
    if (c.max_attempts < 1) {
        fail("max_attempts", "must be >= 1");
    }
}

void resolve_secrets(Config& config, const EnvLookup& env, bool needs_teacher, bool needs_student) {
    if (config.mock) {
        return;
    }
    const auto resolve = [&](bool needed, const std::string& endpoint, const char* endpoint_key,
                             const std::string& var, std::string& out) {
        if (!needed) {
            return;
        }
        if (endpoint.empty()) {
            throw Error(Errc::ConfigError, std::string("config key \"") + endpoint_key +
                                               "\": a live endpoint is required unless --mock is set");
        }
        if (var.empty()) {
            return;
        }
        auto value = env(var);
        if (!value || value->empty()) {
            throw Error(Errc::ConfigError, "environment variable " + var + " (API key for " + endpoint_key +
                                               ") is not set");
        }
        out = *value;
    };
    resolve(needs_teacher, config.teacher_endpoint, "teacher_endpoint", config.teacher_api_key_env,
            config.teacher_api_key);
    resolve(needs_student, config.student_endpoint, "student_endpoint", config.student_api_key_env,
            config.student_api_key);
}

}  // namespace drp
