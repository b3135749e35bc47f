// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#include "drp/teacher_client.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include "drp/error.hpp"
#include "drp/hash.hpp"
#include "mock_backend.hpp"

namespace drp {

namespace {

using json = nlohmann::json;

struct ParsedUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

ParsedUrl parse_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(Errc::ConfigError, "endpoint URL needs a scheme: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    ParsedUrl out;
    out.origin = url.substr(0, path_start);
    out.path = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!out.path.empty() && out.path.back() == '/') {
        out.path.pop_back();
    }
    if (out.path.size() < 17 || out.path.compare(out.path.size() - 17, 17, "/chat/completions") != 0) {
        out.path += "/chat/completions";
    }
    return out;
}

std::chrono::milliseconds backoff_delay(const RetryPolicy& retry, int retry_number) {
    const double cap = std::min(static_cast<double>(retry.max_delay.count()),
                                static_cast<double>(retry.base_delay.count()) * std::pow(retry.factor, retry_number - 1));
    if (cap <= 0) {
        return std::chrono::milliseconds{0};
    }
    thread_local std::mt19937_64 rng{std::random_device{}()};
    std::uniform_real_distribution<double> jitter(0.0, cap);
    return std::chrono::milliseconds{static_cast<long long>(jitter(rng))};
}

ChatResult parse_reply(const std::string& body) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error& e) {
        throw Error(Errc::MalformedReply, std::string("reply is not JSON: ") + e.what());
    }
    const auto* content = [&]() -> const json* {
        if (!doc.is_object() || !doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
            return nullptr;
        }
        const auto& first = doc["choices"][0];
        if (!first.is_object() || !first.contains("message") || !first["message"].is_object()) {
            return nullptr;
        }
        const auto& message = first["message"];
        if (!message.contains("content") || !message["content"].is_string()) {
            return nullptr;
        }
        return &message["content"];
    }();
    if (content == nullptr) {
        throw Error(Errc::MalformedReply, "reply has no choices[0].message.content");
    }
    ChatResult result;
    result.text = content->get<std::string>();
    if (doc.contains("usage") && doc["usage"].is_object()) {
        const auto& usage = doc["usage"];
        result.usage = TokenUsage{usage.value("prompt_tokens", 0L), usage.value("completion_tokens", 0L)};
    }
    return result;
}

}  // namespace

std::string chat_request_body(const ChatRequest& request) {
    json messages = json::array();
    if (request.system_prompt) {
        messages.push_back({{"role", "system"}, {"content", *request.system_prompt}});
    }
    messages.push_back({{"role", "user"}, {"content", request.user_prompt}});
    json body = {
        {"model", request.model},
        {"messages", std::move(messages)},
        {"temperature", request.temperature},
        {"max_tokens", request.max_tokens},
    };
    return body.dump();
}

ChatResult complete(const ChatRequest& request, const Endpoint& endpoint, const RetryPolicy& retry) {
    require(!request.user_prompt.empty(), "complete: user_prompt must be non-empty");
    require(request.temperature >= 0.0 && request.temperature <= 2.0, "complete: temperature must be in [0, 2]");
    require(request.max_tokens > 0, "complete: max_tokens must be positive");
    require(retry.max_attempts >= 1, "complete: max_attempts must be >= 1");

    const auto url = parse_url(endpoint.url);
    httplib::Client client(url.origin);
    client.set_connection_timeout(std::min<std::chrono::seconds>(endpoint.timeout, std::chrono::seconds{30}));
    client.set_read_timeout(endpoint.timeout);
    client.set_write_timeout(endpoint.timeout);
    httplib::Headers headers;
    if (!endpoint.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + endpoint.api_key);
    }
    const std::string body = chat_request_body(request);

    std::string last_failure;
    bool last_was_rate_limit = false;
    for (int attempt = 1; attempt <= retry.max_attempts; ++attempt) {
        if (attempt > 1) {
            std::this_thread::sleep_for(backoff_delay(retry, attempt - 1));
        }
        auto res = client.Post(url.path, headers, body, "application/json");
        if (!res) {
            last_failure = "transport error: " + httplib::to_string(res.error());
            last_was_rate_limit = false;
            continue;
        }
        const int status = res->status;
        if (status == 401 || status == 403) {
            throw Error(Errc::AuthError, "endpoint rejected credentials (HTTP " + std::to_string(status) + ")");
        }
        if (status == 429 || status >= 500) {
            last_failure = "HTTP " + std::to_string(status);
            last_was_rate_limit = status == 429;
            continue;
        }
        if (status < 200 || status >= 300) {
            throw Error(Errc::HttpError, "HTTP " + std::to_string(status) + ": " + res->body.substr(0, 200));
        }
        auto result = parse_reply(res->body);
        result.attempts = attempt;
        return result;
    }
    const std::string summary =
        "gave up after " + std::to_string(retry.max_attempts) + " attempts, last failure: " + last_failure;
    throw Error(last_was_rate_limit ? Errc::RateLimited : Errc::NetworkError, summary);
}

ChatResult mock_complete(const ChatRequest& request, const MockOptions& options) {
    require(!request.user_prompt.empty(), "mock_complete: user_prompt must be non-empty");
    ChatResult result;
    result.text = mock::reply(request, options);
    return result;
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) {
        throw Error(Errc::IoError, "cannot create cache directory " + dir_.string() + ": " + ec.message());
    }
}

std::string ResponseCache::key_for(const ChatRequest& request, std::string_view template_version) {
    const json material = {
        request.model,
        request.temperature,
        request.system_prompt ? json(*request.system_prompt) : json(nullptr),
        request.user_prompt,
        std::string(template_version),
    };
    return sha256_hex(material.dump());
}

std::filesystem::path ResponseCache::entry_path(const std::string& key) const {
    return dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
    const auto path = entry_path(key);
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return std::nullopt;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    in.close();
    try {
        const auto doc = json::parse(buffer.str());
        const auto text = doc.at("text").get<std::string>();
        if (doc.at("key").get<std::string>() == key && doc.at("sha256").get<std::string>() == sha256_hex(text)) {
            return text;
        }
    } catch (const json::exception&) {
        // fall through to eviction
    }
    std::error_code ec;
    std::filesystem::remove(path, ec);
    ++evictions_;
    return std::nullopt;
}

void ResponseCache::put(const std::string& key, std::string_view text) const {
    const auto path = entry_path(key);
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
        throw Error(Errc::IoError, "cannot create " + path.parent_path().string() + ": " + ec.message());
    }
    const json doc = {{"key", key}, {"text", std::string(text)}, {"sha256", sha256_hex(text)}};

    static std::atomic<unsigned long> counter{0};
    std::ostringstream tmp_name;
    tmp_name << key << ".tmp." << std::this_thread::get_id() << '.' << counter.fetch_add(1);
    const auto tmp = path.parent_path() / tmp_name.str();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << doc.dump();
        if (!out) {
            throw Error(Errc::IoError, "cannot write cache entry " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(Errc::IoError, "cannot publish cache entry " + path.string());
    }
}

ChatResult cached_complete(const ChatRequest& request, const ResponseCache& cache, std::string_view template_version,
                           const std::function<ChatResult(const ChatRequest&)>& fetch) {
    const auto key = ResponseCache::key_for(request, template_version);
    if (auto text = cache.get(key)) {
        ChatResult hit;
        hit.text = std::move(*text);
        hit.cache_hit = true;
        return hit;
    }
    auto result = fetch(request);
    cache.put(key, result.text);
    return result;
}

TeacherClient::TeacherClient(ClientOptions options) : options_(std::move(options)) {
    if (!options_.mock && !options_.endpoint) {
        throw Error(Errc::ConfigError, "teacher client needs an endpoint or the mock backend");
    }
    require(options_.concurrency >= 1, "TeacherClient: concurrency must be >= 1");
    if (options_.cache_dir) {
        cache_ = std::make_unique<ResponseCache>(*options_.cache_dir);
    }
    slots_ = std::make_unique<std::counting_semaphore<>>(static_cast<std::ptrdiff_t>(options_.concurrency));
}

ChatResult TeacherClient::fetch(const ChatRequest& request) {
    slots_->acquire();
    struct Release {
        std::counting_semaphore<>* s;
        ~Release() { s->release(); }
    } release{slots_.get()};
    ++backend_calls_;
    if (options_.mock) {
        return mock_complete(request, options_.mock_options);
    }
    return drp::complete(request, *options_.endpoint, options_.retry);
}

ChatResult TeacherClient::complete(const ChatRequest& request) {
    if (!cache_) {
        return fetch(request);
    }
    auto result =
        cached_complete(request, *cache_, options_.template_version, [this](const ChatRequest& r) { return fetch(r); });
    if (result.cache_hit) {
        ++cache_hits_;
    }
    return result;
}

ChatResult TeacherClient::ask(std::string user_prompt, std::optional<std::string> system_prompt) {
    ChatRequest request;
    request.model = options_.model;
    request.temperature = options_.temperature;
    request.max_tokens = options_.max_tokens;
    request.user_prompt = std::move(user_prompt);
    request.system_prompt = std::move(system_prompt);
    return complete(request);
}

}  // namespace drp
