// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>

namespace drp {

struct ChatRequest {
    std::string model;
    std::optional<std::string> system_prompt;
    std::string user_prompt;
    double temperature = 0.0;  // [0, 2]
    int max_tokens = 4096;
};

struct TokenUsage {
    long prompt_tokens = 0;
    long completion_tokens = 0;
};

struct ChatResult {
    std::string text;
    std::optional<TokenUsage> usage;
    bool cache_hit = false;
    int attempts = 1;
};

/// Exponential backoff with full jitter: before retry k (1-based) sleep a
/// uniform draw from [0, min(max_delay, base_delay * factor^(k-1))].
struct RetryPolicy {
    int max_attempts = 5;
    std::chrono::milliseconds base_delay{1000};
    double factor = 2.0;
    std::chrono::milliseconds max_delay{60000};
};

struct Endpoint {
    /// Full chat-completions URL, or a base URL to which
    /// "/chat/completions" is appended.
    std::string url;
    std::string api_key;  // empty: no Authorization header
    std::chrono::seconds timeout{300};
};

/// One POST per attempt against an OpenAI-compatible chat-completions
/// endpoint. Retries 429, 5xx and transport failures; 401/403 fail at once.
/// Throws AuthError, RateLimited, MalformedReply, NetworkError, HttpError.
ChatResult complete(const ChatRequest& request, const Endpoint& endpoint, const RetryPolicy& retry = {});

/// JSON body sent for a request (exposed for tests).
std::string chat_request_body(const ChatRequest& request);

struct MockOptions {
    /// Steps with more words than this are rewritten (SINGLE-STEP COMPRESS).
    std::size_t compress_word_threshold = 20;
};

/// Deterministic rule-based stand-in for teacher and student models.
/// Recognizes the decomposition, revision, judge and student prompt families;
/// throws UnrecognizedPrompt otherwise.
ChatResult mock_complete(const ChatRequest& request, const MockOptions& options = {});

/// Content-addressed store of completion texts. Each entry is written to a
/// temporary file and renamed into place, so concurrent readers never see a
/// partial entry.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    static std::string key_for(const ChatRequest& request, std::string_view template_version);

    /// Entries failing their checksum are evicted and reported as a miss.
    std::optional<std::string> get(const std::string& key) const;
    void put(const std::string& key, std::string_view text) const;

    std::filesystem::path entry_path(const std::string& key) const;
    std::size_t evictions() const noexcept { return evictions_.load(); }

private:
    std::filesystem::path dir_;
    mutable std::atomic<std::size_t> evictions_{0};
};

/// Looks up `request` in `cache`; on a miss calls `fetch` and stores the text.
ChatResult cached_complete(const ChatRequest& request, const ResponseCache& cache, std::string_view template_version,
                           const std::function<ChatResult(const ChatRequest&)>& fetch);

struct ClientOptions {
    std::optional<Endpoint> endpoint;  // required unless mock
    bool mock = false;
    MockOptions mock_options;
    RetryPolicy retry;
    std::optional<std::filesystem::path> cache_dir;
    std::string template_version = "drp-templates-v1";
    std::size_t concurrency = 8;
    std::string model = "gpt-4o";
    double temperature = 0.0;
    int max_tokens = 4096;
};

/// Shareable client: cache lookup, then a backend call under a bound of
/// `concurrency` in-flight requests.
class TeacherClient {
public:
    explicit TeacherClient(ClientOptions options);

    ChatResult complete(const ChatRequest& request);
    /// complete() with model, temperature and max_tokens taken from the options.
    ChatResult ask(std::string user_prompt, std::optional<std::string> system_prompt = std::nullopt);

    const ClientOptions& options() const noexcept { return options_; }
    /// Backend invocations (HTTP requests or mock calls), excluding cache hits.
    std::size_t backend_calls() const noexcept { return backend_calls_.load(); }
    std::size_t cache_hits() const noexcept { return cache_hits_.load(); }

private:
    ChatResult fetch(const ChatRequest& request);

    ClientOptions options_;
    std::unique_ptr<ResponseCache> cache_;
    std::unique_ptr<std::counting_semaphore<>> slots_;
    std::atomic<std::size_t> backend_calls_{0};
    std::atomic<std::size_t> cache_hits_{0};
};

}  // namespace drp
