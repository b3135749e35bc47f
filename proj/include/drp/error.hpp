// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace drp {

enum class Errc {
    PreconditionViolation,
    // trace_model
    MissingThinkBlock,
    EmptyTrace,
    UnclosedThinkBlock,
    NoAnswerFound,
    // teacher_client
    AuthError,
    RateLimited,
    MalformedReply,
    NetworkError,
    HttpError,
    CacheCorrupt,
    UnrecognizedPrompt,
    // decomposer
    ParseError,
    NonConsecutiveIndices,
    MissingSkillLabel,
    EmptyCollection,
    // pruner
    UnknownAction,
    DuplicateStepIndex,
    MissingStepAction,
    StepIndexOutOfRange,
    InvalidMergeTarget,
    MissingSynthesis,
    // dataset_builder
    TokenInflation,
    IoError,
    InvalidOverrideKey,
    // metrics
    TokenizerLoadError,
    NoCorrectRecords,
    BenchmarkMismatch,
    // judge_eval
    TraceMismatch,
    UnparseableVerdict,
    // cli
    ConfigError,
    MissingUpstreamArtifact,
};

std::string_view to_string(Errc code) noexcept;

/// Single exception type for the library; `code()` identifies the failure class.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

inline void require(bool condition, const char* what) {
    if (!condition) {
        throw Error(Errc::PreconditionViolation, what);
    }
}

}  // namespace drp
