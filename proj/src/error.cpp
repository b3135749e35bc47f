// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#include "drp/error.hpp"

namespace drp {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
    case Errc::PreconditionViolation: return "PreconditionViolation";
    case Errc::MissingThinkBlock: return "MissingThinkBlock";
    case Errc::EmptyTrace: return "EmptyTrace";
    case Errc::UnclosedThinkBlock: return "UnclosedThinkBlock";
    case Errc::NoAnswerFound: return "NoAnswerFound";
    case Errc::AuthError: return "AuthError";
    case Errc::RateLimited: return "RateLimited";
    case Errc::MalformedReply: return "MalformedReply";
    case Errc::NetworkError: return "NetworkError";
    case Errc::HttpError: return "HttpError";
    case Errc::CacheCorrupt: return "CacheCorrupt";
    case Errc::UnrecognizedPrompt: return "UnrecognizedPrompt";
    case Errc::ParseError: return "ParseError";
    case Errc::NonConsecutiveIndices: return "NonConsecutiveIndices";
    case Errc::MissingSkillLabel: return "MissingSkillLabel";
    case Errc::EmptyCollection: return "EmptyCollection";
    case Errc::UnknownAction: return "UnknownAction";
    case Errc::DuplicateStepIndex: return "DuplicateStepIndex";
    case Errc::MissingStepAction: return "MissingStepAction";
    case Errc::StepIndexOutOfRange: return "StepIndexOutOfRange";
    case Errc::InvalidMergeTarget: return "InvalidMergeTarget";
    case Errc::MissingSynthesis: return "MissingSynthesis";
    case Errc::TokenInflation: return "TokenInflation";
    case Errc::IoError: return "IoError";
    case Errc::InvalidOverrideKey: return "InvalidOverrideKey";
    case Errc::TokenizerLoadError: return "TokenizerLoadError";
    case Errc::NoCorrectRecords: return "NoCorrectRecords";
    case Errc::BenchmarkMismatch: return "BenchmarkMismatch";
    case Errc::TraceMismatch: return "TraceMismatch";
    case Errc::UnparseableVerdict: return "UnparseableVerdict";
    case Errc::ConfigError: return "ConfigError";
    case Errc::MissingUpstreamArtifact: return "MissingUpstreamArtifact";
    }
    return "Unknown";
}

}  // namespace drp
