// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "drp/teacher_client.hpp"

namespace drp::mock {

/// Deterministic reply for a recognized prompt family. Throws UnrecognizedPrompt.
std::string reply(const ChatRequest& request, const MockOptions& options);

}  // namespace drp::mock
