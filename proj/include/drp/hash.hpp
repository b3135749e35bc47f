// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>

namespace drp {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

/// SHA-256 of a file's bytes; throws Error(IoError) if unreadable.
std::string sha256_file(const std::string& path);

}  // namespace drp
