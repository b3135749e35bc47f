// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace drp {

/// One JSON value per non-blank line. Throws IoError (unreadable file) or
/// ParseError (bad line, reported with its line number).
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

/// Serializes records one per line.
std::string to_jsonl(const std::vector<nlohmann::json>& records);

/// Writes `content` through a temporary file and a rename, creating parent
/// directories. Returns the sha256 of the content. Throws IoError.
std::string write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace drp
