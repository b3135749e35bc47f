// Copyright 2026 The DRP Authors
// SPDX-License-Identifier: Apache-2.0

#include "drp/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "drp/error.hpp"
#include "drp/hash.hpp"
#include "drp/text.hpp"

namespace drp {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::IoError, "cannot read " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path) {
    const std::string content = read_file(path);
    std::vector<nlohmann::json> out;
    std::size_t start = 0;
    std::size_t line_no = 0;
    while (start < content.size()) {
        auto end = content.find('\n', start);
        if (end == std::string::npos) {
            end = content.size();
        }
        ++line_no;
        const auto line = trim(std::string_view(content).substr(start, end - start));
        start = end + 1;
        if (line.empty()) {
            continue;
        }
        try {
            out.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(Errc::ParseError, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::string to_jsonl(const std::vector<nlohmann::json>& records) {
    std::string out;
    for (const auto& r : records) {
        out += r.dump();
        out += '\n';
    }
    return out;
}

std::string write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    std::error_code ec;
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) {
            throw Error(Errc::IoError, "cannot create " + path.parent_path().string() + ": " + ec.message());
        }
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            throw Error(Errc::IoError, "cannot write " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw Error(Errc::IoError, "cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
    return sha256_hex(content);
}

}  // namespace drp
