#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "phishgraph/core.hpp"

namespace phishgraph::io {

/// Non-empty, whitespace-trimmed lines; '#' starts a comment line.
std::vector<std::string> read_lines(const std::filesystem::path& path);

std::unordered_set<std::string> read_set(const std::filesystem::path& path);

/// RFC 4180-style field splitting (quoted fields may contain commas and "").
std::vector<std::string> split_csv_line(std::string_view line);
std::string csv_field(std::string_view text);

/// Reads either plain text (one URL per line) or CSV with a url,label[,timestamp]
/// header. Rows with an unrecognised label throw Error(MalformedRecord).
std::vector<UrlRecord> read_url_records(const std::filesystem::path& path);
void write_url_records(const std::vector<UrlRecord>& records, const std::filesystem::path& path);

std::string trim(std::string_view text);

/// Opens for writing, creating parent directories; throws Error(Io) with the path.
std::ofstream open_output(const std::filesystem::path& path);
std::ifstream open_input(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

/// Lowercase hex SHA-256 of the file contents.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view data);

}  // namespace phishgraph::io
