#include "phishgraph/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <sstream>

namespace phishgraph::io {

std::string trim(std::string_view text) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  return std::string(text);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    lines.push_back(std::move(t));
  }
  return lines;
}

std::unordered_set<std::string> read_set(const std::filesystem::path& path) {
  std::unordered_set<std::string> out;
  for (auto& line : read_lines(path)) {
    std::string lowered;
    for (char c : line) lowered += static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
    out.insert(std::move(lowered));
  }
  return out;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<UrlRecord> read_url_records(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  std::vector<UrlRecord> records;
  if (lines.empty()) return records;

  const auto header = split_csv_line(lines.front());
  const bool is_csv = !header.empty() && trim(header.front()) == "url";
  if (!is_csv) {
    for (const auto& line : lines) records.push_back(UrlRecord{line, TruthLabel::Unknown, {}});
    return records;
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto fields = split_csv_line(lines[i]);
    UrlRecord record;
    record.url = trim(fields[0]);
    if (fields.size() > 1) {
      auto label = parse_truth_label(trim(fields[1]));
      if (!label) {
        throw Error(ErrorCode::MalformedRecord,
                    path.string() + ":" + std::to_string(i + 1) + ": bad label '" + fields[1] + "'");
      }
      record.label = *label;
    }
    if (fields.size() > 2 && !trim(fields[2]).empty()) record.timestamp = trim(fields[2]);
    records.push_back(std::move(record));
  }
  return records;
}

void write_url_records(const std::vector<UrlRecord>& records, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "url,label,timestamp\n";
  for (const auto& r : records) {
    out << csv_field(r.url) << ',' << (r.label == TruthLabel::Unknown ? "unknown" : to_string(r.label))
        << ',' << csv_field(r.timestamp.value_or("")) << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing '" + path.string() + "'");
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::Io, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

}  // namespace phishgraph::io
