#include "phishgraph/url_lexer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "phishgraph/core.hpp"

namespace phishgraph {
namespace {

constexpr std::string_view kUserInfoSeparators = ":@/";
constexpr std::string_view kHostSeparators = ".";
constexpr std::string_view kPathSeparators = "/.!&,#$%;";
constexpr std::string_view kQuerySeparators = "=&";

bool is_scheme(std::string_view text) {
  if (text.empty() || text.front() < 'a' || text.front() > 'z') return false;
  return std::all_of(text.begin(), text.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '+' || c == '-' || c == '.';
  });
}

// Canonical decimal port: digits only, no leading zero, at most 65535.
std::optional<std::uint16_t> parse_port(std::string_view text) {
  if (text.empty() || text.size() > 5) return std::nullopt;
  if (!std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return std::nullopt;
  }
  if (text.size() > 1 && text.front() == '0') return std::nullopt;
  unsigned long value = std::stoul(std::string(text));
  if (value > 65535) return std::nullopt;
  return static_cast<std::uint16_t>(value);
}

void split_host_port(std::string_view hostport, UrlParts& parts) {
  std::size_t colon = std::string_view::npos;
  if (!hostport.empty() && hostport.front() == '[') {
    std::size_t close = hostport.find(']');
    if (close != std::string_view::npos && close + 1 < hostport.size() &&
        hostport[close + 1] == ':') {
      colon = close + 1;
    }
  } else {
    colon = hostport.rfind(':');
  }
  if (colon != std::string_view::npos) {
    if (auto port = parse_port(hostport.substr(colon + 1))) {
      parts.port = port;
      parts.host = std::string(hostport.substr(0, colon));
      return;
    }
  }
  parts.host = std::string(hostport);
}

}  // namespace

std::string to_lower_ascii(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::optional<std::string> UrlParts::userinfo() const {
  if (!username) return std::nullopt;
  return password ? *username + ":" + *password : *username;
}

UrlParts parse_url(std::string_view raw) {
  const std::string lowered = to_lower_ascii(raw);
  std::string_view rest = lowered;
  UrlParts parts;

  if (std::size_t sep = rest.find("://"); sep != std::string_view::npos) {
    std::string_view scheme = rest.substr(0, sep);
    if (is_scheme(scheme)) {
      parts.scheme = std::string(scheme);
      parts.scheme_explicit = true;
      rest.remove_prefix(sep + 3);
    }
  }

  const std::size_t authority_end = std::min(rest.find_first_of("/?#"), rest.size());
  std::string_view authority = rest.substr(0, authority_end);
  std::string_view remainder = rest.substr(authority_end);

  if (std::size_t at = authority.rfind('@'); at != std::string_view::npos) {
    std::string_view info = authority.substr(0, at);
    if (std::size_t colon = info.find(':'); colon != std::string_view::npos) {
      parts.username = std::string(info.substr(0, colon));
      parts.password = std::string(info.substr(colon + 1));
    } else {
      parts.username = std::string(info);
    }
    authority.remove_prefix(at + 1);
  }
  split_host_port(authority, parts);
  if (parts.host.empty()) {
    throw Error(ErrorCode::MalformedUrl, "no host in '" + std::string(raw) + "'");
  }

  const std::size_t path_end = std::min(remainder.find_first_of("?#"), remainder.size());
  parts.path = std::string(remainder.substr(0, path_end));
  remainder.remove_prefix(path_end);
  if (!remainder.empty() && remainder.front() == '?') {
    const std::size_t query_end = std::min(remainder.find('#'), remainder.size());
    parts.query = std::string(remainder.substr(1, query_end - 1));
    remainder.remove_prefix(query_end);
  }
  if (!remainder.empty() && remainder.front() == '#') {
    parts.fragment = std::string(remainder.substr(1));
  }
  return parts;
}

std::string to_string(const UrlParts& parts) {
  std::string out;
  if (parts.scheme_explicit) out += parts.scheme + "://";
  if (auto info = parts.userinfo()) out += *info + "@";
  out += parts.host;
  if (parts.port) out += ":" + std::to_string(*parts.port);
  out += parts.path;
  if (parts.query) out += "?" + *parts.query;
  if (parts.fragment) out += "#" + *parts.fragment;
  return out;
}

std::vector<std::string> WordList::texts() const {
  std::vector<std::string> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(w.text);
  return out;
}

std::string_view to_string(UrlPart part) {
  switch (part) {
    case UrlPart::UserInfo: return "userinfo";
    case UrlPart::Host: return "host";
    case UrlPart::Path: return "path";
    case UrlPart::Query: return "query";
  }
  return "host";
}

std::string_view separators_for(UrlPart part) {
  switch (part) {
    case UrlPart::UserInfo:
      return kUserInfoSeparators;
    case UrlPart::Host:
      return kHostSeparators;
    case UrlPart::Path:
      return kPathSeparators;
    case UrlPart::Query:
      break;
  }
  return kQuerySeparators;
}

std::vector<std::string> split_any(std::string_view text, std::string_view separators) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find_first_of(separators, start);
    if (end == std::string_view::npos) end = text.size();
    if (end > start) out.emplace_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

WordList segment(const UrlParts& parts) {
  WordList list;
  auto emit = [&list](std::string_view text, UrlPart part) {
    for (auto& w : split_any(text, separators_for(part))) {
      list.words.push_back(Word{std::move(w), part});
    }
  };
  if (auto info = parts.userinfo()) emit(*info, UrlPart::UserInfo);
  emit(parts.host, UrlPart::Host);
  emit(parts.path, UrlPart::Path);
  // Fragments are not named by the segmentation rules; '#' is a path separator.
  if (parts.fragment) emit(*parts.fragment, UrlPart::Path);
  if (parts.query) emit(*parts.query, UrlPart::Query);
  return list;
}

std::size_t elbow_index(const std::vector<std::uint64_t>& descending) {
  if (descending.size() < 3) {
    throw Error(ErrorCode::DegenerateCorpus, "elbow needs at least three points");
  }
  const long double first = static_cast<long double>(descending.front());
  const long double dx = static_cast<long double>(descending.size() - 1);
  const long double dy = static_cast<long double>(descending.back()) - first;
  // The chord length divides every distance equally, so only the numerator matters.
  std::size_t best = 0;
  long double best_distance = -1;
  for (std::size_t i = 0; i < descending.size(); ++i) {
    const long double fi = static_cast<long double>(descending[i]);
    const long double distance = std::fabs(dy * static_cast<long double>(i) - dx * (fi - first));
    if (distance > best_distance) {
      best_distance = distance;
      best = i;
    }
  }
  return best;
}

std::unordered_set<std::string> words_above(
    const std::unordered_map<std::string, std::uint64_t>& frequencies, std::uint64_t threshold) {
  std::unordered_set<std::string> out;
  for (const auto& [word, count] : frequencies) {
    if (count > threshold) out.insert(word);
  }
  return out;
}

StopWordModel fit_stop_words(const std::vector<WordList>& corpus) {
  if (corpus.empty()) throw Error(ErrorCode::InvalidArgument, "stop-word corpus is empty");
  StopWordModel model;
  for (const auto& list : corpus) {
    for (const auto& w : list.words) ++model.frequency_table[w.text];
  }
  if (model.frequency_table.size() < 3) {
    model.degenerate = true;
    return model;
  }
  std::vector<std::uint64_t> frequencies;
  frequencies.reserve(model.frequency_table.size());
  for (const auto& [_, count] : model.frequency_table) frequencies.push_back(count);
  std::sort(frequencies.begin(), frequencies.end(), std::greater<>());
  model.threshold_frequency = frequencies[elbow_index(frequencies)];
  model.stop_words = words_above(model.frequency_table, model.threshold_frequency);
  return model;
}

WordList apply_stop_words(const WordList& words, const StopWordModel& model) {
  WordList out;
  for (const auto& w : words.words) {
    if (!model.is_stop_word(w.text)) out.words.push_back(w);
  }
  return out;
}

}  // namespace phishgraph
