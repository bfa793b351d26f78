#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace phishgraph {

/// Structural parts of a lowercased URL. Optional fields remember whether
/// their delimiter was present so that `to_string` reproduces the input.
struct UrlParts {
  std::string scheme = "http";
  bool scheme_explicit = false;
  std::optional<std::string> username;
  std::optional<std::string> password;
  std::string host;
  std::optional<std::uint16_t> port;
  std::string path;
  std::optional<std::string> query;
  std::optional<std::string> fragment;

  /// Raw userinfo text ("user:pass"), if an '@' delimited it.
  std::optional<std::string> userinfo() const;

  friend bool operator==(const UrlParts&, const UrlParts&) = default;
};

/// Lowercases `raw` and splits it into parts. Throws Error(MalformedUrl)
/// when no host can be identified.
UrlParts parse_url(std::string_view raw);

/// Reassembles parts with their original separators.
std::string to_string(const UrlParts& parts);

std::string to_lower_ascii(std::string_view text);

enum class UrlPart { UserInfo, Host, Path, Query };

std::string_view to_string(UrlPart part);

struct Word {
  std::string text;
  UrlPart source;

  friend bool operator==(const Word&, const Word&) = default;
};

/// Ordered words of one URL; duplicates kept (frequency fitting counts occurrences).
struct WordList {
  std::vector<Word> words;

  std::vector<std::string> texts() const;
  bool empty() const { return words.empty(); }
  std::size_t size() const { return words.size(); }
};

/// Separator sets per part.
std::string_view separators_for(UrlPart part);

/// Splits `text` on any character of `separators`, dropping empty pieces.
std::vector<std::string> split_any(std::string_view text, std::string_view separators);

/// Words of userinfo, host, path (+fragment) and query. The scheme is never emitted.
WordList segment(const UrlParts& parts);

struct StopWordModel {
  std::unordered_map<std::string, std::uint64_t> frequency_table;
  std::uint64_t threshold_frequency = 0;
  std::unordered_set<std::string> stop_words;
  /// Set when the corpus had fewer than three distinct words; stop_words is then empty.
  bool degenerate = false;

  bool is_stop_word(const std::string& word) const { return stop_words.contains(word); }
};

/// Index of the point on a descending curve with the largest perpendicular
/// distance to the chord joining the first and last points. Ties go to the
/// lowest index. Requires at least three points.
std::size_t elbow_index(const std::vector<std::uint64_t>& descending);

/// Words strictly more frequent than `threshold`.
std::unordered_set<std::string> words_above(
    const std::unordered_map<std::string, std::uint64_t>& frequencies, std::uint64_t threshold);

/// Fits the stop-word set with the elbow rule. An empty corpus is an
/// InvalidArgument error; fewer than three distinct words yields a
/// degenerate model with no stop words.
StopWordModel fit_stop_words(const std::vector<WordList>& corpus);

WordList apply_stop_words(const WordList& words, const StopWordModel& model);

}  // namespace phishgraph
