#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

#include "phishgraph/core.hpp"

namespace phishgraph {

enum class LengthClass { Benign, Neutral, Phishy };

LengthClass classify_length(std::size_t length);

/// The 19 lexical, host and domain features, in importance order.
struct FeatureVector {
  double kl_divergence = 0;
  double entropy = 0;
  double digit_letter_ratio = 0;
  std::uint32_t tld_in_path_count = 0;
  std::uint32_t dash_in_path_count = 0;
  bool blacklisted = false;
  LengthClass length_class = LengthClass::Benign;
  bool digits_in_domain = false;
  std::uint32_t suspicious_word_count = 0;
  bool multi_subdomain = false;
  bool brand_dash_modification = false;
  bool long_hostname = false;
  bool domain_prefix_suffix_dash = false;
  std::uint32_t punctuation_count = 0;
  std::uint32_t colon_in_hostname_count = 0;
  bool ip_as_host = false;
  double vowel_consonant_ratio = 0;
  bool short_hostname = false;
  bool at_symbol = false;
};

struct FeatureResources {
  /// Character probabilities; normalized to sum 1 by `set_char_distribution`.
  std::map<char, double> english_char_distribution;
  std::unordered_set<std::string> suspicious_words;
  /// Second-level labels such as "microsoft"; full domains are reduced on load.
  std::vector<std::string> brand_names;
  std::unordered_set<std::string> tld_list;
  std::unordered_set<std::string> blacklist_domains;
  std::unordered_set<std::string> blacklist_ips;

  void set_char_distribution(std::map<char, double> weights);

  /// Bundled English letter frequencies, suspicious words, TLD snapshot and brand list.
  static FeatureResources defaults();

  /// Overrides from files; empty paths keep the current value.
  void load_char_distribution(const std::filesystem::path& csv);
  void load_suspicious_words(const std::filesystem::path& path);
  void load_brand_names(const std::filesystem::path& path);
  void load_tlds(const std::filesystem::path& path);
};

/// Probability smoothing for characters absent from the reference distribution.
inline constexpr double kKlSmoothing = 1e-6;

/// Base-2 Shannon entropy of the character distribution of `text`.
double shannon_entropy(std::string_view text);

/// KL(p_text || q_reference) in nats, with unseen characters smoothed.
double kl_divergence(std::string_view text, const std::map<char, double>& reference);

bool is_ip_host(std::string_view host);

/// Throws Error(MalformedUrl) for unparsable URLs and Error(MissingResource)
/// when a required resource set is empty.
FeatureVector extract_features(const UrlRecord& record, const FeatureResources& resources);

std::vector<std::string> feature_names();

/// CSV with header, one row per record, label last (empty for unknown).
void export_features(const std::vector<UrlRecord>& records, const FeatureResources& resources,
                     const std::filesystem::path& out);
void write_features_csv(const std::vector<UrlRecord>& records,
                        const FeatureResources& resources, std::ostream& out);

}  // namespace phishgraph
