#include "phishgraph/features.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <ostream>

#include "phishgraph/io.hpp"
#include "phishgraph/url_lexer.hpp"

namespace phishgraph {
namespace {

// Relative letter frequencies in English text (percent).
constexpr std::pair<char, double> kEnglishLetters[] = {
    {'a', 8.167}, {'b', 1.492}, {'c', 2.782}, {'d', 4.253}, {'e', 12.702}, {'f', 2.228},
    {'g', 2.015}, {'h', 6.094}, {'i', 6.966}, {'j', 0.153}, {'k', 0.772},  {'l', 4.025},
    {'m', 2.406}, {'n', 6.749}, {'o', 7.507}, {'p', 1.929}, {'q', 0.095},  {'r', 5.987},
    {'s', 6.327}, {'t', 9.056}, {'u', 2.758}, {'v', 0.978}, {'w', 2.360},  {'x', 0.150},
    {'y', 1.974}, {'z', 0.074},
};

constexpr std::string_view kSuspiciousWords[] = {"confirm", "account", "signin", "update",
                                                 "logon",   "cmd",     "admin"};

constexpr std::string_view kTlds[] = {
    "com",  "org",  "net",  "edu", "gov",  "mil",  "int",  "info", "biz",  "name", "pro",
    "mobi", "asia", "tel",  "xyz", "top",  "site", "online", "club", "shop", "app", "dev",
    "io",   "co",   "me",   "tv",  "cc",   "ws",   "us",   "uk",   "ca",   "de",   "fr",
    "it",   "es",   "nl",   "be",  "ch",   "at",   "se",   "no",   "dk",   "fi",   "pl",
    "cz",   "ru",   "ua",   "cn",  "jp",   "kr",   "in",   "au",   "nz",   "br",   "ar",
    "mx",   "cl",   "za",   "ng",  "ke",   "tk",   "ml",   "ga",   "cf",   "gq",   "pw",
    "ly",   "ir",   "tr",   "gr",  "pt",   "ro",   "hu",   "vn",   "th",   "id",   "my",
    "sg",   "hk",   "tw",   "ph",  "pk",   "bd",   "eu",   "su",   "link", "live", "work",
    "click", "icu", "buzz", "win", "loan", "party", "review", "stream", "download", "racing",
    "date", "faith", "science", "cricket", "bid", "trade", "webcam", "accountant", "men",
};

constexpr std::string_view kBrands[] = {
    "google",    "youtube",  "facebook", "baidu",   "wikipedia", "amazon",   "yahoo",
    "twitter",   "instagram", "linkedin", "netflix", "microsoft", "apple",    "paypal",
    "ebay",      "bankofamerica", "chase", "wellsfargo", "citibank", "outlook", "office",
    "live",      "dropbox",  "adobe",    "github",  "reddit",    "bing",     "msn",
    "whatsapp",  "tiktok",   "spotify",  "alibaba", "aliexpress", "taobao",  "tmall",
    "walmart",   "steam",    "icloud",   "gmail",   "hotmail",   "americanexpress", "visa",
    "mastercard", "dhl",     "fedex",    "ups",     "usps",      "irs",      "hsbc",
    "barclays",  "santander", "docusign", "zoom",   "salesforce", "stripe",  "coinbase",
    "binance",   "blockchain", "yandex",  "naver",  "samsung",   "intuit",   "wordpress",
};

constexpr std::string_view kPunctuation = ".!&,#$%";

bool is_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_vowel(char c) {
  c = static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

std::string reduce_brand(std::string_view entry) {
  auto labels = split_any(to_lower_ascii(entry), ".");
  if (labels.empty()) return {};
  if (labels.size() > 1 && labels.front() == "www") return labels[1];
  return labels.front();
}

// Label directly left of the TLD, or the single label of a dotless host.
std::string registrable_label(std::string_view host) {
  auto labels = split_any(host, ".");
  if (labels.empty()) return {};
  return labels.size() == 1 ? labels.front() : labels[labels.size() - 2];
}

bool is_byte_label(std::string_view label) {
  if (label.empty()) return false;
  unsigned long value = 0;
  if (label.size() > 2 && label[0] == '0' && label[1] == 'x') {
    auto hex = label.substr(2);
    if (hex.size() > 2) return false;
    for (char c : hex) {
      if (!(is_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F'))) return false;
    }
    return true;
  }
  if (label.size() > 3) return false;
  for (char c : label) {
    if (!is_digit(c)) return false;
    value = value * 10 + static_cast<unsigned long>(c - '0');
  }
  return value <= 255;
}

std::uint32_t count_occurrences(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return 0;
  std::uint32_t count = 0;
  for (std::size_t pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

void require(bool present, const char* what) {
  if (!present) throw Error(ErrorCode::MissingResource, std::string(what) + " is empty");
}

}  // namespace

LengthClass classify_length(std::size_t length) {
  if (length <= 53) return LengthClass::Benign;
  if (length <= 75) return LengthClass::Neutral;
  return LengthClass::Phishy;
}

void FeatureResources::set_char_distribution(std::map<char, double> weights) {
  double total = 0;
  for (const auto& [_, w] : weights) {
    if (!(w >= 0) || !std::isfinite(w)) {
      throw Error(ErrorCode::MissingResource, "character weights must be finite and non-negative");
    }
    total += w;
  }
  if (total <= 0) throw Error(ErrorCode::MissingResource, "character distribution is empty");
  for (auto& [_, w] : weights) w /= total;
  english_char_distribution = std::move(weights);
}

FeatureResources FeatureResources::defaults() {
  FeatureResources res;
  std::map<char, double> letters(std::begin(kEnglishLetters), std::end(kEnglishLetters));
  res.set_char_distribution(std::move(letters));
  for (auto w : kSuspiciousWords) res.suspicious_words.emplace(w);
  for (auto t : kTlds) res.tld_list.emplace(t);
  for (auto b : kBrands) res.brand_names.emplace_back(b);
  return res;
}

void FeatureResources::load_char_distribution(const std::filesystem::path& csv) {
  if (csv.empty()) return;
  std::map<char, double> weights;
  for (const auto& line : io::read_lines(csv)) {
    auto fields = io::split_csv_line(line);
    if (fields.size() != 2 || fields[0].size() != 1) {
      if (fields.size() == 2 && fields[0] == "char") continue;
      throw Error(ErrorCode::MalformedRecord, csv.string() + ": bad row '" + line + "'");
    }
    weights[fields[0][0]] = std::stod(fields[1]);
  }
  set_char_distribution(std::move(weights));
}

void FeatureResources::load_suspicious_words(const std::filesystem::path& path) {
  if (!path.empty()) suspicious_words = io::read_set(path);
}

void FeatureResources::load_brand_names(const std::filesystem::path& path) {
  if (path.empty()) return;
  brand_names.clear();
  for (const auto& line : io::read_lines(path)) {
    if (auto b = reduce_brand(line); !b.empty()) brand_names.push_back(std::move(b));
  }
}

void FeatureResources::load_tlds(const std::filesystem::path& path) {
  if (path.empty()) return;
  tld_list.clear();
  for (auto entry : io::read_set(path)) {
    if (!entry.empty() && entry.front() == '.') entry.erase(0, 1);
    tld_list.insert(std::move(entry));
  }
}

double shannon_entropy(std::string_view text) {
  if (text.empty()) return 0;
  std::array<std::size_t, 256> counts{};
  for (unsigned char c : text) ++counts[c];
  double h = 0;
  const double n = static_cast<double>(text.size());
  for (std::size_t count : counts) {
    if (count == 0) continue;
    const double p = static_cast<double>(count) / n;
    h -= p * std::log2(p);
  }
  return h == 0 ? 0.0 : h;  // normalise -0
}

double kl_divergence(std::string_view text, const std::map<char, double>& reference) {
  if (text.empty()) return 0;
  std::map<char, double> observed;
  for (char c : text) observed[c] += 1;
  const double n = static_cast<double>(text.size());

  double q_total = 0;
  for (const auto& [_, q] : reference) q_total += q;
  for (const auto& [c, _] : observed) {
    if (!reference.contains(c)) q_total += kKlSmoothing;
  }
  double kl = 0;
  for (const auto& [c, count] : observed) {
    const double p = count / n;
    auto it = reference.find(c);
    double q = it == reference.end() ? kKlSmoothing : it->second;
    if (q <= 0) q = kKlSmoothing;
    kl += p * std::log(p / (q / q_total));
  }
  return std::max(0.0, kl);
}

bool is_ip_host(std::string_view host) {
  if (host.size() > 2 && host.front() == '[' && host.back() == ']') {
    std::string inner(host.substr(1, host.size() - 2));
    in6_addr addr{};
    return inet_pton(AF_INET6, inner.c_str(), &addr) == 1;
  }
  auto labels = split_any(host, ".");
  if (labels.size() != 4 || std::count(host.begin(), host.end(), '.') != 3) return false;
  return std::all_of(labels.begin(), labels.end(), [](const std::string& l) { return is_byte_label(l); });
}

FeatureVector extract_features(const UrlRecord& record, const FeatureResources& res) {
  require(!res.english_char_distribution.empty(), "english character distribution");
  require(!res.suspicious_words.empty(), "suspicious word list");
  require(!res.brand_names.empty(), "brand name list");
  require(!res.tld_list.empty(), "TLD list");

  const UrlParts parts = parse_url(record.url);
  const std::string& raw = record.url;
  const std::string lowered = to_lower_ascii(raw);
  const std::string& host = parts.host;
  FeatureVector f;

  f.kl_divergence = kl_divergence(lowered, res.english_char_distribution);
  f.entropy = shannon_entropy(raw);

  std::size_t digits = 0;
  std::size_t letters = 0;
  for (char c : raw) {
    digits += is_digit(c);
    letters += is_letter(c);
  }
  f.digit_letter_ratio = letters == 0 ? static_cast<double>(digits)
                                      : static_cast<double>(digits) / static_cast<double>(letters);

  // A TLD in the path is a '.'-introduced token, e.g. "/paypal.com/login".
  for (std::size_t dot = parts.path.find('.'); dot != std::string::npos;
       dot = parts.path.find('.', dot + 1)) {
    std::size_t end = parts.path.find_first_of(separators_for(UrlPart::Path), dot + 1);
    std::string token = parts.path.substr(dot + 1, end == std::string::npos ? std::string::npos : end - dot - 1);
    if (res.tld_list.contains(token)) ++f.tld_in_path_count;
  }
  f.dash_in_path_count = static_cast<std::uint32_t>(std::count(parts.path.begin(), parts.path.end(), '-'));

  f.blacklisted = res.blacklist_domains.contains(host) || res.blacklist_ips.contains(host);
  f.length_class = classify_length(raw.size());
  f.digits_in_domain = std::any_of(host.begin(), host.end(), is_digit);

  for (const auto& word : res.suspicious_words) f.suspicious_word_count += count_occurrences(lowered, word);

  f.multi_subdomain = std::count(host.begin(), host.end(), '.') > 3;

  const std::string label = is_ip_host(host) ? std::string() : registrable_label(host);
  if (label.find('-') != std::string::npos) {
    f.domain_prefix_suffix_dash = true;
    for (const auto& brand : res.brand_names) {
      if (brand.empty() || label.size() <= brand.size()) continue;
      if (label.starts_with(brand + "-") || label.ends_with("-" + brand)) {
        f.brand_dash_modification = true;
        break;
      }
    }
  }

  f.long_hostname = host.size() > 22;
  f.short_hostname = host.size() < 5;

  for (char c : raw) f.punctuation_count += kPunctuation.find(c) != std::string_view::npos;

  f.colon_in_hostname_count = static_cast<std::uint32_t>(std::count(host.begin(), host.end(), ':')) +
                              (parts.port ? 1U : 0U);
  f.ip_as_host = is_ip_host(host);

  std::size_t vowels = 0;
  std::size_t consonants = 0;
  for (char c : host) {
    if (!is_letter(c)) continue;
    if (is_vowel(c)) {
      ++vowels;
    } else {
      ++consonants;
    }
  }
  f.vowel_consonant_ratio = consonants == 0 ? static_cast<double>(vowels)
                                            : static_cast<double>(vowels) / static_cast<double>(consonants);

  f.at_symbol = raw.find('@') != std::string::npos;
  return f;
}

std::vector<std::string> feature_names() {
  return {"kl_divergence",        "entropy",
          "digit_letter_ratio",   "tld_in_path_count",
          "dash_in_path_count",   "blacklisted",
          "length_class",         "digits_in_domain",
          "suspicious_word_count", "multi_subdomain",
          "brand_dash_modification", "long_hostname",
          "domain_prefix_suffix_dash", "punctuation_count",
          "colon_in_hostname_count", "ip_as_host",
          "vowel_consonant_ratio", "short_hostname",
          "at_symbol"};
}

void write_features_csv(const std::vector<UrlRecord>& records, const FeatureResources& res,
                        std::ostream& out) {
  if (records.empty()) throw Error(ErrorCode::InvalidArgument, "no records to export");
  out << "url";
  for (const auto& name : feature_names()) out << ',' << name;
  out << ",label\n";
  out.precision(17);
  for (const auto& r : records) {
    const FeatureVector f = extract_features(r, res);
    const auto b = [](bool v) { return v ? 1 : 0; };
    out << io::csv_field(r.url) << ',' << f.kl_divergence << ',' << f.entropy << ','
        << f.digit_letter_ratio << ',' << f.tld_in_path_count << ',' << f.dash_in_path_count
        << ',' << b(f.blacklisted) << ',' << static_cast<int>(f.length_class) << ','
        << b(f.digits_in_domain) << ',' << f.suspicious_word_count << ','
        << b(f.multi_subdomain) << ',' << b(f.brand_dash_modification) << ','
        << b(f.long_hostname) << ',' << b(f.domain_prefix_suffix_dash) << ','
        << f.punctuation_count << ',' << f.colon_in_hostname_count << ',' << b(f.ip_as_host)
        << ',' << f.vowel_consonant_ratio << ',' << b(f.short_hostname) << ','
        << b(f.at_symbol) << ',' << (r.label == TruthLabel::Unknown ? "" : to_string(r.label))
        << '\n';
  }
}

void export_features(const std::vector<UrlRecord>& records, const FeatureResources& res,
                     const std::filesystem::path& out_path) {
  auto out = io::open_output(out_path);
  write_features_csv(records, res, out);
  if (!out) throw Error(ErrorCode::Io, "failed writing '" + out_path.string() + "'");
}

}  // namespace phishgraph
