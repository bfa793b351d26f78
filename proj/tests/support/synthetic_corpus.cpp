#include "synthetic_corpus.hpp"

#include <cmath>
#include <random>
#include <string>
#include <unordered_set>

namespace phishgraph::testing {
namespace {

class ZipfPicker {
 public:
  ZipfPicker(std::size_t n, double exponent) {
    cumulative_.reserve(n);
    double total = 0;
    for (std::size_t i = 1; i <= n; ++i) {
      total += 1.0 / std::pow(static_cast<double>(i), exponent);
      cumulative_.push_back(total);
    }
  }

  std::size_t operator()(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> u(0.0, cumulative_.back());
    const double x = u(rng);
    return static_cast<std::size_t>(std::lower_bound(cumulative_.begin(), cumulative_.end(), x) -
                                    cumulative_.begin());
  }

 private:
  std::vector<double> cumulative_;
};

struct ClassShape {
  std::string prefix;
  std::size_t vocabulary;
  std::size_t domains;
  std::size_t ips;
  std::size_t nameservers;
  std::vector<std::string> tlds;
};

std::string word(const std::string& prefix, std::size_t i) { return prefix + std::to_string(i); }

}  // namespace

SyntheticCorpus make_synthetic_corpus(std::size_t urls, double phishy_fraction, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto phishy_count = static_cast<std::size_t>(std::llround(phishy_fraction * urls));
  const ClassShape shapes[] = {
      {"ph", std::max<std::size_t>(50, urls / 25), std::max<std::size_t>(10, urls / 6),
       std::max<std::size_t>(4, urls / 40), std::max<std::size_t>(2, urls / 500), {"top", "xyz", "info"}},
      {"bn", std::max<std::size_t>(80, urls / 10), std::max<std::size_t>(20, urls / 4),
       std::max<std::size_t>(8, urls / 20), std::max<std::size_t>(4, urls / 250), {"com", "org", "net"}},
  };
  const std::size_t shared_vocabulary = std::max<std::size_t>(20, urls / 100);
  const ZipfPicker shared_pick(shared_vocabulary, 1.1);

  SyntheticCorpus corpus;
  std::unordered_set<std::string> seen;
  std::unordered_set<std::string> linked_domains;
  for (std::size_t c = 0; c < 2; ++c) {
    const ClassShape& shape = shapes[c];
    const std::size_t count = c == 0 ? phishy_count : urls - phishy_count;
    const ZipfPicker word_pick(shape.vocabulary, 1.0);
    const ZipfPicker domain_pick(shape.domains, 0.8);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> path_len(1, 4);
    auto pick_word = [&] {
      return coin(rng) < 0.15 ? word("gw", shared_pick(rng)) : word(shape.prefix + "w", word_pick(rng));
    };

    std::size_t made = 0;
    while (made < count) {
      const std::size_t d = domain_pick(rng);
      const std::string host = word(shape.prefix + "h", d % (shape.domains / 2 + 1)) + "." +
                               word(shape.prefix + "d", d) + "." + shape.tlds[d % shape.tlds.size()];
      std::string url = (c == 0 ? "http://" : "https://") + host;
      const std::size_t segments = path_len(rng);
      for (std::size_t s = 0; s < segments; ++s) url += "/" + pick_word();
      if (coin(rng) < 0.4) url += "?" + pick_word() + "=" + pick_word();
      if (!seen.insert(url).second) continue;
      corpus.records.push_back({url, c == 0 ? TruthLabel::Phishy : TruthLabel::Benign, std::nullopt});
      ++made;
      if (linked_domains.insert(host).second) {
        const std::size_t ip = d % shape.ips;
        const std::string prefix = c == 0 ? "45.9." : "93.184.";
        corpus.resolutions.push_back(
            {host, prefix + std::to_string(ip / 250) + "." + std::to_string(ip % 250 + 1), std::nullopt});
        corpus.nameservers.push_back(
            {host, "ns" + std::to_string(d % shape.nameservers) + "." + shape.prefix + "dns.net"});
      }
    }
  }
  std::shuffle(corpus.records.begin(), corpus.records.end(), rng);
  return corpus;
}

}  // namespace phishgraph::testing
