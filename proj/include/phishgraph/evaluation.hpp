#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "phishgraph/core.hpp"

namespace phishgraph {

struct Confusion {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

/// Phishy is the positive class. Undefined ratios (0/0) are reported as 0.
struct Metrics {
  double recall_phishy = 0;
  double precision_phishy = 0;
  double f1 = 0;
  double accuracy = 0;
  double fpr = 0;
  Confusion confusion;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

Metrics metrics_from_confusion(const Confusion& c);

/// Keys of both maps must coincide; throws Error(EmptyTestSet) when empty.
template <typename Key>
Metrics score(const std::map<Key, Label>& predictions, const std::map<Key, Label>& truth) {
  if (truth.empty()) throw Error(ErrorCode::EmptyTestSet, "no test items to score");
  if (predictions.size() != truth.size()) {
    throw Error(ErrorCode::InvalidArgument, "predictions and truth cover different items");
  }
  Confusion c;
  auto p = predictions.begin();
  for (const auto& [key, actual] : truth) {
    if (p->first != key) {
      throw Error(ErrorCode::InvalidArgument, "predictions and truth cover different items");
    }
    const bool predicted_phishy = p->second == Label::Phishy;
    if (actual == Label::Phishy) {
      (predicted_phishy ? c.tp : c.fn) += 1;
    } else {
      (predicted_phishy ? c.fp : c.tn) += 1;
    }
    ++p;
  }
  return metrics_from_confusion(c);
}

}  // namespace phishgraph
