#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "phishgraph/evasion.hpp"

namespace phishgraph {

struct ComparisonRow {
  std::string method;
  /// "none" for the clean corpus, otherwise m1..m7.
  std::string evasion;
  double ratio = 0;
  Metrics metrics;
  double wall_time_ms = 0;
};

/// One row per (evasion setting, config), evasion-major. Every config in a
/// row group runs on the same evaded corpus. An unset spec means no evasion.
std::vector<ComparisonRow> compare_methods(const DetectionInputs& inputs,
                                           const std::vector<DetectionConfig>& configs,
                                           const std::vector<std::optional<EvasionSpec>>& evasions);

/// Header: method,evasion,ratio,recall,precision,f1,accuracy,fpr,wall_time_ms.
void write_comparison_csv(const std::vector<ComparisonRow>& rows, std::ostream& out);

}  // namespace phishgraph
