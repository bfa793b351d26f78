#include "phishgraph/comparison.hpp"

#include <chrono>
#include <iomanip>

namespace phishgraph {

std::vector<ComparisonRow> compare_methods(const DetectionInputs& inputs,
                                           const std::vector<DetectionConfig>& configs,
                                           const std::vector<std::optional<EvasionSpec>>& evasions) {
  if (configs.empty()) throw Error(ErrorCode::InvalidArgument, "compare_methods needs a config");
  std::vector<std::optional<EvasionSpec>> settings = evasions;
  if (settings.empty()) settings.emplace_back();

  std::vector<ComparisonRow> rows;
  for (const auto& spec : settings) {
    const DetectionInputs corpus = spec ? evade_inputs(inputs, *spec).first : inputs;
    for (const auto& config : configs) {
      const auto start = std::chrono::steady_clock::now();
      const Metrics metrics = rebuild_and_evaluate(corpus, config);
      const double ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      rows.push_back({std::string(to_string(config.method)),
                      spec ? std::string(to_string(spec->method)) : "none", spec ? spec->ratio : 0.0,
                      metrics, ms});
    }
  }
  return rows;
}

void write_comparison_csv(const std::vector<ComparisonRow>& rows, std::ostream& out) {
  out << "method,evasion,ratio,recall,precision,f1,accuracy,fpr,wall_time_ms\n";
  out << std::setprecision(6);
  for (const auto& r : rows) {
    const Metrics& m = r.metrics;
    out << r.method << ',' << r.evasion << ',' << r.ratio << ',' << m.recall_phishy << ','
        << m.precision_phishy << ',' << m.f1 << ',' << m.accuracy << ',' << m.fpr << ','
        << std::fixed << std::setprecision(1) << r.wall_time_ms << std::defaultfloat
        << std::setprecision(6) << '\n';
  }
}

}  // namespace phishgraph
