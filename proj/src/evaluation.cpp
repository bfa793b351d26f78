#include "phishgraph/evaluation.hpp"

namespace phishgraph {

namespace {
double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace

Metrics metrics_from_confusion(const Confusion& c) {
  Metrics m;
  m.confusion = c;
  m.recall_phishy = ratio(c.tp, c.tp + c.fn);
  m.precision_phishy = ratio(c.tp, c.tp + c.fp);
  const double pr = m.precision_phishy + m.recall_phishy;
  m.f1 = pr > 0 ? 2 * m.precision_phishy * m.recall_phishy / pr : 0.0;
  m.accuracy = ratio(c.tp + c.tn, c.total());
  m.fpr = ratio(c.fp, c.fp + c.tn);
  return m;
}

}  // namespace phishgraph
