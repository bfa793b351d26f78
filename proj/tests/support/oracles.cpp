#include "oracles.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace phishgraph::testing {

double assignment_cost(const Topology& topology, std::span<const std::optional<Label>> observed,
                       std::span<const EdgePotential> potentials, std::span<const Label> labels) {
  double total = 0;
  for (std::size_t v = 0; v < topology.vertex_count(); ++v) {
    double prior = kHiddenPrior;
    if (observed[v]) {
      if (labels[v] != *observed[v]) throw std::logic_error("observed vertex relabelled");
      prior = kObservedPrior;
    }
    total += std::log(1.0 - prior);
    for (std::size_t s = topology.first_slot(v); s < topology.end_slot(v); ++s) {
      const auto u = topology.target(s);
      if (u > v) total += potentials[s](labels[v], labels[u]);
    }
  }
  return total;
}

ExhaustiveMinimum exhaustive_minimum(const Topology& topology,
                                     std::span<const std::optional<Label>> observed,
                                     std::span<const EdgePotential> potentials, double tolerance) {
  std::vector<std::size_t> hidden;
  std::vector<Label> labels(topology.vertex_count(), Label::Benign);
  for (std::size_t v = 0; v < labels.size(); ++v) {
    if (observed[v]) {
      labels[v] = *observed[v];
    } else {
      hidden.push_back(v);
    }
  }
  if (hidden.size() > 24) throw std::invalid_argument("too many hidden vertices to enumerate");

  ExhaustiveMinimum best;
  best.cost = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << hidden.size()); ++mask) {
    for (std::size_t i = 0; i < hidden.size(); ++i) {
      labels[hidden[i]] = (mask >> i) & 1 ? Label::Benign : Label::Phishy;
    }
    const double cost = assignment_cost(topology, observed, potentials, labels);
    if (cost < best.cost - tolerance) {
      best.cost = cost;
      best.minimizers.clear();
    }
    if (std::fabs(cost - best.cost) <= tolerance) best.minimizers.push_back(labels);
  }
  return best;
}

std::size_t exhaustive_elbow(const std::vector<std::uint64_t>& f) {
  if (f.size() < 3) throw std::invalid_argument("elbow needs three points");
  // Geometric distance from each point to the segment joining the ends.
  const long double ax = 0, ay = static_cast<long double>(f.front());
  const long double bx = static_cast<long double>(f.size() - 1), by = static_cast<long double>(f.back());
  const long double abx = bx - ax, aby = by - ay;
  const long double ab2 = abx * abx + aby * aby;
  std::vector<long double> distance(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const long double px = static_cast<long double>(i) - ax;
    const long double py = static_cast<long double>(f[i]) - ay;
    const long double t = (px * abx + py * aby) / ab2;
    distance[i] = std::hypot(px - t * abx, py - t * aby);
  }
  // Floating error can blur near-ties; settle candidates with exact integers.
  long double top = 0;
  for (auto d : distance) top = std::max(top, d);
  using i128 = __int128;
  auto cross = [&](std::size_t i) {
    const i128 dy = static_cast<i128>(f.back()) - static_cast<i128>(f.front());
    const i128 dx = static_cast<i128>(f.size() - 1);
    i128 c = dy * static_cast<i128>(i) - dx * (static_cast<i128>(f[i]) - static_cast<i128>(f.front()));
    return c < 0 ? -c : c;
  };
  std::size_t best = f.size();
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (distance[i] < top * (1 - 1e-12L) - 1e-12L) continue;
    if (best == f.size() || cross(i) > cross(best)) best = i;
  }
  return best;
}

std::vector<EdgePotential> random_potentials(const Topology& topology,
                                             const CompatibilityConfig& cfg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<EdgePotential> out(topology.directed_edge_count());
  for (std::size_t v = 0; v < topology.vertex_count(); ++v) {
    for (std::size_t s = topology.first_slot(v); s < topology.end_slot(v); ++s) {
      if (topology.target(s) < v) continue;
      out[s] = potential_from_similarity(unit(rng), cfg);
      out[topology.reverse(s)] = out[s];
    }
  }
  return out;
}

Topology random_tree(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::pair<VertexIndex, VertexIndex>> edges;
  for (std::size_t v = 1; v < n; ++v) {
    std::uniform_int_distribution<std::size_t> parent(0, v - 1);
    edges.emplace_back(static_cast<VertexIndex>(parent(rng)), static_cast<VertexIndex>(v));
  }
  return Topology::from_edges(n, std::move(edges));
}

std::vector<double> expected_rwr_visits(const Topology& topology,
                                        const std::vector<VertexIndex>& seeds, double restart,
                                        std::size_t length, std::size_t walks) {
  const std::size_t n = topology.vertex_count();
  std::vector<double> visits(n, 0.0);
  const double share = static_cast<double>(walks) / static_cast<double>(seeds.size());
  for (auto origin : seeds) {
    std::vector<double> p(n, 0.0), next(n);
    p[origin] = 1.0;
    for (std::size_t step = 0; step < length; ++step) {
      std::fill(next.begin(), next.end(), 0.0);
      for (std::size_t v = 0; v < n; ++v) {
        const std::size_t degree = topology.degree(static_cast<VertexIndex>(v));
        const double moving = degree == 0 ? 0.0 : (1 - restart) * p[v];
        next[origin] += p[v] - moving;
        for (auto u : topology.neighbors(static_cast<VertexIndex>(v))) {
          next[u] += moving / static_cast<double>(degree);
        }
      }
      p.swap(next);
      for (std::size_t v = 0; v < n; ++v) visits[v] += p[v] * share;
    }
  }
  return visits;
}

}  // namespace phishgraph::testing
