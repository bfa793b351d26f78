#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "phishgraph/inference.hpp"

namespace phishgraph::testing {

// Slow reference implementations that the library is checked against.

/// Total cost of a full labelling: prior costs of every vertex plus one edge
/// potential per undirected edge. Observed vertices must carry their label.
double assignment_cost(const Topology& topology, std::span<const std::optional<Label>> observed,
                       std::span<const EdgePotential> potentials, std::span<const Label> labels);

struct ExhaustiveMinimum {
  double cost = 0;
  /// Every labelling (of all vertices) attaining `cost` within the tolerance.
  std::vector<std::vector<Label>> minimizers;
};

/// Enumerates every labelling of the hidden vertices. Keep the hidden count small.
ExhaustiveMinimum exhaustive_minimum(const Topology& topology,
                                     std::span<const std::optional<Label>> observed,
                                     std::span<const EdgePotential> potentials,
                                     double tolerance = 1e-9);

/// Elbow by scanning every index with the normalised point-to-chord distance,
/// compared exactly through integer cross products. Lowest index wins ties.
std::size_t exhaustive_elbow(const std::vector<std::uint64_t>& descending);

/// Per-slot potentials for random similarities (both directions share a value).
std::vector<EdgePotential> random_potentials(const Topology& topology,
                                             const CompatibilityConfig& cfg, std::mt19937_64& rng);

/// Uniformly attached random tree on `n` vertices.
Topology random_tree(std::size_t n, std::mt19937_64& rng);

/// Exact expected visit counts of `walks` restart walks of `length` steps,
/// each starting from a uniformly chosen seed and returning to that seed with
/// probability `restart` (always, from an isolated vertex). Computed by
/// propagating the visit distribution step by step.
std::vector<double> expected_rwr_visits(const Topology& topology,
                                        const std::vector<VertexIndex>& seeds, double restart,
                                        std::size_t length, std::size_t walks);

}  // namespace phishgraph::testing
