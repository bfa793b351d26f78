#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "phishgraph/embedding.hpp"
#include "phishgraph/graph.hpp"

namespace phishgraph {

enum class CompatibilityMode { Bpe, Polonium };

struct CompatibilityConfig {
  CompatibilityMode mode = CompatibilityMode::Bpe;
  double ths_pos = 0.7;
  double ths_neg = 0.7;
  SimilarityKind sim_kind = SimilarityKind::Cosine;
  double sigma = 1.0;
  double epsilon = 0.001;

  void validate() const;
};

inline std::size_t label_index(Label l) { return l == Label::Phishy ? 0 : 1; }
inline Label label_at(std::size_t i) { return i == 0 ? Label::Phishy : Label::Benign; }

/// Edge cost of a joint labelling; symmetric, so only agreement matters.
struct EdgePotential {
  double same = 0;
  double different = 0;

  double operator()(Label a, Label b) const { return a == b ? same : different; }
};

/// Cost-domain compatibility for a given similarity:
/// Bpe: same = min(ths+, 1 - sim), different = max(ths-, sim);
/// Polonium: same = 0.5 - eps, different = 0.5 + eps.
EdgePotential potential_from_similarity(double sim, const CompatibilityConfig& cfg);

/// Potential between two embedded vertices. Throws Error(MissingEmbedding)
/// in Bpe mode when either vertex lacks a vector.
double edge_potential(const HeteroGraph& graph, VertexIndex x, VertexIndex y, Label lx, Label ly,
                      const EmbeddingTable& embeddings, const CompatibilityConfig& cfg);

/// Per directed slot of the topology (both directions carry the same value).
std::vector<EdgePotential> compute_potentials(const HeteroGraph& graph,
                                              const EmbeddingTable* embeddings,
                                              const CompatibilityConfig& cfg);

using LabelPair = std::array<double, 2>;  // indexed by label_index

inline constexpr double kObservedPrior = 0.99;
inline constexpr double kHiddenPrior = 0.5;

struct MinSumOptions {
  std::size_t iterations = 5;
  /// Stop once no hidden assignment changes between consecutive iterations.
  bool stop_when_stable = false;
  /// Stop once no message moves by more than this (0 disables).
  double message_tolerance = 0;
  std::size_t workers = 1;
};

struct InferenceState {
  std::vector<LabelPair> priors;
  /// msg(x -> y) stored at the topology slot of x -> y.
  std::vector<LabelPair> messages;
  /// False for slots addressed to observed vertices; those never carry a message.
  std::vector<bool> message_active;
  std::vector<LabelPair> costs;
  std::vector<std::optional<Label>> assignment;
  std::size_t iterations_run = 0;
};

/// Min-sum loopy belief propagation with a synchronous schedule. Observed
/// vertices only send; messages are normalised so their minimum is 0.
/// Throws Error(NoObservedVertices) when nothing is observed.
InferenceState run_min_sum(const Topology& topology,
                           std::span<const std::optional<Label>> observed,
                           std::span<const EdgePotential> potentials,
                           const MinSumOptions& options);

InferenceState run_min_sum(const HeteroGraph& graph, const EmbeddingTable* embeddings,
                           const CompatibilityConfig& cfg, const MinSumOptions& options);

/// Assignment restricted to the requested vertices. Observed vertices carry
/// no inferred label and are skipped; ids absent from the graph throw
/// Error(UnknownVertex).
std::map<VertexId, Label> classify(const HeteroGraph& graph, const InferenceState& state,
                                   const std::vector<VertexId>& test_urls);

struct RwrConfig {
  double restart = 0.15;
  std::size_t walks = 10'000;
  std::size_t walk_length = 20;
  std::uint64_t seed = 1;
};

inline constexpr double kRwrSmoothing = 1e-9;

struct RwrResult {
  std::vector<double> phishy_visits;
  std::vector<double> benign_visits;
  /// phishy / (phishy + benign + smoothing); above 0.5 means Phishy.
  std::vector<double> score;
};

/// `walks` restart walks per class, each from a uniformly chosen observed
/// URL of that class, restarting to its own origin with probability `restart`.
RwrResult run_rwr(const HeteroGraph& graph, const RwrConfig& cfg);

}  // namespace phishgraph
