#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "phishgraph/graph.hpp"

namespace phishgraph {

/// Dense vectors aligned with a graph's vertex indices. Rows without a
/// vector are zero and report `has(v) == false`.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::size_t rows, std::size_t dim);

  std::size_t rows() const { return present_.size(); }
  std::size_t dim() const { return dim_; }
  bool has(std::size_t v) const { return present_[v]; }

  std::span<const double> row(std::size_t v) const { return {data_.data() + v * dim_, dim_}; }
  /// Mutable access marks the row as present.
  std::span<double> mutable_row(std::size_t v);
  void set(std::size_t v, std::span<const double> values);

  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
  std::vector<bool> present_;
};

struct WalkConfig {
  std::size_t dim = 128;
  std::size_t walks_per_vertex = 10;
  std::size_t walk_length = 40;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;
  /// node2vec return and in-out parameters; p = q = 1 is a uniform DeepWalk walk.
  double p = 1.0;
  double q = 1.0;
  std::uint64_t seed = 1;
  /// 1 gives bitwise-reproducible output; more workers train lock-free.
  std::size_t workers = 1;

  void validate() const;
};

/// One truncated random walk starting at `start`, seeded independently of
/// every other walk. Stops early at a vertex without neighbors.
std::vector<VertexIndex> random_walk(const Topology& topology, VertexIndex start,
                                     std::size_t length, double p, double q,
                                     std::uint64_t walk_seed);

/// Skip-gram with negative sampling over random-walk corpora. Isolated
/// vertices keep the zero vector.
EmbeddingTable train_embeddings(const Topology& topology, const WalkConfig& config);
EmbeddingTable train_embeddings(const HeteroGraph& graph, const WalkConfig& config);

struct PropagationReport {
  std::size_t orphans = 0;
};

/// Mean-of-neighbours vectors for non-URL entities given every URL vector:
/// Url -> Domain -> {Ip, NameServer}, and Url -> Word. Vertices with no
/// embedded neighbour get the zero vector and are counted as orphans.
/// Throws Error(MissingEmbedding) when a URL vertex lacks a vector.
EmbeddingTable propagate_mean_vectors(const HeteroGraph& graph, const EmbeddingTable& url_vectors,
                                      PropagationReport* report = nullptr);

enum class SimilarityKind { Cosine, Rbf };

struct Similarity {
  double value = 0;
  /// Cosine with a zero-norm operand; `value` is then 0.
  bool zero_vector = false;
};

/// Cosine clamped to [0, 1], or exp(-|x-y|^2 / (2 sigma^2)).
Similarity similarity(std::span<const double> x, std::span<const double> y, SimilarityKind kind,
                      double sigma = 1.0);

/// Median Euclidean distance over `samples` random pairs of embedded rows;
/// falls back to 1 when the median is 0 or fewer than two rows exist.
double median_pair_distance(const EmbeddingTable& table, std::size_t samples, std::uint64_t seed);

/// TSV with header "kind:key dim v1 ... vd". Rows without vectors are skipped.
void export_embeddings(const HeteroGraph& graph, const EmbeddingTable& table,
                       const std::filesystem::path& path);
/// Reads rows for vertices present in `graph`; unknown vertices are ignored.
/// Throws Error(MalformedRecord) on non-uniform dimensions.
EmbeddingTable import_embeddings(const HeteroGraph& graph, const std::filesystem::path& path);

}  // namespace phishgraph
