#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "phishgraph/embedding.hpp"
#include "phishgraph/evaluation.hpp"
#include "phishgraph/graph.hpp"
#include "phishgraph/inference.hpp"
#include "phishgraph/url_lexer.hpp"

namespace phishgraph {

enum class Method { Bpe, Polonium, Rwr };

std::string_view to_string(Method method);
std::optional<Method> parse_method(std::string_view text);

enum class EmbeddingSource {
  /// Random-walk skip-gram over the network.
  RandomWalk,
  /// External URL vectors averaged onto the other entities.
  MeanVectors,
};

struct DetectionConfig {
  Method method = Method::Bpe;
  WalkConfig walk;
  CompatibilityConfig compatibility;
  /// Unset means the median pairwise distance of the embeddings (RBF only).
  std::optional<double> sigma;
  MinSumOptions min_sum;
  RwrConfig rwr;
  bool remove_stop_words = true;
  EmbeddingSource embedding_source = EmbeddingSource::RandomWalk;
  /// Required for MeanVectors: TSV restricted to url: rows.
  std::filesystem::path url_vectors;
  /// Skips training when set (must match the graph built from the inputs).
  std::optional<EmbeddingTable> precomputed_embeddings;
};

struct DetectionInputs {
  std::vector<UrlRecord> train;
  std::vector<UrlRecord> test;
  std::vector<ResolutionRecord> resolutions;
  std::vector<NameServerRecord> nameservers;
  std::unordered_set<std::string> blacklist_domains;
  std::unordered_set<std::string> blacklist_ips;
};

struct UrlPrediction {
  VertexId vertex;
  Label predicted = Label::Benign;
  /// Min-sum costs; for RWR the costs are (1 - score, score).
  double cost_phishy = 0;
  double cost_benign = 0;
  std::optional<Label> truth;
};

struct DetectionResult {
  StopWordModel stop_words;
  BuildReport build;
  std::size_t blacklisted = 0;
  HeteroGraph graph;
  std::optional<EmbeddingTable> embeddings;
  double sigma = 1.0;
  std::size_t iterations_run = 0;
  /// Hidden test URLs, ordered by vertex id.
  std::vector<UrlPrediction> predictions;
  /// Over labelled hidden test URLs; unset when there are none.
  std::optional<Metrics> metrics;
  double embedding_ms = 0;
  double inference_ms = 0;
};

/// Segment -> stop words -> graph -> (embed) -> infer -> score.
DetectionResult run_detection(const DetectionInputs& inputs, const DetectionConfig& config);

/// Stop-word model fitted on every parsable URL of the corpus.
StopWordModel fit_corpus_stop_words(const std::vector<UrlRecord>& train,
                                    const std::vector<UrlRecord>& test);

}  // namespace phishgraph
