#include "phishgraph/detection.hpp"

#include <algorithm>
#include <chrono>
#include <map>

namespace phishgraph {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

void collect_words(const std::vector<UrlRecord>& records, std::vector<WordList>& out) {
  for (const auto& r : records) {
    try {
      out.push_back(segment(parse_url(r.url)));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MalformedUrl) throw;
    }
  }
}

// Labelled hidden test URLs; a URL listed twice with both labels counts as Phishy.
std::map<std::string, Label> test_truth(const std::vector<UrlRecord>& test) {
  std::map<std::string, Label> truth;
  for (const auto& r : test) {
    const auto label = to_label(r.label);
    if (!label) continue;
    std::string key;
    try {
      key = url_key(r.url);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MalformedUrl) throw;
      continue;
    }
    auto [it, inserted] = truth.emplace(key, *label);
    if (!inserted && *label == Label::Phishy) it->second = Label::Phishy;
  }
  return truth;
}

EmbeddingTable make_embeddings(const HeteroGraph& graph, const DetectionConfig& cfg) {
  if (cfg.precomputed_embeddings) {
    if (cfg.precomputed_embeddings->rows() != graph.vertex_count()) {
      throw Error(ErrorCode::MissingEmbedding, "precomputed embeddings do not match the graph");
    }
    return *cfg.precomputed_embeddings;
  }
  if (cfg.embedding_source == EmbeddingSource::MeanVectors) {
    if (cfg.url_vectors.empty()) {
      throw Error(ErrorCode::InvalidArgument, "mean-vector embeddings need a URL vector file");
    }
    return propagate_mean_vectors(graph, import_embeddings(graph, cfg.url_vectors));
  }
  return train_embeddings(graph, cfg.walk);
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::Bpe: return "bpe";
    case Method::Polonium: return "pol";
    case Method::Rwr: return "rwr";
  }
  return "bpe";
}

std::optional<Method> parse_method(std::string_view text) {
  const std::string lower = to_lower_ascii(text);
  if (lower == "bpe") return Method::Bpe;
  if (lower == "pol" || lower == "polonium") return Method::Polonium;
  if (lower == "rwr") return Method::Rwr;
  return std::nullopt;
}

StopWordModel fit_corpus_stop_words(const std::vector<UrlRecord>& train,
                                    const std::vector<UrlRecord>& test) {
  std::vector<WordList> corpus;
  corpus.reserve(train.size() + test.size());
  collect_words(train, corpus);
  collect_words(test, corpus);
  if (corpus.empty()) throw Error(ErrorCode::EmptyGraph, "no parsable URL in the corpus");
  return fit_stop_words(corpus);
}

DetectionResult run_detection(const DetectionInputs& inputs, const DetectionConfig& config) {
  DetectionResult result;
  if (config.remove_stop_words) {
    result.stop_words = fit_corpus_stop_words(inputs.train, inputs.test);
  }
  result.graph = build_graph(inputs.train, inputs.test, inputs.resolutions, inputs.nameservers,
                             result.stop_words, &result.build);
  result.blacklisted = apply_blacklists(result.graph, inputs.blacklist_domains, inputs.blacklist_ips);
  const HeteroGraph& graph = result.graph;

  const auto truth = test_truth(inputs.test);
  std::vector<VertexIndex> targets;
  for (const auto& r : inputs.test) {
    std::string key;
    try {
      key = url_key(r.url);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MalformedUrl) throw;
      continue;
    }
    const auto v = graph.find({VertexKind::Url, key});
    if (v && !graph.is_observed(*v)) targets.push_back(*v);
  }
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

  std::vector<LabelPair> costs(graph.vertex_count());
  std::vector<Label> labels(graph.vertex_count(), Label::Benign);

  if (config.method == Method::Rwr) {
    const auto start = Clock::now();
    const RwrResult rwr = run_rwr(graph, config.rwr);
    result.inference_ms = elapsed_ms(start);
    for (VertexIndex v : targets) {
      costs[v] = {1.0 - rwr.score[v], rwr.score[v]};
      labels[v] = rwr.score[v] > 0.5 ? Label::Phishy : Label::Benign;
    }
  } else {
    CompatibilityConfig compat = config.compatibility;
    compat.mode = config.method == Method::Bpe ? CompatibilityMode::Bpe : CompatibilityMode::Polonium;
    if (compat.mode == CompatibilityMode::Bpe) {
      const auto start = Clock::now();
      result.embeddings = make_embeddings(graph, config);
      result.embedding_ms = elapsed_ms(start);
      if (compat.sim_kind == SimilarityKind::Rbf) {
        compat.sigma = config.sigma ? *config.sigma
                                    : median_pair_distance(*result.embeddings, 10'000, config.walk.seed);
      }
    }
    result.sigma = compat.sigma;
    const auto start = Clock::now();
    const InferenceState state = run_min_sum(
        graph, result.embeddings ? &*result.embeddings : nullptr, compat, config.min_sum);
    result.inference_ms = elapsed_ms(start);
    result.iterations_run = state.iterations_run;
    for (VertexIndex v : targets) {
      costs[v] = state.costs[v];
      labels[v] = *state.assignment[v];
    }
  }

  std::map<VertexId, Label> predicted;
  std::map<VertexId, Label> actual;
  for (VertexIndex v : targets) {
    UrlPrediction p{graph.vertex(v), labels[v], costs[v][0], costs[v][1], std::nullopt};
    if (auto it = truth.find(p.vertex.key); it != truth.end()) {
      p.truth = it->second;
      predicted.emplace(p.vertex, p.predicted);
      actual.emplace(p.vertex, it->second);
    }
    result.predictions.push_back(std::move(p));
  }
  if (!actual.empty()) result.metrics = score(predicted, actual);
  return result;
}

}  // namespace phishgraph
