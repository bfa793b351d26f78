#include "phishgraph/inference.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

namespace phishgraph {
namespace {

LabelPair prior_costs(const LabelPair& prior) {
  return {std::log(1.0 - prior[0]), std::log(1.0 - prior[1])};
}

template <typename Fn>
void parallel_over_vertices(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::jthread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&fn, n, w, workers] { fn(n * w / workers, n * (w + 1) / workers); });
  }
}

}  // namespace

void CompatibilityConfig::validate() const {
  if (mode == CompatibilityMode::Polonium) {
    if (!(epsilon > 0 && epsilon < 0.5)) {
      throw Error(ErrorCode::InvalidArgument, "Polonium epsilon must lie in (0, 0.5)");
    }
    return;
  }
  if (!(ths_pos >= 0 && ths_pos <= 1) || !(ths_neg >= 0 && ths_neg <= 1)) {
    throw Error(ErrorCode::InvalidArgument, "thresholds must lie in [0, 1]");
  }
  if (sim_kind == SimilarityKind::Rbf && !(sigma > 0)) {
    throw Error(ErrorCode::InvalidArgument, "RBF sigma must be positive");
  }
}

EdgePotential potential_from_similarity(double sim, const CompatibilityConfig& cfg) {
  if (cfg.mode == CompatibilityMode::Polonium) {
    // The homophily table is stated as beliefs; 1 - belief turns it into a cost.
    return {1.0 - (0.5 + cfg.epsilon), 1.0 - (0.5 - cfg.epsilon)};
  }
  return {std::min(cfg.ths_pos, 1.0 - sim), std::max(cfg.ths_neg, sim)};
}

double edge_potential(const HeteroGraph& graph, VertexIndex x, VertexIndex y, Label lx, Label ly,
                      const EmbeddingTable& embeddings, const CompatibilityConfig& cfg) {
  if (cfg.mode == CompatibilityMode::Polonium) return potential_from_similarity(0, cfg)(lx, ly);
  for (VertexIndex v : {x, y}) {
    if (v >= embeddings.rows() || !embeddings.has(v)) {
      throw Error(ErrorCode::MissingEmbedding, graph.vertex(v).str());
    }
  }
  const double sim = similarity(embeddings.row(x), embeddings.row(y), cfg.sim_kind, cfg.sigma).value;
  return potential_from_similarity(sim, cfg)(lx, ly);
}

std::vector<EdgePotential> compute_potentials(const HeteroGraph& graph,
                                              const EmbeddingTable* embeddings,
                                              const CompatibilityConfig& cfg) {
  cfg.validate();
  const Topology& t = graph.topology();
  std::vector<EdgePotential> out(t.directed_edge_count());
  const bool needs_vectors = cfg.mode == CompatibilityMode::Bpe;
  if (needs_vectors && (!embeddings || embeddings->rows() != graph.vertex_count())) {
    throw Error(ErrorCode::MissingEmbedding, "BPE potentials need an embedding per vertex");
  }
  for (VertexIndex x = 0; x < graph.vertex_count(); ++x) {
    for (std::size_t slot = t.first_slot(x); slot < t.end_slot(x); ++slot) {
      const VertexIndex y = t.target(slot);
      if (y < x) {
        out[slot] = out[t.reverse(slot)];
        continue;
      }
      double sim = 0;
      if (needs_vectors) {
        for (VertexIndex v : {x, y}) {
          if (!embeddings->has(v)) throw Error(ErrorCode::MissingEmbedding, graph.vertex(v).str());
        }
        sim = similarity(embeddings->row(x), embeddings->row(y), cfg.sim_kind, cfg.sigma).value;
      }
      out[slot] = potential_from_similarity(sim, cfg);
    }
  }
  return out;
}

InferenceState run_min_sum(const Topology& topology,
                           std::span<const std::optional<Label>> observed,
                           std::span<const EdgePotential> potentials,
                           const MinSumOptions& options) {
  const std::size_t n = topology.vertex_count();
  if (observed.size() != n || potentials.size() != topology.directed_edge_count()) {
    throw Error(ErrorCode::InvalidArgument, "observations or potentials do not match the graph");
  }
  if (options.iterations == 0) throw Error(ErrorCode::InvalidArgument, "iterations must be >= 1");
  if (std::none_of(observed.begin(), observed.end(), [](const auto& o) { return o.has_value(); })) {
    throw Error(ErrorCode::NoObservedVertices, "min-sum needs at least one observed vertex");
  }

  InferenceState state;
  state.priors.resize(n);
  std::vector<LabelPair> prior_cost(n);
  for (std::size_t v = 0; v < n; ++v) {
    if (observed[v]) {
      const std::size_t known = label_index(*observed[v]);
      state.priors[v][known] = kObservedPrior;
      state.priors[v][1 - known] = 1.0 - kObservedPrior;
    } else {
      state.priors[v] = {kHiddenPrior, kHiddenPrior};
    }
    prior_cost[v] = prior_costs(state.priors[v]);
  }

  const std::size_t slots = topology.directed_edge_count();
  state.messages.assign(slots, LabelPair{0, 0});
  state.message_active.assign(slots, false);
  for (std::size_t s = 0; s < slots; ++s) state.message_active[s] = !observed[topology.target(s)];
  std::vector<LabelPair> next(slots, LabelPair{0, 0});
  state.costs.assign(n, LabelPair{0, 0});
  state.assignment.assign(n, std::nullopt);

  auto compute_costs = [&](const std::vector<LabelPair>& messages) {
    for (std::size_t x = 0; x < n; ++x) {
      LabelPair cost = prior_cost[x];
      if (!observed[x]) {
        for (std::size_t s = topology.first_slot(x); s < topology.end_slot(x); ++s) {
          const LabelPair& in = messages[topology.reverse(s)];
          cost[0] += in[0];
          cost[1] += in[1];
        }
        state.assignment[x] = cost[0] <= cost[1] ? Label::Phishy : Label::Benign;
      }
      state.costs[x] = cost;
    }
  };

  std::vector<std::optional<Label>> previous_assignment;
  for (std::size_t iter = 0; iter < options.iterations; ++iter) {
    const auto& prev = state.messages;
    parallel_over_vertices(n, options.workers, [&](std::size_t begin, std::size_t end) {
      for (std::size_t x = begin; x < end; ++x) {
        LabelPair incoming{0, 0};
        if (!observed[x]) {
          for (std::size_t s = topology.first_slot(x); s < topology.end_slot(x); ++s) {
            const LabelPair& in = prev[topology.reverse(s)];
            incoming[0] += in[0];
            incoming[1] += in[1];
          }
        }
        for (std::size_t s = topology.first_slot(x); s < topology.end_slot(x); ++s) {
          if (!state.message_active[s]) continue;
          const EdgePotential& psi = potentials[s];
          LabelPair m;
          if (observed[x]) {
            const Label known = *observed[x];
            for (std::size_t l = 0; l < 2; ++l) {
              m[l] = prior_cost[x][label_index(known)] + psi(known, label_at(l));
            }
          } else {
            const LabelPair& back = prev[topology.reverse(s)];
            for (std::size_t l = 0; l < 2; ++l) {
              double best = std::numeric_limits<double>::infinity();
              for (std::size_t lp = 0; lp < 2; ++lp) {
                const double value =
                    prior_cost[x][lp] + psi(label_at(lp), label_at(l)) + (incoming[lp] - back[lp]);
                best = std::min(best, value);
              }
              m[l] = best;
            }
          }
          const double floor = std::min(m[0], m[1]);
          next[s] = {m[0] - floor, m[1] - floor};
        }
      }
    });

    double delta = 0;
    for (std::size_t s = 0; s < slots; ++s) {
      if (!state.message_active[s]) continue;
      delta = std::max({delta, std::fabs(next[s][0] - prev[s][0]), std::fabs(next[s][1] - prev[s][1])});
    }
    std::swap(state.messages, next);
    state.iterations_run = iter + 1;
    compute_costs(state.messages);

    if (options.message_tolerance > 0 && delta <= options.message_tolerance) break;
    if (options.stop_when_stable && previous_assignment == state.assignment) break;
    previous_assignment = state.assignment;
  }
  return state;
}

InferenceState run_min_sum(const HeteroGraph& graph, const EmbeddingTable* embeddings,
                           const CompatibilityConfig& cfg, const MinSumOptions& options) {
  const auto potentials = compute_potentials(graph, embeddings, cfg);
  return run_min_sum(graph.topology(), graph.observations(), potentials, options);
}

std::map<VertexId, Label> classify(const HeteroGraph& graph, const InferenceState& state,
                                   const std::vector<VertexId>& test_urls) {
  if (state.assignment.size() != graph.vertex_count()) {
    throw Error(ErrorCode::InvalidArgument, "inference state does not belong to this graph");
  }
  std::map<VertexId, Label> out;
  for (const auto& id : test_urls) {
    const VertexIndex v = graph.at(id);
    if (graph.is_observed(v)) continue;
    out.emplace(id, *state.assignment[v]);
  }
  return out;
}

RwrResult run_rwr(const HeteroGraph& graph, const RwrConfig& cfg) {
  if (!(cfg.restart > 0 && cfg.restart < 1)) {
    throw Error(ErrorCode::InvalidArgument, "restart probability must lie in (0, 1)");
  }
  const std::size_t n = graph.vertex_count();
  RwrResult result;
  result.phishy_visits.assign(n, 0);
  result.benign_visits.assign(n, 0);
  result.score.assign(n, 0);
  const Topology& t = graph.topology();

  for (Label cls : {Label::Phishy, Label::Benign}) {
    std::vector<VertexIndex> seeds;
    for (VertexIndex v = 0; v < n; ++v) {
      if (graph.vertex(v).kind == VertexKind::Url && graph.observed_label(v) == cls) seeds.push_back(v);
    }
    if (seeds.empty()) continue;
    auto& visits = cls == Label::Phishy ? result.phishy_visits : result.benign_visits;
    std::mt19937_64 rng(cfg.seed * 2 + label_index(cls));
    std::uniform_int_distribution<std::size_t> pick_seed(0, seeds.size() - 1);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (std::size_t w = 0; w < cfg.walks; ++w) {
      const VertexIndex origin = seeds[pick_seed(rng)];
      VertexIndex current = origin;
      for (std::size_t step = 0; step < cfg.walk_length; ++step) {
        if (coin(rng) < cfg.restart || t.degree(current) == 0) {
          current = origin;
        } else {
          std::uniform_int_distribution<std::size_t> pick(0, t.degree(current) - 1);
          current = t.neighbors(current)[pick(rng)];
        }
        visits[current] += 1;
      }
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    const double p = result.phishy_visits[v];
    result.score[v] = p / (p + result.benign_visits[v] + kRwrSmoothing);
  }
  return result;
}

}  // namespace phishgraph
