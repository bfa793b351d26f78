#include "phishgraph/embedding.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <thread>

#include "phishgraph/io.hpp"

namespace phishgraph {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b);
}

// Knuth MMIX LCG; the high bits are used for sampling in the inner training loop.
using FastRng = std::linear_congruential_engine<std::uint64_t, 6364136223846793005ULL,
                                                1442695040888963407ULL, 0>;

// Eight independent partial sums keep the reduction order fixed while
// letting the compiler vectorise it.
inline float dot_product(const float* a, const float* b, std::size_t n) {
  float lanes[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    for (std::size_t l = 0; l < 8; ++l) lanes[l] += a[k + l] * b[k + l];
  }
  float tail = 0;
  for (; k < n; ++k) tail += a[k] * b[k];
  return ((lanes[0] + lanes[4]) + (lanes[1] + lanes[5])) + ((lanes[2] + lanes[6]) + (lanes[3] + lanes[7])) +
         tail;
}

inline std::uint32_t fast_index(FastRng& rng, std::uint32_t n) {
  return static_cast<std::uint32_t>(((rng() >> 32) * static_cast<std::uint64_t>(n)) >> 32);
}

constexpr int kSigmoidTableSize = 1000;
constexpr float kMaxExp = 6.0f;

struct SigmoidTable {
  std::array<float, kSigmoidTableSize + 1> values{};
  SigmoidTable() {
    for (int i = 0; i <= kSigmoidTableSize; ++i) {
      const double x = (static_cast<double>(i) / kSigmoidTableSize * 2 - 1) * kMaxExp;
      values[static_cast<std::size_t>(i)] = static_cast<float>(1.0 / (1.0 + std::exp(-x)));
    }
  }
  float operator()(float x) const {
    const int i = static_cast<int>((x + kMaxExp) * (kSigmoidTableSize / kMaxExp / 2));
    return values[static_cast<std::size_t>(std::clamp(i, 0, kSigmoidTableSize))];
  }
};

// Negative-sampling table proportional to degree^0.75 (walk visit frequency
// on an undirected graph is proportional to degree).
std::vector<VertexIndex> build_negative_table(const Topology& topology) {
  const std::size_t n = topology.vertex_count();
  double total = 0;
  for (VertexIndex v = 0; v < n; ++v) total += std::pow(static_cast<double>(topology.degree(v)), 0.75);
  const std::size_t size = std::max<std::size_t>(1'000'000, 20 * n);
  std::vector<VertexIndex> table;
  table.reserve(size);
  double cumulative = 0;
  for (VertexIndex v = 0; v < n; ++v) {
    const double w = std::pow(static_cast<double>(topology.degree(v)), 0.75);
    if (w == 0) continue;
    cumulative += w;
    const auto until = static_cast<std::size_t>(std::llround(cumulative / total * static_cast<double>(size)));
    while (table.size() < until) table.push_back(v);
  }
  return table;
}

class SkipGramTrainer {
 public:
  SkipGramTrainer(const Topology& topology, const WalkConfig& cfg)
      : topology_(topology),
        cfg_(cfg),
        dim_(cfg.dim),
        input_(topology.vertex_count() * cfg.dim),
        output_(topology.vertex_count() * cfg.dim, 0.0f),
        negatives_(build_negative_table(topology)) {
    std::mt19937_64 init(derive_seed(cfg.seed, 0x1417));
    std::uniform_real_distribution<float> uniform(-0.5f, 0.5f);
    for (auto& x : input_) x = uniform(init) / static_cast<float>(dim_);
    for (VertexIndex v = 0; v < topology.vertex_count(); ++v) {
      if (topology.degree(v) > 0) starts_.push_back(v);
    }
  }

  void train() {
    if (starts_.empty() || negatives_.empty()) return;
    // Jobs are (pass, start) pairs; each pass visits every start in its own shuffled order.
    std::vector<std::vector<VertexIndex>> orders(cfg_.walks_per_vertex, starts_);
    for (std::size_t pass = 0; pass < orders.size(); ++pass) {
      std::mt19937_64 rng(derive_seed(cfg_.seed, 0x5A55, pass));
      std::shuffle(orders[pass].begin(), orders[pass].end(), rng);
    }
    const std::size_t jobs = cfg_.walks_per_vertex * starts_.size();
    total_tokens_ = static_cast<double>(cfg_.epochs * jobs * cfg_.walk_length);

    for (std::size_t epoch = 0; epoch < cfg_.epochs; ++epoch) {
      const std::size_t workers = std::max<std::size_t>(1, std::min(cfg_.workers, jobs));
      auto run_range = [&](std::size_t worker, std::size_t begin, std::size_t end) {
        FastRng rng(derive_seed(cfg_.seed, 0xE90C + epoch, worker));
        std::vector<float> scratch(dim_);
        std::uint64_t local_tokens = 0;
        for (std::size_t job = begin; job < end; ++job) {
          const std::size_t pass = job / starts_.size();
          const VertexIndex start = orders[pass][job % starts_.size()];
          const auto walk = random_walk(topology_, start, cfg_.walk_length, cfg_.p, cfg_.q,
                                        derive_seed(cfg_.seed, pass, start));
          const float lr = current_rate();
          train_walk(walk, lr, rng, scratch);
          local_tokens += walk.size();
          if (local_tokens >= 10'000) {
            processed_.fetch_add(local_tokens, std::memory_order_relaxed);
            local_tokens = 0;
          }
        }
        processed_.fetch_add(local_tokens, std::memory_order_relaxed);
      };
      if (workers == 1) {
        run_range(0, 0, jobs);
      } else {
        std::vector<std::jthread> threads;
        for (std::size_t w = 0; w < workers; ++w) {
          threads.emplace_back(run_range, w, jobs * w / workers, jobs * (w + 1) / workers);
        }
      }
    }
  }

  EmbeddingTable table() const {
    EmbeddingTable out(topology_.vertex_count(), dim_);
    for (VertexIndex v = 0; v < topology_.vertex_count(); ++v) {
      auto row = out.mutable_row(v);
      if (topology_.degree(v) == 0) continue;
      for (std::size_t k = 0; k < dim_; ++k) row[k] = static_cast<double>(input_[v * dim_ + k]);
    }
    return out;
  }

 private:
  float current_rate() const {
    const double done = static_cast<double>(processed_.load(std::memory_order_relaxed));
    const double fraction = std::max(1e-4, 1.0 - done / std::max(1.0, total_tokens_));
    return static_cast<float>(cfg_.learning_rate * fraction);
  }

  void prefetch_row(const float* row) const {
    for (std::size_t k = 0; k < dim_; k += 16) __builtin_prefetch(row + k);
  }

  void train_walk(const std::vector<VertexIndex>& walk, float lr, FastRng& rng,
                  std::vector<float>& grad) {
    const auto window = static_cast<std::uint32_t>(cfg_.window);
    const auto table_size = static_cast<std::uint32_t>(negatives_.size());
    std::vector<VertexIndex> targets(cfg_.negatives + 1);
    for (std::size_t i = 0; i < walk.size(); ++i) {
      const VertexIndex center = walk[i];
      targets[0] = center;
      const std::size_t shrink = fast_index(rng, window);
      const std::size_t reach = cfg_.window - shrink;
      const std::size_t lo = i >= reach ? i - reach : 0;
      const std::size_t hi = std::min(walk.size() - 1, i + reach);
      for (std::size_t j = lo; j <= hi; ++j) {
        if (j == i) continue;
        // Draw the negatives up front so their rows can be fetched while the
        // positive pair is processed; the draw order is unchanged.
        for (std::size_t s = 1; s < targets.size(); ++s) {
          targets[s] = negatives_[fast_index(rng, table_size)];
          prefetch_row(&output_[std::size_t{targets[s]} * dim_]);
        }
        float* in = &input_[std::size_t{walk[j]} * dim_];
        std::fill(grad.begin(), grad.end(), 0.0f);
        for (std::size_t s = 0; s < targets.size(); ++s) {
          const VertexIndex target = targets[s];
          if (s > 0 && target == center) continue;
          const float label = s == 0 ? 1.0f : 0.0f;
          float* out = &output_[std::size_t{target} * dim_];
          const float dot = dot_product(in, out, dim_);
          float g;
          if (dot > kMaxExp) {
            g = (label - 1.0f) * lr;
          } else if (dot < -kMaxExp) {
            g = label * lr;
          } else {
            g = (label - sigmoid_(dot)) * lr;
          }
          float* __restrict gk = grad.data();
          for (std::size_t k = 0; k < dim_; ++k) {
            gk[k] += g * out[k];
            out[k] += g * in[k];
          }
        }
        for (std::size_t k = 0; k < dim_; ++k) in[k] += grad[k];
      }
    }
  }

  const Topology& topology_;
  const WalkConfig& cfg_;
  std::size_t dim_;
  std::vector<float> input_;
  std::vector<float> output_;
  std::vector<VertexIndex> negatives_;
  std::vector<VertexIndex> starts_;
  SigmoidTable sigmoid_;
  std::atomic<std::uint64_t> processed_{0};
  double total_tokens_ = 0;
};

}  // namespace

EmbeddingTable::EmbeddingTable(std::size_t rows, std::size_t dim)
    : dim_(dim), data_(rows * dim, 0.0), present_(rows, false) {}

std::span<double> EmbeddingTable::mutable_row(std::size_t v) {
  present_[v] = true;
  return {data_.data() + v * dim_, dim_};
}

void EmbeddingTable::set(std::size_t v, std::span<const double> values) {
  if (values.size() != dim_) throw Error(ErrorCode::InvalidArgument, "embedding dimension mismatch");
  std::copy(values.begin(), values.end(), mutable_row(v).begin());
}

void WalkConfig::validate() const {
  if (dim == 0 || walks_per_vertex == 0 || walk_length == 0 || window == 0 || negatives == 0 ||
      epochs == 0 || workers == 0) {
    throw Error(ErrorCode::InvalidArgument, "walk configuration counts must be positive");
  }
  if (!(p > 0) || !(q > 0) || !(learning_rate > 0)) {
    throw Error(ErrorCode::InvalidArgument, "p, q and learning rate must be positive");
  }
}

std::vector<VertexIndex> random_walk(const Topology& topology, VertexIndex start,
                                     std::size_t length, double p, double q,
                                     std::uint64_t walk_seed) {
  std::vector<VertexIndex> walk;
  walk.reserve(length);
  walk.push_back(start);
  std::mt19937_64 rng(walk_seed);
  const bool uniform = p == 1.0 && q == 1.0;
  const double bound = std::max({1.0 / p, 1.0, 1.0 / q});
  std::uniform_real_distribution<double> coin(0.0, bound);
  while (walk.size() < length) {
    const VertexIndex current = walk.back();
    const auto next = topology.neighbors(current);
    if (next.empty()) break;
    std::uniform_int_distribution<std::size_t> pick(0, next.size() - 1);
    if (uniform || walk.size() < 2) {
      walk.push_back(next[pick(rng)]);
      continue;
    }
    // node2vec second-order step by rejection against the largest bias.
    const VertexIndex previous = walk[walk.size() - 2];
    while (true) {
      const VertexIndex candidate = next[pick(rng)];
      double weight = 1.0 / q;
      if (candidate == previous) {
        weight = 1.0 / p;
      } else if (topology.adjacent(candidate, previous)) {
        weight = 1.0;
      }
      if (coin(rng) < weight) {
        walk.push_back(candidate);
        break;
      }
    }
  }
  return walk;
}

EmbeddingTable train_embeddings(const Topology& topology, const WalkConfig& config) {
  config.validate();
  SkipGramTrainer trainer(topology, config);
  trainer.train();
  return trainer.table();
}

EmbeddingTable train_embeddings(const HeteroGraph& graph, const WalkConfig& config) {
  return train_embeddings(graph.topology(), config);
}

EmbeddingTable propagate_mean_vectors(const HeteroGraph& graph, const EmbeddingTable& url_vectors,
                                      PropagationReport* report) {
  if (url_vectors.rows() != graph.vertex_count()) {
    throw Error(ErrorCode::InvalidArgument, "URL vector table does not match the graph");
  }
  const std::size_t dim = url_vectors.dim();
  EmbeddingTable out(graph.vertex_count(), dim);
  for (VertexIndex v = 0; v < graph.vertex_count(); ++v) {
    if (graph.vertex(v).kind != VertexKind::Url) continue;
    if (!url_vectors.has(v)) throw Error(ErrorCode::MissingEmbedding, graph.vertex(v).str());
    out.set(v, url_vectors.row(v));
  }

  std::size_t orphans = 0;
  auto average = [&](VertexKind kind, VertexKind source) {
    for (VertexIndex v = 0; v < graph.vertex_count(); ++v) {
      if (graph.vertex(v).kind != kind) continue;
      std::vector<double> sum(dim, 0.0);
      std::size_t count = 0;
      for (VertexIndex u : graph.neighbors(v)) {
        if (graph.vertex(u).kind != source || !out.has(u)) continue;
        auto r = out.row(u);
        for (std::size_t k = 0; k < dim; ++k) sum[k] += r[k];
        ++count;
      }
      auto row = out.mutable_row(v);
      if (count == 0) {
        ++orphans;
        continue;
      }
      for (std::size_t k = 0; k < dim; ++k) row[k] = sum[k] / static_cast<double>(count);
    }
  };
  average(VertexKind::Domain, VertexKind::Url);
  average(VertexKind::Ip, VertexKind::Domain);
  average(VertexKind::NameServer, VertexKind::Domain);
  average(VertexKind::Word, VertexKind::Url);
  if (report) report->orphans = orphans;
  return out;
}

Similarity similarity(std::span<const double> x, std::span<const double> y, SimilarityKind kind,
                      double sigma) {
  if (x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "vector dimensions differ");
  if (kind == SimilarityKind::Rbf) {
    if (!(sigma > 0)) throw Error(ErrorCode::InvalidArgument, "RBF sigma must be positive");
    double d2 = 0;
    for (std::size_t k = 0; k < x.size(); ++k) d2 += (x[k] - y[k]) * (x[k] - y[k]);
    return {std::exp(-d2 / (2 * sigma * sigma)), false};
  }
  double dot = 0;
  double nx = 0;
  double ny = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    dot += x[k] * y[k];
    nx += x[k] * x[k];
    ny += y[k] * y[k];
  }
  if (nx == 0 || ny == 0) return {0.0, true};
  return {std::clamp(dot / (std::sqrt(nx) * std::sqrt(ny)), 0.0, 1.0), false};
}

double median_pair_distance(const EmbeddingTable& table, std::size_t samples, std::uint64_t seed) {
  std::vector<std::size_t> rows;
  for (std::size_t v = 0; v < table.rows(); ++v) {
    if (table.has(v)) rows.push_back(v);
  }
  if (rows.size() < 2 || samples == 0) return 1.0;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, rows.size() - 1);
  std::vector<double> distances;
  distances.reserve(samples);
  while (distances.size() < samples) {
    const std::size_t a = rows[pick(rng)];
    const std::size_t b = rows[pick(rng)];
    if (a == b) continue;
    auto x = table.row(a);
    auto y = table.row(b);
    double d2 = 0;
    for (std::size_t k = 0; k < x.size(); ++k) d2 += (x[k] - y[k]) * (x[k] - y[k]);
    distances.push_back(std::sqrt(d2));
  }
  auto mid = distances.begin() + static_cast<std::ptrdiff_t>(distances.size() / 2);
  std::nth_element(distances.begin(), mid, distances.end());
  return *mid > 0 ? *mid : 1.0;
}

void export_embeddings(const HeteroGraph& graph, const EmbeddingTable& table,
                       const std::filesystem::path& path) {
  auto out = io::open_output(path);
  out << "kind:key\tdim";
  for (std::size_t k = 1; k <= table.dim(); ++k) out << "\tv" << k;
  out << '\n';
  std::array<char, 32> buffer{};
  for (VertexIndex v = 0; v < table.rows(); ++v) {
    if (!table.has(v)) continue;
    out << graph.vertex(v).str() << '\t' << table.dim();
    for (double x : table.row(v)) {
      auto [end, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), x);
      out << '\t' << std::string_view(buffer.data(), static_cast<std::size_t>(end - buffer.data()));
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing '" + path.string() + "'");
}

EmbeddingTable import_embeddings(const HeteroGraph& graph, const std::filesystem::path& path) {
  auto in = io::open_input(path);
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> dim;
  EmbeddingTable table;
  auto fail = [&](const std::string& why) {
    return Error(ErrorCode::MalformedRecord, path.string() + ":" + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.starts_with("kind:key")) continue;
    std::vector<std::string_view> cols;
    std::string_view rest = line;
    while (true) {
      const std::size_t tab = rest.find('\t');
      cols.push_back(rest.substr(0, tab));
      if (tab == std::string_view::npos) break;
      rest.remove_prefix(tab + 1);
    }
    if (cols.size() < 3) throw fail("expected vertex, dim and values");
    std::size_t row_dim = 0;
    auto [p, ec] = std::from_chars(cols[1].data(), cols[1].data() + cols[1].size(), row_dim);
    if (ec != std::errc() || row_dim != cols.size() - 2) throw fail("dim column disagrees with values");
    if (!dim) {
      dim = row_dim;
      table = EmbeddingTable(graph.vertex_count(), row_dim);
    } else if (*dim != row_dim) {
      throw fail("non-uniform dimension");
    }
    std::vector<double> values(row_dim);
    for (std::size_t k = 0; k < row_dim; ++k) {
      auto col = cols[k + 2];
      auto [q, err] = std::from_chars(col.data(), col.data() + col.size(), values[k]);
      if (err != std::errc() || !std::isfinite(values[k])) throw fail("bad value");
    }
    if (auto v = graph.find(VertexId::parse(cols[0]))) table.set(*v, values);
  }
  if (!dim) throw Error(ErrorCode::MalformedRecord, path.string() + " has no vectors");
  return table;
}

}  // namespace phishgraph
