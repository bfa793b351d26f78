#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "phishgraph/comparison.hpp"
#include "phishgraph/detection.hpp"
#include "phishgraph/evasion.hpp"
#include "phishgraph/features.hpp"
#include "phishgraph/io.hpp"

#ifndef PHISHGRAPH_VERSION
#define PHISHGRAPH_VERSION "0.0.0"
#endif

namespace phishgraph::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::string input;
  std::string resolutions;
  std::string nameservers;
  std::string blacklist_domains;
  std::string blacklist_ips;
  std::string char_distribution;
  std::string suspicious_words;
  std::string brands;
  std::string tlds;
  double split = 0.8;
  std::uint64_t seed = 1;
  bool no_stop_words = false;

  std::string embedding = "deepwalk";
  std::string url_vectors;
  std::size_t dim = 128;
  std::size_t walks = 10;
  std::size_t walk_length = 40;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;
  double p = 1.0;
  double q = 1.0;

  std::string sim = "cosine";
  double sigma = 0;  // 0 selects the median-distance heuristic
  double ths_pos = 0.7;
  double ths_neg = 0.7;
  double epsilon = 0.001;
  std::string mode = "bpe";
  std::size_t iterations = 5;
  double restart = 0.15;
  std::size_t rwr_walks = 10'000;
  std::size_t rwr_length = 20;

  std::string evasion;
  double evasion_ratio = 0.1;
  std::vector<std::string> modes{"bpe", "pol"};
  std::vector<std::string> evasions;

  std::string graph;
  std::string embeddings;
  std::string predictions;
  std::string truth;
  std::string out;
  std::size_t workers = 1;
};

// ---- option groups ---------------------------------------------------------

void add_common(CLI::App* app, Options& o) {
  app->add_option("--config", o.config, "key=value file; command-line flags take precedence");
  app->add_option("--out", o.out, "Output directory")->required();
  app->add_option("--workers", o.workers, "Parallelism cap; 1 is bitwise reproducible")
      ->check(CLI::PositiveNumber);
}

void add_corpus(CLI::App* app, Options& o) {
  app->add_option("--input", o.input, "URL list or CSV (url,label[,timestamp])")->required();
  app->add_option("--resolutions", o.resolutions, "domain,ip[,timestamp] CSV");
  app->add_option("--nameservers", o.nameservers, "domain,nameserver CSV");
  app->add_option("--blacklist-domains", o.blacklist_domains, "One domain per line");
  app->add_option("--blacklist-ips", o.blacklist_ips, "One IP per line");
  app->add_option("--split", o.split, "Training fraction per class")->check(CLI::Range(0.0, 1.0));
  app->add_option("--seed", o.seed, "Seed for every random choice");
  app->add_flag("--no-stop-words", o.no_stop_words, "Keep every word vertex");
}

void add_embedding(CLI::App* app, Options& o) {
  app->add_option("--embedding", o.embedding, "Vertex embedding source")
      ->check(CLI::IsMember({"deepwalk", "mean"}));
  app->add_option("--url-vectors", o.url_vectors, "URL vectors TSV for --embedding mean");
  app->add_option("--dim", o.dim, "Embedding dimension")->check(CLI::PositiveNumber);
  app->add_option("--walks", o.walks, "Walks per vertex")->check(CLI::PositiveNumber);
  app->add_option("--walk-length", o.walk_length)->check(CLI::PositiveNumber);
  app->add_option("--window", o.window)->check(CLI::PositiveNumber);
  app->add_option("--negatives", o.negatives);
  app->add_option("--epochs", o.epochs)->check(CLI::PositiveNumber);
  app->add_option("--learning-rate", o.learning_rate)->check(CLI::PositiveNumber);
  app->add_option("--p", o.p, "node2vec return parameter")->check(CLI::PositiveNumber);
  app->add_option("--q", o.q, "node2vec in-out parameter")->check(CLI::PositiveNumber);
  if (!app->get_option_no_throw("--seed")) app->add_option("--seed", o.seed);
}

void add_inference(CLI::App* app, Options& o, bool with_mode) {
  if (with_mode) {
    app->add_option("--mode", o.mode, "Inference method")->check(CLI::IsMember({"bpe", "pol", "rwr"}));
  }
  app->add_option("--sim", o.sim, "Embedding similarity")->check(CLI::IsMember({"cosine", "rbf"}));
  app->add_option("--sigma", o.sigma, "RBF bandwidth; 0 picks the median pair distance")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--ths-pos", o.ths_pos)->check(CLI::Range(0.0, 1.0));
  app->add_option("--ths-neg", o.ths_neg)->check(CLI::Range(0.0, 1.0));
  app->add_option("--epsilon", o.epsilon, "Polonium homophily strength")->check(CLI::Range(0.0, 0.5));
  app->add_option("--iterations", o.iterations)->check(CLI::PositiveNumber);
  app->add_option("--restart", o.restart, "RWR restart probability")->check(CLI::Range(0.0, 1.0));
  app->add_option("--rwr-walks", o.rwr_walks)->check(CLI::PositiveNumber);
  app->add_option("--rwr-length", o.rwr_length)->check(CLI::PositiveNumber);
  if (!app->get_option_no_throw("--seed")) app->add_option("--seed", o.seed);
}

void add_evasion(CLI::App* app, Options& o, bool required) {
  auto* opt = app->add_option("--evasion", o.evasion, "Evasion method")
                  ->check(CLI::IsMember({"m1", "m2", "m3", "m4", "m5", "m6", "m7"}));
  if (required) opt->required();
  app->add_option("--evasion-ratio", o.evasion_ratio, "Fraction of test phishing URLs to evade")
      ->check(CLI::Range(0.0, 1.0));
}

void add_features(CLI::App* app, Options& o) {
  app->add_option("--char-distribution", o.char_distribution, "char,weight CSV");
  app->add_option("--suspicious-words", o.suspicious_words);
  app->add_option("--brands", o.brands);
  app->add_option("--tlds", o.tlds);
  app->add_option("--blacklist-domains", o.blacklist_domains);
  app->add_option("--blacklist-ips", o.blacklist_ips);
}

// ---- configuration ---------------------------------------------------------

// Appends "--key value" for config entries whose flag is absent from `args`.
std::vector<std::string> merge_config_file(const CLI::App& sub, std::vector<std::string> args) {
  const auto it = std::find_if(args.begin(), args.end(), [](const std::string& a) {
    return a == "--config" || a.starts_with("--config=");
  });
  if (it == args.end()) return args;
  std::string path;
  if (*it == "--config") {
    if (std::next(it) == args.end()) throw UsageError("--config needs a file");
    path = *std::next(it);
  } else {
    path = it->substr(std::string("--config=").size());
  }
  std::set<std::string> given;
  for (const auto& a : args) {
    if (a.starts_with("--")) given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos
                                                                                       : a.find('=') - 2));
  }
  for (const auto& line : io::read_lines(path)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(path + ": expected key=value, got '" + line + "'");
    const std::string key = io::trim(line.substr(0, eq));
    const std::string value = io::trim(line.substr(eq + 1));
    if (key == "config") throw UsageError(path + ": config files cannot nest");
    if (given.contains(key)) continue;
    const CLI::Option* opt = sub.get_option_no_throw("--" + key);
    if (!opt) throw UsageError(path + ": unknown key '" + key + "' for " + sub.get_name());
    if (opt->get_expected_min() == 0) {
      if (value == "true" || value == "1" || value == "yes") args.push_back("--" + key);
    } else {
      args.push_back("--" + key);
      args.push_back(value);
    }
    given.insert(key);
  }
  return args;
}

WalkConfig walk_config(const Options& o) {
  WalkConfig w;
  w.dim = o.dim;
  w.walks_per_vertex = o.walks;
  w.walk_length = o.walk_length;
  w.window = o.window;
  w.negatives = o.negatives;
  w.epochs = o.epochs;
  w.learning_rate = o.learning_rate;
  w.p = o.p;
  w.q = o.q;
  w.seed = o.seed;
  w.workers = o.workers;
  w.validate();
  return w;
}

DetectionConfig detection_config(const Options& o, const std::string& mode) {
  DetectionConfig c;
  c.method = *parse_method(mode);
  c.walk = walk_config(o);
  c.compatibility.sim_kind = o.sim == "rbf" ? SimilarityKind::Rbf : SimilarityKind::Cosine;
  c.compatibility.ths_pos = o.ths_pos;
  c.compatibility.ths_neg = o.ths_neg;
  c.compatibility.epsilon = o.epsilon;
  if (o.sigma > 0) {
    c.sigma = o.sigma;
    c.compatibility.sigma = o.sigma;
  }
  c.min_sum.iterations = o.iterations;
  c.min_sum.workers = o.workers;
  c.rwr = {o.restart, o.rwr_walks, o.rwr_length, o.seed};
  c.remove_stop_words = !o.no_stop_words;
  if (o.embedding == "mean") {
    if (o.url_vectors.empty()) throw UsageError("--embedding mean requires --url-vectors");
    c.embedding_source = EmbeddingSource::MeanVectors;
    c.url_vectors = o.url_vectors;
  }
  return c;
}

json config_json(const Options& o) {
  json c;
  c["input"] = o.input;
  c["resolutions"] = o.resolutions;
  c["nameservers"] = o.nameservers;
  c["blacklist-domains"] = o.blacklist_domains;
  c["blacklist-ips"] = o.blacklist_ips;
  c["char-distribution"] = o.char_distribution;
  c["suspicious-words"] = o.suspicious_words;
  c["brands"] = o.brands;
  c["tlds"] = o.tlds;
  c["split"] = o.split;
  c["seed"] = o.seed;
  c["no-stop-words"] = o.no_stop_words;
  c["embedding"] = o.embedding;
  c["url-vectors"] = o.url_vectors;
  c["dim"] = o.dim;
  c["walks"] = o.walks;
  c["walk-length"] = o.walk_length;
  c["window"] = o.window;
  c["negatives"] = o.negatives;
  c["epochs"] = o.epochs;
  c["learning-rate"] = o.learning_rate;
  c["p"] = o.p;
  c["q"] = o.q;
  c["sim"] = o.sim;
  c["sigma"] = o.sigma;
  c["ths-pos"] = o.ths_pos;
  c["ths-neg"] = o.ths_neg;
  c["epsilon"] = o.epsilon;
  c["mode"] = o.mode;
  c["iterations"] = o.iterations;
  c["restart"] = o.restart;
  c["rwr-walks"] = o.rwr_walks;
  c["rwr-length"] = o.rwr_length;
  c["evasion"] = o.evasion;
  c["evasion-ratio"] = o.evasion_ratio;
  c["modes"] = o.modes;
  c["evasions"] = o.evasions;
  c["graph"] = o.graph;
  c["embeddings"] = o.embeddings;
  c["predictions"] = o.predictions;
  c["truth"] = o.truth;
  c["workers"] = o.workers;
  return c;
}

// ---- artifacts -------------------------------------------------------------

// Tracks the files a command reads and writes for its manifest.
class RunRecord {
 public:
  RunRecord(std::string command, const Options& o) : command_(std::move(command)), options_(o) {}

  void input(const std::string& name, const std::string& path) {
    if (!path.empty()) inputs_.emplace_back(name, path);
  }
  fs::path output(const std::string& relative) {
    outputs_.push_back(relative);
    return fs::path(options_.out) / relative;
  }

  void write_manifest() const {
    json m;
    m["tool"] = "phishgraph";
    m["version"] = PHISHGRAPH_VERSION;
    m["command"] = command_;
    m["config"] = config_json(options_);
    json in = json::object();
    for (const auto& [name, path] : inputs_) in[name] = {{"path", path}, {"sha256", io::sha256_file(path)}};
    m["inputs"] = std::move(in);
    json out = json::object();
    for (const auto& rel : outputs_) out[rel] = io::sha256_file(fs::path(options_.out) / rel);
    m["outputs"] = std::move(out);
    auto file = io::open_output(fs::path(options_.out) / "manifest.json");
    file << m.dump(2) << '\n';
  }

 private:
  std::string command_;
  const Options& options_;
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::vector<std::string> outputs_;
};

void write_json(const fs::path& path, const json& value) {
  auto file = io::open_output(path);
  file << value.dump(2) << '\n';
  if (!file) throw Error(ErrorCode::Io, "failed writing '" + path.string() + "'");
}

json metrics_json(const Metrics& m) {
  return {{"recall_phishy", m.recall_phishy},
          {"precision_phishy", m.precision_phishy},
          {"f1", m.f1},
          {"accuracy", m.accuracy},
          {"fpr", m.fpr},
          {"confusion", {{"tp", m.confusion.tp}, {"fp", m.confusion.fp}, {"tn", m.confusion.tn},
                         {"fn", m.confusion.fn}}},
          {"positive_class", "phishy"},
          {"zero_division", "ratios with a zero denominator are reported as 0"}};
}

json stop_words_json(const StopWordModel& model) {
  std::vector<std::string> words(model.stop_words.begin(), model.stop_words.end());
  std::sort(words.begin(), words.end());
  return {{"degenerate", model.degenerate},
          {"threshold_frequency", model.threshold_frequency},
          {"distinct_words", model.frequency_table.size()},
          {"stop_words", words}};
}

std::vector<UrlRecord> load_records(const Options& o) {
  auto records = io::read_url_records(o.input);
  if (records.empty()) throw Error(ErrorCode::MalformedRecord, o.input + ": no URL records");
  return records;
}

DetectionInputs load_inputs(const Options& o, RunRecord& run) {
  run.input("input", o.input);
  run.input("resolutions", o.resolutions);
  run.input("nameservers", o.nameservers);
  run.input("blacklist-domains", o.blacklist_domains);
  run.input("blacklist-ips", o.blacklist_ips);
  auto split = split_train_test(load_records(o), o.split, o.seed);
  DetectionInputs in;
  in.train = std::move(split.train);
  in.test = std::move(split.test);
  if (!o.resolutions.empty()) in.resolutions = read_resolutions(o.resolutions);
  if (!o.nameservers.empty()) in.nameservers = read_nameservers(o.nameservers);
  if (!o.blacklist_domains.empty()) in.blacklist_domains = io::read_set(o.blacklist_domains);
  if (!o.blacklist_ips.empty()) in.blacklist_ips = io::read_set(o.blacklist_ips);
  return in;
}

EvasionSpec evasion_spec(const Options& o, const std::string& method) {
  if (!(o.evasion_ratio > 0)) throw UsageError("--evasion-ratio must be greater than 0");
  return {*parse_evasion_method(method), o.evasion_ratio, o.seed};
}

void write_predictions(const std::vector<UrlPrediction>& predictions, const fs::path& csv) {
  auto out = io::open_output(csv);
  out.precision(17);
  out << "url,predicted,cost_phishy,cost_benign,truth\n";
  for (const auto& p : predictions) {
    out << io::csv_field(p.vertex.key) << ',' << to_string(p.predicted) << ',' << p.cost_phishy << ','
        << p.cost_benign << ',' << (p.truth ? to_string(*p.truth) : "") << '\n';
  }
}

json inference_json(const std::vector<UrlPrediction>& predictions, const Options& o,
                    std::size_t iterations_run, double sigma) {
  json report;
  report["mode"] = o.mode;
  report["iterations"] = o.iterations;
  report["iterations_run"] = iterations_run;
  report["similarity"] = o.sim;
  report["sigma"] = sigma;
  report["ths_pos"] = o.ths_pos;
  report["ths_neg"] = o.ths_neg;
  json rows = json::array();
  for (const auto& p : predictions) {
    rows.push_back({{"vertex", p.vertex.str()},
                    {"predicted", to_string(p.predicted)},
                    {"cost_phishy", p.cost_phishy},
                    {"cost_benign", p.cost_benign}});
  }
  report["predictions"] = std::move(rows);
  return report;
}

// Embeddings keyed by the digest of everything that determines them.
fs::path embedding_cache_path(const Options& o, const fs::path& graph_tsv, const fs::path& graph_json) {
  std::ostringstream key;
  key << io::sha256_file(graph_tsv) << io::sha256_file(graph_json) << ' ' << o.embedding << ' ';
  if (o.embedding == "mean") {
    key << io::sha256_file(o.url_vectors);
  } else {
    key << o.dim << ' ' << o.walks << ' ' << o.walk_length << ' ' << o.window << ' ' << o.negatives
        << ' ' << o.epochs << ' ' << o.learning_rate << ' ' << o.p << ' ' << o.q << ' ' << o.seed
        << ' ' << o.workers;
  }
  return fs::path(o.out) / "cache" / ("embeddings-" + io::sha256_hex(key.str()).substr(0, 16) + ".tsv");
}

double ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

// ---- commands --------------------------------------------------------------

int cmd_segment(const Options& o, std::ostream& out) {
  RunRecord run("segment", o);
  run.input("input", o.input);
  const auto records = load_records(o);
  StopWordModel model;
  if (!o.no_stop_words) model = fit_corpus_stop_words(records, {});
  auto csv = io::open_output(run.output("segments.csv"));
  csv << "url,part,word\n";
  std::size_t skipped = 0;
  for (const auto& r : records) {
    UrlParts parts;
    try {
      parts = parse_url(r.url);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MalformedUrl) throw;
      ++skipped;
      continue;
    }
    for (const auto& w : apply_stop_words(segment(parts), model).words) {
      csv << io::csv_field(r.url) << ',' << to_string(w.source) << ',' << io::csv_field(w.text) << '\n';
    }
  }
  csv.close();
  json sw = stop_words_json(model);
  sw["skipped_urls"] = skipped;
  write_json(run.output("stop_words.json"), sw);
  run.write_manifest();
  out << "segmented " << records.size() - skipped << " URLs (" << skipped << " skipped), "
      << model.stop_words.size() << " stop words\n";
  return kExitOk;
}

int cmd_features(const Options& o, std::ostream& out) {
  RunRecord run("features", o);
  run.input("input", o.input);
  FeatureResources res = FeatureResources::defaults();
  struct Resource {
    const char* name;
    const std::string& path;
    void (FeatureResources::*load)(const fs::path&);
  };
  const Resource resources[] = {
      {"char-distribution", o.char_distribution, &FeatureResources::load_char_distribution},
      {"suspicious-words", o.suspicious_words, &FeatureResources::load_suspicious_words},
      {"brands", o.brands, &FeatureResources::load_brand_names},
      {"tlds", o.tlds, &FeatureResources::load_tlds}};
  for (const auto& r : resources) {
    if (r.path.empty()) continue;
    run.input(r.name, r.path);
    (res.*r.load)(r.path);
  }
  if (!o.blacklist_domains.empty()) {
    run.input("blacklist-domains", o.blacklist_domains);
    res.blacklist_domains = io::read_set(o.blacklist_domains);
  }
  if (!o.blacklist_ips.empty()) {
    run.input("blacklist-ips", o.blacklist_ips);
    res.blacklist_ips = io::read_set(o.blacklist_ips);
  }
  const auto records = load_records(o);
  export_features(records, res, run.output("features.csv"));
  run.write_manifest();
  out << "wrote " << records.size() << " feature rows\n";
  return kExitOk;
}

struct BuiltGraph {
  HeteroGraph graph;
  StopWordModel stop_words;
  BuildReport report;
  std::size_t blacklisted = 0;
};

BuiltGraph build_network(const DetectionInputs& in, const Options& o) {
  BuiltGraph b;
  if (!o.no_stop_words) b.stop_words = fit_corpus_stop_words(in.train, in.test);
  b.graph = build_graph(in.train, in.test, in.resolutions, in.nameservers, b.stop_words, &b.report);
  b.blacklisted = apply_blacklists(b.graph, in.blacklist_domains, in.blacklist_ips);
  return b;
}

void write_network(const BuiltGraph& b, RunRecord& run) {
  export_graph(b.graph, run.output("graph.tsv"), run.output("graph.json"));
  json sw = stop_words_json(b.stop_words);
  write_json(run.output("stop_words.json"), sw);
  write_json(run.output("build_report.json"),
             {{"vertices", b.graph.vertex_count()},
              {"edges", b.graph.edge_count()},
              {"skipped_urls", b.report.skipped_urls},
              {"skipped_resolutions", b.report.skipped_resolutions},
              {"skipped_nameservers", b.report.skipped_nameservers},
              {"label_conflicts", b.report.label_conflicts},
              {"blacklisted_vertices", b.blacklisted}});
}

int cmd_build(const Options& o, std::ostream& out) {
  RunRecord run("build", o);
  const DetectionInputs in = load_inputs(o, run);
  io::write_url_records(in.train, run.output("split/train.csv"));
  io::write_url_records(in.test, run.output("split/test.csv"));
  const BuiltGraph b = build_network(in, o);
  write_network(b, run);
  run.write_manifest();
  out << "graph: " << b.graph.vertex_count() << " vertices, " << b.graph.edge_count() << " edges\n";
  return kExitOk;
}

HeteroGraph load_graph_dir(const std::string& dir, RunRecord& run) {
  if (dir.empty()) throw UsageError("--graph DIR is required");
  const fs::path tsv = fs::path(dir) / "graph.tsv";
  const fs::path meta = fs::path(dir) / "graph.json";
  run.input("graph.tsv", tsv.string());
  run.input("graph.json", meta.string());
  return import_graph(tsv, meta);
}

int cmd_embed(const Options& o, std::ostream& out) {
  RunRecord run("embed", o);
  const HeteroGraph graph = load_graph_dir(o.graph, run);
  EmbeddingTable table;
  if (o.embedding == "mean") {
    if (o.url_vectors.empty()) throw UsageError("--embedding mean requires --url-vectors");
    run.input("url-vectors", o.url_vectors);
    PropagationReport report;
    table = propagate_mean_vectors(graph, import_embeddings(graph, o.url_vectors), &report);
    out << report.orphans << " orphan vertices received the zero vector\n";
  } else {
    table = train_embeddings(graph, walk_config(o));
  }
  export_embeddings(graph, table, run.output("embeddings.tsv"));
  run.write_manifest();
  out << "embedded " << graph.vertex_count() << " vertices in " << table.dim() << " dimensions\n";
  return kExitOk;
}

int cmd_infer(const Options& o, std::ostream& out) {
  RunRecord run("infer", o);
  const HeteroGraph graph = load_graph_dir(o.graph, run);
  DetectionConfig cfg = detection_config(o, o.mode);
  std::vector<UrlPrediction> predictions;
  std::size_t iterations_run = 0;
  double sigma = cfg.compatibility.sigma;

  std::vector<VertexIndex> targets;
  for (VertexIndex v = 0; v < graph.vertex_count(); ++v) {
    if (graph.vertex(v).kind == VertexKind::Url && !graph.is_observed(v)) targets.push_back(v);
  }
  if (cfg.method == Method::Rwr) {
    const RwrResult r = run_rwr(graph, cfg.rwr);
    for (VertexIndex v : targets) {
      predictions.push_back({graph.vertex(v), r.score[v] > 0.5 ? Label::Phishy : Label::Benign,
                             1.0 - r.score[v], r.score[v], std::nullopt});
    }
  } else {
    CompatibilityConfig compat = cfg.compatibility;
    compat.mode = cfg.method == Method::Bpe ? CompatibilityMode::Bpe : CompatibilityMode::Polonium;
    std::optional<EmbeddingTable> table;
    if (compat.mode == CompatibilityMode::Bpe) {
      if (o.embeddings.empty()) throw UsageError("--mode bpe requires --embeddings");
      run.input("embeddings", o.embeddings);
      table = import_embeddings(graph, o.embeddings);
      if (compat.sim_kind == SimilarityKind::Rbf && !cfg.sigma) {
        compat.sigma = median_pair_distance(*table, 10'000, o.seed);
      }
    }
    sigma = compat.sigma;
    const InferenceState state = run_min_sum(graph, table ? &*table : nullptr, compat, cfg.min_sum);
    iterations_run = state.iterations_run;
    for (VertexIndex v : targets) {
      predictions.push_back({graph.vertex(v), *state.assignment[v], state.costs[v][0],
                             state.costs[v][1], std::nullopt});
    }
  }
  write_json(run.output("inference.json"), inference_json(predictions, o, iterations_run, sigma));
  write_predictions(predictions, run.output("predictions.csv"));
  run.write_manifest();
  out << "labelled " << predictions.size() << " hidden URLs\n";
  return kExitOk;
}

int cmd_evade(const Options& o, std::ostream& out) {
  RunRecord run("evade", o);
  run.input("input", o.input);
  const auto split = split_train_test(load_records(o), o.split, o.seed);
  DetectionInputs in{split.train, split.test, {}, {}, {}, {}};
  const auto [evaded, log] = evade_inputs(in, evasion_spec(o, o.evasion));
  io::write_url_records(evaded.train, run.output("split/train.csv"));
  io::write_url_records(evaded.test, run.output("split/test.csv"));
  {
    auto file = io::open_output(run.output("evasion_log.jsonl"));
    write_evasion_log(log, file);
  }
  run.write_manifest();
  out << "evaded " << log.entries.size() << " of " << log.requested << " selected URLs ("
      << log.skipped.size() << " skipped)\n";
  return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  if (o.predictions.empty() || o.truth.empty()) throw UsageError("--predictions and --truth are required");
  RunRecord run("eval", o);
  run.input("predictions", o.predictions);
  run.input("truth", o.truth);

  std::map<std::string, Label> predicted;
  const auto lines = io::read_lines(o.predictions);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = io::split_csv_line(lines[i]);
    if (fields.size() < 2) throw Error(ErrorCode::MalformedRecord, o.predictions + ": short row");
    const auto label = parse_truth_label(io::trim(fields[1]));
    if (!label || !to_label(*label)) {
      throw Error(ErrorCode::MalformedRecord, o.predictions + ": bad label '" + fields[1] + "'");
    }
    predicted[url_key(fields[0])] = *to_label(*label);
  }
  std::map<std::string, Label> truth;
  std::map<std::string, Label> matched;
  for (const auto& r : io::read_url_records(o.truth)) {
    const auto label = to_label(r.label);
    if (!label) continue;
    const std::string key = url_key(r.url);
    const auto p = predicted.find(key);
    if (p == predicted.end()) continue;  // observed URLs carry no prediction
    truth[key] = *label;
    matched[key] = p->second;
  }
  const Metrics m = score(matched, truth);
  write_json(run.output("metrics.json"), metrics_json(m));
  run.write_manifest();
  out << "f1 " << m.f1 << " accuracy " << m.accuracy << " over " << m.confusion.total() << " URLs\n";
  return kExitOk;
}

int cmd_pipeline(const Options& o, std::ostream& out, std::ostream& err) {
  RunRecord run("pipeline", o);
  const auto start = std::chrono::steady_clock::now();
  DetectionInputs in = load_inputs(o, run);
  io::write_url_records(in.train, run.output("split/train.csv"));
  io::write_url_records(in.test, run.output("split/test.csv"));
  if (!o.evasion.empty()) {
    auto [evaded, log] = evade_inputs(in, evasion_spec(o, o.evasion));
    in = std::move(evaded);
    io::write_url_records(in.test, run.output("split/test_evaded.csv"));
    auto file = io::open_output(run.output("evasion_log.jsonl"));
    write_evasion_log(log, file);
  }

  DetectionConfig cfg = detection_config(o, o.mode);
  const BuiltGraph built = build_network(in, o);
  write_network(built, run);
  double embedding_ms = 0;
  bool embedding_cached = false;
  if (cfg.method == Method::Bpe) {
    const auto embedding_start = std::chrono::steady_clock::now();
    if (o.embedding == "mean") run.input("url-vectors", o.url_vectors);
    const fs::path out_dir(o.out);
    const fs::path cached = embedding_cache_path(o, out_dir / "graph.tsv", out_dir / "graph.json");
    EmbeddingTable table;
    if (fs::exists(cached)) {
      table = import_embeddings(built.graph, cached);
      embedding_cached = true;
    } else {
      table = cfg.embedding_source == EmbeddingSource::MeanVectors
                  ? propagate_mean_vectors(built.graph, import_embeddings(built.graph, o.url_vectors))
                  : train_embeddings(built.graph, cfg.walk);
      export_embeddings(built.graph, table, cached);
      // Rows without vectors are not exported; reload so cached and fresh runs agree.
      table = import_embeddings(built.graph, cached);
    }
    fs::copy_file(cached, run.output("embeddings.tsv"), fs::copy_options::overwrite_existing);
    cfg.precomputed_embeddings = std::move(table);
    embedding_ms = ms_since(embedding_start);
  }

  const DetectionResult result = run_detection(in, cfg);
  write_json(run.output("inference.json"),
             inference_json(result.predictions, o, result.iterations_run, result.sigma));
  write_predictions(result.predictions, run.output("predictions.csv"));
  if (!result.metrics) throw Error(ErrorCode::EmptyTestSet, "no labelled hidden test URL to score");
  write_json(run.output("metrics.json"), metrics_json(*result.metrics));
  run.write_manifest();

  write_json(fs::path(o.out) / "timings.json",
             {{"embedding_ms", embedding_ms + result.embedding_ms},
              {"embedding_cached", embedding_cached},
              {"inference_ms", result.inference_ms},
              {"total_ms", ms_since(start)}});
  const Metrics& m = *result.metrics;
  out << "f1 " << m.f1 << " accuracy " << m.accuracy << " recall " << m.recall_phishy
      << " precision " << m.precision_phishy << " fpr " << m.fpr << '\n';
  err << "inference " << result.inference_ms << " ms, total " << ms_since(start) << " ms\n";
  return kExitOk;
}

int cmd_compare(const Options& o, std::ostream& out) {
  RunRecord run("compare", o);
  const DetectionInputs in = load_inputs(o, run);
  std::vector<DetectionConfig> configs;
  for (const auto& m : o.modes) {
    if (!parse_method(m)) throw UsageError("unknown mode '" + m + "'");
    configs.push_back(detection_config(o, m));
  }
  std::vector<std::optional<EvasionSpec>> specs;
  for (const auto& e : o.evasions) {
    if (e == "none") {
      specs.emplace_back();
    } else if (parse_evasion_method(e)) {
      specs.emplace_back(evasion_spec(o, e));
    } else {
      throw UsageError("unknown evasion '" + e + "'");
    }
  }
  const auto rows = compare_methods(in, configs, specs);
  auto csv = io::open_output(fs::path(o.out) / "comparison.csv");
  write_comparison_csv(rows, csv);
  csv.close();
  // wall_time_ms differs between runs, so the table is not digested.
  run.write_manifest();
  out << "wrote " << rows.size() << " comparison rows\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Phishing URL detection over a heterogeneous URL network"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(PHISHGRAPH_VERSION));

  std::map<CLI::App*, std::function<int()>> commands;
  auto* segment_cmd = app.add_subcommand("segment", "Split URLs into words and fit stop words");
  add_common(segment_cmd, o);
  segment_cmd->add_option("--input", o.input)->required();
  segment_cmd->add_flag("--no-stop-words", o.no_stop_words);
  commands[segment_cmd] = [&] { return cmd_segment(o, out); };

  auto* features_cmd = app.add_subcommand("features", "Compute the 19 lexical features");
  add_common(features_cmd, o);
  features_cmd->add_option("--input", o.input)->required();
  add_features(features_cmd, o);
  commands[features_cmd] = [&] { return cmd_features(o, out); };

  auto* build_cmd = app.add_subcommand("build", "Split the corpus and build the network");
  add_common(build_cmd, o);
  add_corpus(build_cmd, o);
  commands[build_cmd] = [&] { return cmd_build(o, out); };

  auto* embed_cmd = app.add_subcommand("embed", "Embed the vertices of a built network");
  add_common(embed_cmd, o);
  embed_cmd->add_option("--graph", o.graph, "Directory holding graph.tsv and graph.json")->required();
  add_embedding(embed_cmd, o);
  commands[embed_cmd] = [&] { return cmd_embed(o, out); };

  auto* infer_cmd = app.add_subcommand("infer", "Label hidden URLs of a built network");
  add_common(infer_cmd, o);
  infer_cmd->add_option("--graph", o.graph, "Directory holding graph.tsv and graph.json")->required();
  infer_cmd->add_option("--embeddings", o.embeddings, "Embedding TSV (bpe only)");
  add_inference(infer_cmd, o, true);
  commands[infer_cmd] = [&] { return cmd_infer(o, out); };

  auto* evade_cmd = app.add_subcommand("evade", "Rewrite test phishing URLs with benign parts");
  add_common(evade_cmd, o);
  evade_cmd->add_option("--input", o.input)->required();
  evade_cmd->add_option("--split", o.split)->check(CLI::Range(0.0, 1.0));
  evade_cmd->add_option("--seed", o.seed);
  add_evasion(evade_cmd, o, true);
  commands[evade_cmd] = [&] { return cmd_evade(o, out); };

  auto* eval_cmd = app.add_subcommand("eval", "Score predictions against labels");
  add_common(eval_cmd, o);
  eval_cmd->add_option("--predictions", o.predictions, "CSV with url,predicted columns")->required();
  eval_cmd->add_option("--truth", o.truth, "CSV with url,label columns")->required();
  commands[eval_cmd] = [&] { return cmd_eval(o, out); };

  auto* pipeline_cmd = app.add_subcommand("pipeline", "Split, build, embed, infer and score");
  add_common(pipeline_cmd, o);
  add_corpus(pipeline_cmd, o);
  add_embedding(pipeline_cmd, o);
  add_inference(pipeline_cmd, o, true);
  add_evasion(pipeline_cmd, o, false);
  commands[pipeline_cmd] = [&] { return cmd_pipeline(o, out, err); };

  auto* compare_cmd = app.add_subcommand("compare", "Tabulate methods across evasion settings");
  add_common(compare_cmd, o);
  add_corpus(compare_cmd, o);
  add_embedding(compare_cmd, o);
  add_inference(compare_cmd, o, false);
  add_evasion(compare_cmd, o, false);
  compare_cmd->add_option("--modes", o.modes, "Methods to compare")->delimiter(',');
  compare_cmd->add_option("--evasions", o.evasions, "Evasion settings (none, m1..m7)")->delimiter(',');
  commands[compare_cmd] = [&] { return cmd_compare(o, out); };

  try {
    std::vector<std::string> args = raw_args;
    if (!args.empty()) {
      if (CLI::App* sub = app.get_subcommand_no_throw(args.front())) {
        args = merge_config_file(*sub, std::move(args));
      }
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
    for (const auto& [sub, fn] : commands) {
      if (sub->parsed()) return fn();
    }
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace phishgraph::cli
