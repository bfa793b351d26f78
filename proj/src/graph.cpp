#include "phishgraph/graph.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "json.hpp"
#include "phishgraph/io.hpp"

namespace phishgraph {

Topology Topology::from_edges(std::size_t vertex_count,
                              std::vector<std::pair<VertexIndex, VertexIndex>> edges) {
  for (auto& [a, b] : edges) {
    if (a >= vertex_count || b >= vertex_count) {
      throw Error(ErrorCode::InvalidArgument, "edge endpoint out of range");
    }
    if (a > b) std::swap(a, b);
  }
  std::erase_if(edges, [](const auto& e) { return e.first == e.second; });
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  Topology t;
  t.offsets_.assign(vertex_count + 1, 0);
  for (const auto& [a, b] : edges) {
    ++t.offsets_[a + 1];
    ++t.offsets_[b + 1];
  }
  std::partial_sum(t.offsets_.begin(), t.offsets_.end(), t.offsets_.begin());
  t.targets_.resize(edges.size() * 2);
  std::vector<std::size_t> cursor(t.offsets_.begin(), t.offsets_.end() - 1);
  for (const auto& [a, b] : edges) {
    t.targets_[cursor[a]++] = b;
    t.targets_[cursor[b]++] = a;
  }
  for (std::size_t v = 0; v < vertex_count; ++v) {
    std::sort(t.targets_.begin() + static_cast<std::ptrdiff_t>(t.offsets_[v]),
              t.targets_.begin() + static_cast<std::ptrdiff_t>(t.offsets_[v + 1]));
  }
  t.reverse_.resize(t.targets_.size());
  for (std::size_t v = 0; v < vertex_count; ++v) {
    for (std::size_t slot = t.offsets_[v]; slot < t.offsets_[v + 1]; ++slot) {
      const VertexIndex u = t.targets_[slot];
      auto first = t.targets_.begin() + static_cast<std::ptrdiff_t>(t.offsets_[u]);
      auto last = t.targets_.begin() + static_cast<std::ptrdiff_t>(t.offsets_[u + 1]);
      t.reverse_[slot] = static_cast<std::size_t>(
          std::lower_bound(first, last, static_cast<VertexIndex>(v)) - t.targets_.begin());
    }
  }
  return t;
}

bool Topology::adjacent(VertexIndex u, VertexIndex v) const {
  auto n = neighbors(u);
  return std::binary_search(n.begin(), n.end(), v);
}

std::string_view to_string(VertexKind kind) {
  switch (kind) {
    case VertexKind::Url:
      return "url";
    case VertexKind::Domain:
      return "domain";
    case VertexKind::Ip:
      return "ip";
    case VertexKind::NameServer:
      return "ns";
    case VertexKind::Word:
      break;
  }
  return "word";
}

std::optional<VertexKind> parse_vertex_kind(std::string_view text) {
  for (auto kind : {VertexKind::Url, VertexKind::Domain, VertexKind::Ip, VertexKind::NameServer,
                    VertexKind::Word}) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

std::string VertexId::str() const { return std::string(to_string(kind)) + ":" + key; }

VertexId VertexId::parse(std::string_view text) {
  const std::size_t colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::MalformedRecord, "vertex '" + std::string(text) + "' lacks a kind");
  }
  auto kind = parse_vertex_kind(text.substr(0, colon));
  if (!kind) {
    throw Error(ErrorCode::MalformedRecord, "unknown vertex kind in '" + std::string(text) + "'");
  }
  return VertexId{*kind, std::string(text.substr(colon + 1))};
}

bool edge_kind_allowed(VertexKind a, VertexKind b) {
  if (a > b) std::swap(a, b);
  using K = VertexKind;
  return (a == K::Url && b == K::Domain) || (a == K::Domain && b == K::Ip) ||
         (a == K::Domain && b == K::NameServer) || (a == K::Url && b == K::Word);
}

HeteroGraph::HeteroGraph(std::vector<VertexId> vertices,
                         const std::vector<std::pair<VertexIndex, VertexIndex>>& edges) {
  std::vector<VertexIndex> order(vertices.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](VertexIndex a, VertexIndex b) { return vertices[a] < vertices[b]; });
  std::vector<VertexIndex> remap(vertices.size());
  for (VertexIndex i = 0; i < order.size(); ++i) {
    if (i > 0 && vertices[order[i]] == vertices[order[i - 1]]) {
      throw Error(ErrorCode::InvalidArgument, "duplicate vertex " + vertices[order[i]].str());
    }
    remap[order[i]] = i;
  }
  vertices_.reserve(vertices.size());
  for (VertexIndex old : order) vertices_.push_back(std::move(vertices[old]));
  for (VertexIndex i = 0; i < vertices_.size(); ++i) index_.emplace(vertices_[i].str(), i);

  std::vector<std::pair<VertexIndex, VertexIndex>> remapped;
  remapped.reserve(edges.size());
  for (const auto& [a, b] : edges) {
    const VertexIndex ra = remap.at(a);
    const VertexIndex rb = remap.at(b);
    if (!edge_kind_allowed(vertices_[ra].kind, vertices_[rb].kind)) {
      throw Error(ErrorCode::InvalidArgument,
                  "edge kind not allowed: " + vertices_[ra].str() + " - " + vertices_[rb].str());
    }
    remapped.emplace_back(ra, rb);
  }
  topology_ = Topology::from_edges(vertices_.size(), std::move(remapped));
  observed_.assign(vertices_.size(), std::nullopt);
}

std::optional<VertexIndex> HeteroGraph::find(const VertexId& id) const {
  auto it = index_.find(id.str());
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

VertexIndex HeteroGraph::at(const VertexId& id) const {
  if (auto v = find(id)) return *v;
  throw Error(ErrorCode::UnknownVertex, id.str());
}

std::size_t HeteroGraph::count(VertexKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      vertices_.begin(), vertices_.end(), [kind](const VertexId& v) { return v.kind == kind; }));
}

bool is_valid_ip(std::string_view ip) {
  std::string text(ip);
  if (text.size() > 2 && text.front() == '[' && text.back() == ']') {
    text = text.substr(1, text.size() - 2);
  }
  in_addr v4{};
  in6_addr v6{};
  return inet_pton(AF_INET, text.c_str(), &v4) == 1 || inet_pton(AF_INET6, text.c_str(), &v6) == 1;
}

std::string url_key(std::string_view url) { return to_string(parse_url(url)); }

namespace {

std::string dns_name(std::string_view name) {
  std::string out = to_lower_ascii(io::trim(name));
  while (!out.empty() && out.back() == '.') out.pop_back();
  return out;
}

struct GraphAssembler {
  std::vector<VertexId> vertices;
  std::unordered_map<std::string, VertexIndex> index;
  std::vector<std::pair<VertexIndex, VertexIndex>> edges;

  VertexIndex intern(VertexKind kind, const std::string& key) {
    VertexId id{kind, key};
    auto [it, inserted] = index.emplace(id.str(), static_cast<VertexIndex>(vertices.size()));
    if (inserted) vertices.push_back(std::move(id));
    return it->second;
  }
  void connect(VertexIndex a, VertexIndex b) { edges.emplace_back(a, b); }
};

}  // namespace

HeteroGraph build_graph(std::span<const UrlRecord> train, std::span<const UrlRecord> test,
                        std::span<const ResolutionRecord> resolutions,
                        std::span<const NameServerRecord> nameservers,
                        const StopWordModel& stop_model, BuildReport* report) {
  BuildReport local;
  BuildReport& rep = report ? *report : local;

  // std::map keeps the assembly order independent of input order.
  std::map<std::string, UrlParts> urls;
  std::map<std::string, Label> observed;
  auto ingest = [&](const UrlRecord& record, bool training) {
    UrlParts parts;
    try {
      parts = parse_url(record.url);
    } catch (const Error&) {
      ++rep.skipped_urls;
      return;
    }
    std::string key = to_string(parts);
    urls.emplace(key, std::move(parts));
    if (!training) return;
    if (auto label = to_label(record.label)) {
      auto [it, inserted] = observed.emplace(key, *label);
      if (!inserted && it->second != *label) {
        ++rep.label_conflicts;
        it->second = Label::Phishy;
      }
    }
  };
  for (const auto& r : train) ingest(r, true);
  for (const auto& r : test) ingest(r, false);

  GraphAssembler g;
  std::unordered_map<std::string, VertexIndex> domains;
  for (const auto& [key, parts] : urls) {
    const VertexIndex u = g.intern(VertexKind::Url, key);
    const VertexIndex d = g.intern(VertexKind::Domain, parts.host);
    domains.emplace(parts.host, d);
    g.connect(u, d);
    std::set<std::string> words;
    for (const auto& w : apply_stop_words(segment(parts), stop_model).words) words.insert(w.text);
    for (const auto& w : words) g.connect(u, g.intern(VertexKind::Word, w));
  }
  for (const auto& r : resolutions) {
    auto it = domains.find(dns_name(r.domain));
    if (it == domains.end()) continue;
    const std::string ip = to_lower_ascii(io::trim(r.ip));
    if (!is_valid_ip(ip)) {
      ++rep.skipped_resolutions;
      continue;
    }
    g.connect(it->second, g.intern(VertexKind::Ip, ip));
  }
  for (const auto& r : nameservers) {
    auto it = domains.find(dns_name(r.domain));
    if (it == domains.end()) continue;
    const std::string ns = dns_name(r.nameserver);
    if (ns.empty()) {
      ++rep.skipped_nameservers;
      continue;
    }
    g.connect(it->second, g.intern(VertexKind::NameServer, ns));
  }
  if (g.edges.empty()) throw Error(ErrorCode::EmptyGraph, "no edges could be built");

  HeteroGraph graph(std::move(g.vertices), g.edges);
  for (const auto& [key, label] : observed) graph.observe(graph.at({VertexKind::Url, key}), label);
  return graph;
}

std::size_t apply_blacklists(HeteroGraph& graph, const std::unordered_set<std::string>& domains,
                             const std::unordered_set<std::string>& ips) {
  std::size_t changed = 0;
  auto mark = [&](VertexKind kind, const std::string& key) {
    if (auto v = graph.find({kind, key})) {
      if (graph.observed_label(*v) != Label::Phishy) ++changed;
      graph.observe(*v, Label::Phishy);
    }
  };
  for (const auto& d : domains) mark(VertexKind::Domain, dns_name(d));
  for (const auto& ip : ips) {
    const std::string key = to_lower_ascii(io::trim(ip));
    mark(VertexKind::Ip, key);
    mark(VertexKind::Domain, key);
  }
  return changed;
}

TrainTestSplit split_train_test(const std::vector<UrlRecord>& records, double ratio,
                                std::uint64_t seed) {
  if (!(ratio > 0 && ratio < 1)) {
    throw Error(ErrorCode::InvalidArgument, "split ratio must lie in (0, 1)");
  }
  std::vector<bool> in_train(records.size(), false);
  std::mt19937_64 rng(seed);
  for (TruthLabel cls : {TruthLabel::Phishy, TruthLabel::Benign}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (records[i].label == cls) members.push_back(i);
    }
    if (members.size() < 2) {
      throw Error(ErrorCode::InsufficientData,
                  "class '" + std::string(to_string(cls)) + "' has fewer than two URLs");
    }
    std::shuffle(members.begin(), members.end(), rng);
    const auto n = static_cast<long long>(members.size());
    const long long take = std::clamp(std::llround(ratio * static_cast<double>(n)), 1LL, n - 1);
    for (long long i = 0; i < take; ++i) in_train[members[static_cast<std::size_t>(i)]] = true;
  }
  TrainTestSplit split;
  for (std::size_t i = 0; i < records.size(); ++i) {
    (in_train[i] ? split.train : split.test).push_back(records[i]);
  }
  return split;
}

std::vector<ResolutionRecord> read_resolutions(const std::filesystem::path& path) {
  std::vector<ResolutionRecord> out;
  for (const auto& line : io::read_lines(path)) {
    auto fields = io::split_csv_line(line);
    if (fields.size() >= 1 && io::trim(fields[0]) == "domain") continue;
    if (fields.size() < 2) {
      throw Error(ErrorCode::MalformedRecord, path.string() + ": bad row '" + line + "'");
    }
    ResolutionRecord r{io::trim(fields[0]), io::trim(fields[1]), std::nullopt};
    if (fields.size() > 2 && !io::trim(fields[2]).empty()) r.timestamp = io::trim(fields[2]);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<NameServerRecord> read_nameservers(const std::filesystem::path& path) {
  std::vector<NameServerRecord> out;
  for (const auto& line : io::read_lines(path)) {
    auto fields = io::split_csv_line(line);
    if (fields.size() >= 1 && io::trim(fields[0]) == "domain") continue;
    if (fields.size() < 2) {
      throw Error(ErrorCode::MalformedRecord, path.string() + ": bad row '" + line + "'");
    }
    out.push_back({io::trim(fields[0]), io::trim(fields[1])});
  }
  return out;
}

void export_graph(const HeteroGraph& graph, const std::filesystem::path& edges_tsv,
                  const std::filesystem::path& metadata_json) {
  {
    auto out = io::open_output(edges_tsv);
    for (VertexIndex v = 0; v < graph.vertex_count(); ++v) {
      for (VertexIndex u : graph.neighbors(v)) {
        if (v < u) out << graph.vertex(v).str() << '\t' << graph.vertex(u).str() << '\n';
      }
    }
    if (!out) throw Error(ErrorCode::Io, "failed writing '" + edges_tsv.string() + "'");
  }
  nlohmann::ordered_json meta;
  for (auto kind : {VertexKind::Url, VertexKind::Domain, VertexKind::Ip, VertexKind::NameServer,
                    VertexKind::Word}) {
    meta["vertex_counts"][std::string(to_string(kind))] = graph.count(kind);
  }
  meta["edge_count"] = graph.edge_count();
  std::size_t phishy = 0;
  std::size_t benign = 0;
  nlohmann::ordered_json observed = nlohmann::ordered_json::array();
  for (VertexIndex v = 0; v < graph.vertex_count(); ++v) {
    if (const auto& label = graph.observed_label(v)) {
      (*label == Label::Phishy ? phishy : benign) += 1;
      observed.push_back({{"vertex", graph.vertex(v).str()}, {"label", to_string(*label)}});
    }
  }
  meta["observed_labels"] = {{"phishy", phishy}, {"benign", benign}};
  meta["observed_vertices"] = std::move(observed);
  auto out = io::open_output(metadata_json);
  out << meta.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::Io, "failed writing '" + metadata_json.string() + "'");
}

HeteroGraph import_graph(const std::filesystem::path& edges_tsv,
                         const std::filesystem::path& metadata_json) {
  GraphAssembler g;
  auto in = io::open_input(edges_tsv);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorCode::MalformedRecord,
                  edges_tsv.string() + ":" + std::to_string(line_no) + ": expected two columns");
    }
    VertexId a = VertexId::parse(std::string_view(line).substr(0, tab));
    VertexId b = VertexId::parse(std::string_view(line).substr(tab + 1));
    g.connect(g.intern(a.kind, a.key), g.intern(b.kind, b.key));
  }
  if (g.edges.empty()) throw Error(ErrorCode::EmptyGraph, edges_tsv.string() + " has no edges");
  HeteroGraph graph(std::move(g.vertices), g.edges);

  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(io::read_file(metadata_json));
    for (const auto& entry : meta.at("observed_vertices")) {
      const auto label = parse_truth_label(entry.at("label").get<std::string>());
      if (!label || !to_label(*label)) throw Error(ErrorCode::MalformedRecord, "bad label");
      graph.observe(graph.at(VertexId::parse(entry.at("vertex").get<std::string>())),
                    *to_label(*label));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, metadata_json.string() + ": " + e.what());
  }
  return graph;
}

}  // namespace phishgraph
