#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "phishgraph/core.hpp"
#include "phishgraph/url_lexer.hpp"

namespace phishgraph {

using VertexIndex = std::uint32_t;

/// Undirected graph in CSR form. Every undirected edge appears as two
/// directed slots; `reverse(e)` is the slot of the opposite direction.
class Topology {
 public:
  Topology() = default;

  /// Builds from an undirected edge list. Self loops and duplicates are dropped.
  static Topology from_edges(std::size_t vertex_count,
                             std::vector<std::pair<VertexIndex, VertexIndex>> edges);

  std::size_t vertex_count() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t directed_edge_count() const { return targets_.size(); }
  std::size_t edge_count() const { return targets_.size() / 2; }

  std::size_t degree(VertexIndex v) const { return offsets_[v + 1] - offsets_[v]; }
  std::size_t first_slot(VertexIndex v) const { return offsets_[v]; }
  std::size_t end_slot(VertexIndex v) const { return offsets_[v + 1]; }
  VertexIndex target(std::size_t slot) const { return targets_[slot]; }
  std::size_t reverse(std::size_t slot) const { return reverse_[slot]; }

  std::span<const VertexIndex> neighbors(VertexIndex v) const {
    return {targets_.data() + offsets_[v], degree(v)};
  }
  /// Neighbor lists are sorted, so adjacency tests are logarithmic.
  bool adjacent(VertexIndex u, VertexIndex v) const;

  friend bool operator==(const Topology&, const Topology&) = default;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<VertexIndex> targets_;
  std::vector<std::size_t> reverse_;
};

enum class VertexKind { Url, Domain, Ip, NameServer, Word };

std::string_view to_string(VertexKind kind);
std::optional<VertexKind> parse_vertex_kind(std::string_view text);

struct VertexId {
  VertexKind kind;
  std::string key;

  /// "kind:key", the textual form used by every export.
  std::string str() const;
  static VertexId parse(std::string_view text);

  friend bool operator==(const VertexId&, const VertexId&) = default;
  friend auto operator<=>(const VertexId&, const VertexId&) = default;
};

/// Only Url–Domain, Domain–Ip, Domain–NameServer and Url–Word.
bool edge_kind_allowed(VertexKind a, VertexKind b);

/// Heterogeneous network of URLs and their entities. Immutable after
/// construction apart from blacklist observation.
class HeteroGraph {
 public:
  HeteroGraph() = default;
  /// Validates edge kinds and canonicalises vertex order by (kind, key).
  HeteroGraph(std::vector<VertexId> vertices,
              const std::vector<std::pair<VertexIndex, VertexIndex>>& edges);

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t edge_count() const { return topology_.edge_count(); }
  const Topology& topology() const { return topology_; }
  const VertexId& vertex(VertexIndex v) const { return vertices_[v]; }
  const std::vector<VertexId>& vertices() const { return vertices_; }
  std::optional<VertexIndex> find(const VertexId& id) const;
  VertexIndex at(const VertexId& id) const;

  std::span<const VertexIndex> neighbors(VertexIndex v) const { return topology_.neighbors(v); }

  /// Label of an observed vertex; nullopt for hidden ones.
  const std::optional<Label>& observed_label(VertexIndex v) const { return observed_[v]; }
  bool is_observed(VertexIndex v) const { return observed_[v].has_value(); }
  const std::vector<std::optional<Label>>& observations() const { return observed_; }
  void observe(VertexIndex v, Label label) { observed_[v] = label; }

  std::size_t count(VertexKind kind) const;

  friend bool operator==(const HeteroGraph&, const HeteroGraph&) = default;

 private:
  std::vector<VertexId> vertices_;
  std::unordered_map<std::string, VertexIndex> index_;
  Topology topology_;
  std::vector<std::optional<Label>> observed_;
};

struct ResolutionRecord {
  std::string domain;
  std::string ip;
  std::optional<std::string> timestamp;
};

struct NameServerRecord {
  std::string domain;
  std::string nameserver;
};

bool is_valid_ip(std::string_view ip);

struct BuildReport {
  std::size_t skipped_urls = 0;
  std::size_t skipped_resolutions = 0;
  std::size_t skipped_nameservers = 0;
  std::size_t label_conflicts = 0;
};

/// Builds the network. Labelled training URLs become observed; test URLs and
/// every non-URL entity stay hidden. A URL string present in both sets is
/// treated as training. Throws Error(EmptyGraph) when no edge results.
HeteroGraph build_graph(std::span<const UrlRecord> train, std::span<const UrlRecord> test,
                        std::span<const ResolutionRecord> resolutions,
                        std::span<const NameServerRecord> nameservers,
                        const StopWordModel& stop_model, BuildReport* report = nullptr);

/// Domain vertices matching `domains`, and Ip (or IP-literal Domain) vertices
/// matching `ips`, become observed Phishy. Returns how many vertices changed.
std::size_t apply_blacklists(HeteroGraph& graph, const std::unordered_set<std::string>& domains,
                             const std::unordered_set<std::string>& ips);

/// Canonical vertex key for a URL string (lowercased, parse-normalised).
std::string url_key(std::string_view url);

struct TrainTestSplit {
  std::vector<UrlRecord> train;
  std::vector<UrlRecord> test;
};

/// Stratified split; each labelled class contributes round(ratio * n) rows
/// to training, clamped so that both sides keep at least one. Unknown rows
/// go to test. Input order is preserved within each side.
TrainTestSplit split_train_test(const std::vector<UrlRecord>& records, double ratio,
                                std::uint64_t seed);

std::vector<ResolutionRecord> read_resolutions(const std::filesystem::path& path);
std::vector<NameServerRecord> read_nameservers(const std::filesystem::path& path);

/// Edge list TSV ("kind:key\tkind:key", smaller endpoint first) plus a JSON
/// sidecar with counts, label tallies and the observed vertices.
void export_graph(const HeteroGraph& graph, const std::filesystem::path& edges_tsv,
                  const std::filesystem::path& metadata_json);
HeteroGraph import_graph(const std::filesystem::path& edges_tsv,
                         const std::filesystem::path& metadata_json);

}  // namespace phishgraph
