#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>
#include <set>

#include "phishgraph/graph.hpp"
#include "synthetic_corpus.hpp"

using namespace phishgraph;

namespace {

const StopWordModel kNoStopWords{};

std::set<std::pair<std::string, std::string>> edge_set(const HeteroGraph& g) {
  std::set<std::pair<std::string, std::string>> out;
  for (VertexIndex v = 0; v < g.vertex_count(); ++v) {
    for (VertexIndex u : g.neighbors(v)) {
      const auto a = g.vertex(v).str();
      const auto b = g.vertex(u).str();
      out.emplace(std::min(a, b), std::max(a, b));
    }
  }
  return out;
}

struct Small {
  std::vector<UrlRecord> train{{"http://bad.com/login", TruthLabel::Phishy, {}},
                               {"http://good.org/news", TruthLabel::Benign, {}}};
  std::vector<UrlRecord> test{{"http://bad.com/verify", TruthLabel::Phishy, {}}};
  std::vector<ResolutionRecord> resolutions{{"bad.com", "10.0.0.1", {}},
                                            {"good.org.", "10.0.0.2", {}},
                                            {"nowhere.net", "10.0.0.3", {}},
                                            {"bad.com", "not-an-ip", {}}};
  std::vector<NameServerRecord> nameservers{{"BAD.com", "ns1.shady.net"}};
};

}  // namespace

TEST_CASE("topology stores both directions and drops loops and duplicates") {
  const auto t = Topology::from_edges(4, {{0, 1}, {1, 0}, {2, 2}, {1, 2}, {3, 1}});
  CHECK(t.edge_count() == 3);
  CHECK(t.directed_edge_count() == 6);
  CHECK(t.degree(1) == 3);
  CHECK(t.adjacent(0, 1));
  CHECK(t.adjacent(1, 0));
  CHECK_FALSE(t.adjacent(0, 2));
  for (std::size_t s = 0; s < t.directed_edge_count(); ++s) {
    CHECK(t.reverse(t.reverse(s)) == s);
    const std::size_t r = t.reverse(s);
    CHECK(t.target(r) != t.target(s));
  }
}

TEST_CASE("only typed edges are permitted") {
  CHECK(edge_kind_allowed(VertexKind::Url, VertexKind::Domain));
  CHECK(edge_kind_allowed(VertexKind::Ip, VertexKind::Domain));
  CHECK(edge_kind_allowed(VertexKind::Domain, VertexKind::NameServer));
  CHECK(edge_kind_allowed(VertexKind::Word, VertexKind::Url));
  CHECK_FALSE(edge_kind_allowed(VertexKind::Url, VertexKind::Url));
  CHECK_FALSE(edge_kind_allowed(VertexKind::Url, VertexKind::Ip));
  CHECK_FALSE(edge_kind_allowed(VertexKind::Word, VertexKind::Domain));
  CHECK_THROWS_AS(HeteroGraph({{VertexKind::Url, "a"}, {VertexKind::Ip, "1.1.1.1"}}, {{0, 1}}), Error);
}

TEST_CASE("vertex ids round-trip through text") {
  const VertexId id{VertexKind::NameServer, "ns1.example.com"};
  CHECK(VertexId::parse(id.str()) == id);
  CHECK(VertexId::parse("url:http://a.b/c:d").key == "http://a.b/c:d");
  CHECK_THROWS_AS(VertexId::parse("planet:mars"), Error);
}

TEST_CASE("graph edges from URLs, resolutions and name servers") {
  Small s;
  BuildReport report;
  const auto g = build_graph(s.train, s.test, s.resolutions, s.nameservers, kNoStopWords, &report);
  const auto edges = edge_set(g);

  CHECK(edges.contains({"domain:bad.com", "url:http://bad.com/login"}));
  CHECK(edges.contains({"domain:bad.com", "ip:10.0.0.1"}));
  CHECK(edges.contains({"domain:bad.com", "ns:ns1.shady.net"}));
  CHECK(g.find({VertexKind::Ip, "10.0.0.2"}).has_value());
  CHECK_FALSE(g.find({VertexKind::Ip, "10.0.0.3"}).has_value());
  CHECK(g.find({VertexKind::NameServer, "ns1.shady.net"}).has_value());
  CHECK(g.find({VertexKind::Word, "login"}).has_value());
  CHECK_FALSE(g.find({VertexKind::Word, "http"}).has_value());
  CHECK(report.skipped_resolutions == 1);

  // Shared words link URLs of the same domain through word vertices.
  const auto com = g.at({VertexKind::Word, "com"});
  CHECK(g.topology().degree(com) == 2);

  for (VertexIndex v = 0; v < g.vertex_count(); ++v) {
    for (VertexIndex u : g.neighbors(v)) CHECK(edge_kind_allowed(g.vertex(v).kind, g.vertex(u).kind));
  }
}

TEST_CASE("training URLs are observed and everything else hidden") {
  Small s;
  const auto g = build_graph(s.train, s.test, s.resolutions, s.nameservers, kNoStopWords);
  CHECK(g.observed_label(g.at({VertexKind::Url, "http://bad.com/login"})) == Label::Phishy);
  CHECK(g.observed_label(g.at({VertexKind::Url, "http://good.org/news"})) == Label::Benign);
  CHECK_FALSE(g.is_observed(g.at({VertexKind::Url, "http://bad.com/verify"})));
  CHECK_FALSE(g.is_observed(g.at({VertexKind::Domain, "bad.com"})));
  CHECK(g.count(VertexKind::Url) == 3);
}

TEST_CASE("stop words never become word vertices") {
  Small s;
  StopWordModel model;
  model.stop_words = {"com", "login"};
  const auto g = build_graph(s.train, s.test, s.resolutions, s.nameservers, model);
  CHECK_FALSE(g.find({VertexKind::Word, "com"}).has_value());
  CHECK_FALSE(g.find({VertexKind::Word, "login"}).has_value());
  CHECK(g.find({VertexKind::Word, "verify"}).has_value());
}

TEST_CASE("conflicting training labels count as phishy") {
  std::vector<UrlRecord> train{{"http://x.com/a", TruthLabel::Benign, {}},
                               {"HTTP://X.COM/A", TruthLabel::Phishy, {}}};
  BuildReport report;
  const auto g = build_graph(train, {}, {}, {}, kNoStopWords, &report);
  CHECK(report.label_conflicts == 1);
  CHECK(g.observed_label(g.at({VertexKind::Url, "http://x.com/a"})) == Label::Phishy);
  CHECK(g.count(VertexKind::Url) == 1);
}

TEST_CASE("unparsable URLs are skipped and an edgeless corpus is an error") {
  BuildReport report;
  std::vector<UrlRecord> bad{{"http://", TruthLabel::Phishy, {}}};
  CHECK_THROWS_AS(build_graph(bad, {}, {}, {}, kNoStopWords, &report), Error);
  CHECK(report.skipped_urls == 1);
}

TEST_CASE("property: construction ignores input order") {
  const auto corpus = testing::make_synthetic_corpus(300, 0.4, 5);
  const auto split = split_train_test(corpus.records, 0.7, 5);
  const auto reference = build_graph(split.train, split.test, corpus.resolutions, corpus.nameservers,
                                     kNoStopWords);
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    auto train = split.train;
    auto test = split.test;
    auto res = corpus.resolutions;
    auto ns = corpus.nameservers;
    std::shuffle(train.begin(), train.end(), rng);
    std::shuffle(test.begin(), test.end(), rng);
    std::shuffle(res.begin(), res.end(), rng);
    std::shuffle(ns.begin(), ns.end(), rng);
    CHECK(build_graph(train, test, res, ns, kNoStopWords) == reference);
  }
}

TEST_CASE("blacklists observe domains and IPs as phishy") {
  Small s;
  auto g = build_graph(s.train, s.test, s.resolutions, s.nameservers, kNoStopWords);
  const auto changed = apply_blacklists(g, {"BAD.COM.", "absent.org"}, {"10.0.0.2"});
  CHECK(changed == 2);
  CHECK(g.observed_label(g.at({VertexKind::Domain, "bad.com"})) == Label::Phishy);
  CHECK(g.observed_label(g.at({VertexKind::Ip, "10.0.0.2"})) == Label::Phishy);
  CHECK(apply_blacklists(g, {"bad.com"}, {}) == 0);
}

TEST_CASE("stratified split") {
  std::vector<UrlRecord> records;
  for (int i = 0; i < 10; ++i) records.push_back({"http://p" + std::to_string(i) + ".com", TruthLabel::Phishy, {}});
  for (int i = 0; i < 30; ++i) records.push_back({"http://b" + std::to_string(i) + ".com", TruthLabel::Benign, {}});
  records.push_back({"http://unknown.com", TruthLabel::Unknown, {}});

  const auto split = split_train_test(records, 0.8, 3);
  auto count = [](const std::vector<UrlRecord>& rows, TruthLabel l) {
    return std::count_if(rows.begin(), rows.end(), [l](const UrlRecord& r) { return r.label == l; });
  };
  CHECK(count(split.train, TruthLabel::Phishy) == 8);
  CHECK(count(split.train, TruthLabel::Benign) == 24);
  CHECK(count(split.test, TruthLabel::Unknown) == 1);
  CHECK(split.train.size() + split.test.size() == records.size());
  CHECK(split_train_test(records, 0.8, 3).train == split.train);
  CHECK(split_train_test(records, 0.8, 4).train != split.train);

  // Both sides keep a row of each class even at extreme ratios.
  const auto tiny = split_train_test(records, 0.01, 1);
  CHECK(count(tiny.train, TruthLabel::Phishy) == 1);
  CHECK_THROWS_AS(split_train_test(records, 1.0, 1), Error);
  CHECK_THROWS_AS(split_train_test({records.front()}, 0.5, 1), Error);
}

TEST_CASE("graph export and import round-trip") {
  Small s;
  auto g = build_graph(s.train, s.test, s.resolutions, s.nameservers, kNoStopWords);
  apply_blacklists(g, {}, {"10.0.0.1"});
  const auto dir = std::filesystem::temp_directory_path() / "phishgraph_graph_test";
  std::filesystem::create_directories(dir);
  export_graph(g, dir / "graph.tsv", dir / "graph.json");
  CHECK(import_graph(dir / "graph.tsv", dir / "graph.json") == g);
  std::filesystem::remove_all(dir);
}

TEST_CASE("IP validation") {
  CHECK(is_valid_ip("93.184.216.34"));
  CHECK(is_valid_ip("2001:db8::1"));
  CHECK_FALSE(is_valid_ip("300.1.1.1"));
  CHECK_FALSE(is_valid_ip("example.com"));
}
