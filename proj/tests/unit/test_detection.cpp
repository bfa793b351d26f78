#include <doctest.h>

#include <filesystem>

#include "phishgraph/detection.hpp"
#include "phishgraph/io.hpp"

using namespace phishgraph;
namespace fs = std::filesystem;

namespace {

const fs::path kFixture = fs::path(PHISHGRAPH_DATA_DIR) / "fixture";

DetectionInputs fixture_inputs(std::uint64_t seed = 7) {
  const auto split = split_train_test(io::read_url_records(kFixture / "urls.csv"), 0.8, seed);
  DetectionInputs in;
  in.train = split.train;
  in.test = split.test;
  in.resolutions = read_resolutions(kFixture / "resolutions.csv");
  in.nameservers = read_nameservers(kFixture / "nameservers.csv");
  return in;
}

DetectionConfig small_walks(Method method) {
  DetectionConfig cfg;
  cfg.method = method;
  cfg.walk.dim = 32;
  cfg.walk.epochs = 2;
  cfg.walk.seed = 7;
  return cfg;
}

}  // namespace

TEST_CASE("method names") {
  CHECK(parse_method("bpe") == Method::Bpe);
  CHECK(parse_method("POL") == Method::Polonium);
  CHECK(parse_method("polonium") == Method::Polonium);
  CHECK(parse_method("rwr") == Method::Rwr);
  CHECK_FALSE(parse_method("svm").has_value());
  CHECK(to_string(Method::Polonium) == "pol");
}

TEST_CASE("every method separates the fixture") {
  const auto in = fixture_inputs();
  for (Method m : {Method::Bpe, Method::Polonium, Method::Rwr}) {
    CAPTURE(to_string(m));
    const auto result = run_detection(in, small_walks(m));
    REQUIRE(result.metrics.has_value());
    CHECK(result.metrics->f1 == 1.0);
    CHECK(result.predictions.size() == in.test.size());
    CHECK(result.embeddings.has_value() == (m == Method::Bpe));
    CHECK_FALSE(result.stop_words.stop_words.empty());
    for (const auto& p : result.predictions) {
      CHECK(p.truth.has_value());
      CHECK(p.predicted == (p.cost_phishy <= p.cost_benign ? Label::Phishy : Label::Benign));
    }
  }
}

TEST_CASE("precomputed embeddings reproduce a trained run") {
  const auto in = fixture_inputs();
  auto cfg = small_walks(Method::Bpe);
  const auto first = run_detection(in, cfg);
  cfg.precomputed_embeddings = first.embeddings;
  cfg.walk.seed = 12345;  // ignored once vectors are supplied
  const auto second = run_detection(in, cfg);
  REQUIRE(first.predictions.size() == second.predictions.size());
  for (std::size_t i = 0; i < first.predictions.size(); ++i) {
    CHECK(first.predictions[i].cost_phishy == second.predictions[i].cost_phishy);
    CHECK(first.predictions[i].predicted == second.predictions[i].predicted);
  }
}

TEST_CASE("mean vectors from external URL embeddings") {
  const auto in = fixture_inputs();
  auto cfg = small_walks(Method::Bpe);
  const auto trained = run_detection(in, cfg);

  // Export only the URL rows, then let the other entities take neighbour means.
  EmbeddingTable urls(trained.graph.vertex_count(), trained.embeddings->dim());
  for (VertexIndex v = 0; v < trained.graph.vertex_count(); ++v) {
    if (trained.graph.vertex(v).kind == VertexKind::Url) urls.set(v, trained.embeddings->row(v));
  }
  const auto path = fs::temp_directory_path() / "phishgraph_url_vectors.tsv";
  export_embeddings(trained.graph, urls, path);

  cfg.embedding_source = EmbeddingSource::MeanVectors;
  cfg.url_vectors = path;
  const auto result = run_detection(in, cfg);
  REQUIRE(result.metrics.has_value());
  CHECK(result.metrics->f1 >= 0.5);
  fs::remove(path);

  cfg.url_vectors.clear();
  CHECK_THROWS_AS(run_detection(in, cfg), Error);
}

TEST_CASE("RBF bandwidth defaults to the median pair distance") {
  auto cfg = small_walks(Method::Bpe);
  cfg.compatibility.sim_kind = SimilarityKind::Rbf;
  const auto auto_sigma = run_detection(fixture_inputs(), cfg);
  CHECK(auto_sigma.sigma > 0);
  CHECK(auto_sigma.sigma == doctest::Approx(median_pair_distance(*auto_sigma.embeddings, 10000, cfg.walk.seed)));
  cfg.sigma = 0.25;
  CHECK(run_detection(fixture_inputs(), cfg).sigma == 0.25);
}

TEST_CASE("unlabelled test rows are predicted but not scored") {
  auto in = fixture_inputs();
  for (auto& r : in.test) r.label = TruthLabel::Unknown;
  const auto result = run_detection(in, small_walks(Method::Polonium));
  CHECK_FALSE(result.metrics.has_value());
  CHECK(result.predictions.size() == in.test.size());
}

TEST_CASE("a corpus without parsable URLs is rejected") {
  DetectionInputs in;
  in.train = {{"http://", TruthLabel::Phishy, {}}};
  CHECK_THROWS_AS(run_detection(in, small_walks(Method::Polonium)), Error);
}
