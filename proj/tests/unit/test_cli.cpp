#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "phishgraph/io.hpp"

using namespace phishgraph;
namespace fs = std::filesystem;

namespace {

const fs::path kFixture = fs::path(PHISHGRAPH_DATA_DIR) / "fixture";

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::vector<std::string> corpus_args() {
  return {"--input", (kFixture / "urls.csv").string(), "--resolutions",
          (kFixture / "resolutions.csv").string(), "--nameservers",
          (kFixture / "nameservers.csv").string(), "--seed", "7"};
}

std::vector<std::string> quick_walks() { return {"--dim", "16", "--walks", "4", "--epochs", "1"}; }

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(io::read_file(p)); }

}  // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"frobnicate"}).code == cli::kExitUsage);
  CHECK(run({"segment", "--out", "/tmp/x"}).code == cli::kExitUsage);
  CHECK(run({"pipeline", "--input", "x", "--out", "/tmp/x", "--mode", "svm"}).code == cli::kExitUsage);
  CHECK(run({"--help"}).code == cli::kExitOk);
  CHECK(run({"--version"}).code == cli::kExitOk);
}

TEST_CASE("an empty input file is a data error") {
  TempDir dir("phishgraph_cli_empty");
  std::ofstream(dir.path / "empty.txt") << "";
  const auto r = run({"segment", "--input", (dir.path / "empty.txt").string(), "--out", (dir.path / "o").string()});
  CHECK(r.code == cli::kExitData);
  CHECK(run({"segment", "--input", (dir.path / "missing.txt").string(), "--out", (dir.path / "o").string()}).code ==
        cli::kExitData);
}

TEST_CASE("segment writes words and stop words") {
  TempDir dir("phishgraph_cli_segment");
  const auto r = run({"segment", "--input", (kFixture / "urls.csv").string(), "--out", dir.path.string()});
  REQUIRE(r.code == cli::kExitOk);
  const auto stop = read_json(dir.path / "stop_words.json");
  CHECK(stop.contains("threshold_frequency"));
  const auto csv = io::read_lines(dir.path / "segments.csv");
  CHECK(csv.front() == "url,part,word");
  CHECK(csv.size() > 40);
}

TEST_CASE("features writes one row per URL") {
  TempDir dir("phishgraph_cli_features");
  const auto r = run({"features", "--input", (kFixture / "urls.csv").string(), "--out", dir.path.string()});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(io::read_lines(dir.path / "features.csv").size() == 41);
}

TEST_CASE("pipeline is reproducible down to the manifest") {
  TempDir a("phishgraph_cli_pipe_a"), b("phishgraph_cli_pipe_b");
  const auto args = concat(concat({"pipeline"}, corpus_args()), quick_walks());
  REQUIRE(run(concat(args, {"--out", a.path.string()})).code == cli::kExitOk);
  REQUIRE(run(concat(args, {"--out", b.path.string()})).code == cli::kExitOk);
  CHECK(io::read_file(a.path / "manifest.json") == io::read_file(b.path / "manifest.json"));

  const auto manifest = read_json(a.path / "manifest.json");
  for (const auto& [name, digest] : manifest["outputs"].items()) {
    CHECK(io::sha256_file(a.path / name) == digest.get<std::string>());
  }
  CHECK(manifest["inputs"]["input"]["sha256"] == io::sha256_file(kFixture / "urls.csv"));
  CHECK(read_json(a.path / "metrics.json")["f1"] == 1.0);
  const auto timings = read_json(a.path / "timings.json");
  CHECK(timings["embedding_ms"].get<double>() > 0);
  CHECK(timings["embedding_cached"] == false);

  // A rerun into the same directory reuses cached vectors and changes nothing.
  REQUIRE(run(concat(args, {"--out", a.path.string()})).code == cli::kExitOk);
  CHECK(io::read_file(a.path / "manifest.json") == io::read_file(b.path / "manifest.json"));
  CHECK(read_json(a.path / "timings.json")["embedding_cached"] == true);
}

TEST_CASE("config files fill in flags the command line leaves out") {
  TempDir dir("phishgraph_cli_config");
  std::ofstream(dir.path / "run.cfg") << "# quick run\nmode = pol\nseed = 3\nno-stop-words = true\n";
  const auto args = concat(concat({"pipeline"}, corpus_args()),
                           {"--config", (dir.path / "run.cfg").string(), "--out", (dir.path / "o").string()});
  REQUIRE(run(args).code == cli::kExitOk);
  const auto config = read_json(dir.path / "o" / "manifest.json")["config"];
  CHECK(config["mode"] == "pol");
  CHECK(config["seed"] == 7);  // the command line wins
  CHECK(config["no-stop-words"] == true);

  std::ofstream(dir.path / "bad.cfg") << "colour = blue\n";
  CHECK(run(concat(concat({"pipeline"}, corpus_args()),
                   {"--config", (dir.path / "bad.cfg").string(), "--out", (dir.path / "o2").string()}))
            .code == cli::kExitUsage);
}

TEST_CASE("stage commands chain build, embed, infer and eval") {
  TempDir dir("phishgraph_cli_stages");
  const auto out = dir.path.string();
  REQUIRE(run(concat(concat({"build"}, corpus_args()), {"--out", out + "/build"})).code == cli::kExitOk);
  CHECK(fs::exists(dir.path / "build" / "graph.tsv"));
  CHECK(fs::exists(dir.path / "build" / "split" / "test.csv"));
  REQUIRE(run(concat({"embed", "--graph", out + "/build", "--out", out + "/embed"}, quick_walks())).code ==
          cli::kExitOk);
  REQUIRE(run({"infer", "--graph", out + "/build", "--embeddings", out + "/embed/embeddings.tsv", "--out",
               out + "/infer"})
              .code == cli::kExitOk);
  REQUIRE(run({"infer", "--graph", out + "/build", "--mode", "rwr", "--out", out + "/rwr"}).code == cli::kExitOk);
  REQUIRE(run({"eval", "--predictions", out + "/infer/predictions.csv", "--truth",
               out + "/build/split/test.csv", "--out", out + "/eval"})
              .code == cli::kExitOk);
  CHECK(read_json(dir.path / "eval" / "metrics.json")["f1"] == 1.0);
  CHECK(run({"infer", "--graph", out + "/build", "--out", out + "/nobpe"}).code != cli::kExitOk);
}

TEST_CASE("evade and compare") {
  TempDir dir("phishgraph_cli_evade");
  const auto out = dir.path.string();
  REQUIRE(run({"evade", "--input", (kFixture / "urls.csv").string(), "--evasion", "m7", "--evasion-ratio", "1",
               "--seed", "7", "--out", out + "/evade"})
              .code == cli::kExitOk);
  CHECK(io::read_lines(dir.path / "evade" / "evasion_log.jsonl").size() == 4);

  REQUIRE(run(concat(concat({"compare"}, corpus_args()),
                     concat(quick_walks(), {"--modes", "bpe,pol,rwr", "--evasions", "none,m1", "--evasion-ratio",
                                            "1", "--out", out + "/compare"})))
              .code == cli::kExitOk);
  const auto rows = io::read_lines(dir.path / "compare" / "comparison.csv");
  CHECK(rows.size() == 7);
}
