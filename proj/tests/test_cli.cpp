// Command-line behaviour: exit codes, config handling, determinism and golden files.
// Set COMET_UPDATE_GOLDEN=1 to regenerate the golden files after an intended change.
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "comet/io.hpp"

namespace fs = std::filesystem;
using comet::cli::run;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("comet_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void check_golden(const fs::path& produced, const std::string& name) {
  const fs::path golden = fs::path(GOLDEN_DIR) / name;
  if (std::getenv("COMET_UPDATE_GOLDEN")) fs::copy_file(produced, golden, fs::copy_options::overwrite_existing);
  REQUIRE_MESSAGE(fs::exists(golden), "missing golden file " << golden);
  CHECK_MESSAGE(slurp(produced) == slurp(golden), "differs from golden " << name);
}

// Small end-to-end pipeline shared by several tests.
fs::path pipeline(const std::string& name) {
  const auto dir = fresh(name);
  const auto d = dir.string();
  REQUIRE(cli({"simulate", "--out-dir", d, "--dims", "3", "3", "--true-rank", "2", "--n", "6", "--m", "3",
               "--n-test", "2", "--seed", "11"})
              .code == 0);
  REQUIRE(cli({"fit", "--data", d + "/train.json", "--out", d + "/fit.jsonl", "--rank", "2", "--k", "2", "2",
               "--iters", "60", "--burnin", "20", "--seed", "5"})
              .code == 0);
  REQUIRE(cli({"predict", "--fit", d + "/fit.jsonl", "--data", d + "/test.json", "--out", d + "/pred.csv"}).code == 0);
  REQUIRE(cli({"select", "--fit", d + "/fit.jsonl", "--out", d + "/sel.csv"}).code == 0);
  return dir;
}

}  // namespace

TEST_CASE("help exits cleanly; bad usage is a validation error") {
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({}).code == 2);
  CHECK(cli({"fit"}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
}

TEST_CASE("simulate presets and shapes") {
  const auto dir = fresh("sim");
  const auto d = dir.string();
  REQUIRE(cli({"simulate", "--out-dir", d, "--preset", "full", "--n", "2", "--n-test", "1", "--m", "3"}).code == 0);
  const auto train = comet::read_dataset(d + "/train.json");
  CHECK(train.p == comet::Dims{32, 32});
  CHECK(train.total_obs() == 6);
  CHECK_FALSE(comet::validate_dataset(train).has_value());
  const auto truth = comet::read_truth(d + "/truth.json");
  CHECK(truth.rho == 0.5);
  CHECK(truth.tau2 == 0.1);
  CHECK(truth.cp.rank() == 4);

  REQUIRE(cli({"simulate", "--out-dir", d, "--preset", "desk", "--encoding", "f64le", "--n", "4", "--n-test", "1"}).code == 0);
  const auto desk = comet::read_dataset(d + "/train.json");
  CHECK(desk.p == comet::Dims{16, 16});
  CHECK(desk.total_obs() == 24);
  CHECK(fs::exists(dir / "train.json.f64"));
}

TEST_CASE("pipeline outputs are deterministic and match the golden files") {
  const auto a = pipeline("run_a");
  const auto b = pipeline("run_b");
  for (const auto* f : {"train.json", "test.json", "truth.json", "fit.jsonl", "pred.csv", "sel.csv"}) {
    CAPTURE(f);
    CHECK(slurp(a / f) == slurp(b / f));
  }
  check_golden(a / "fit.jsonl", "fit.jsonl");
  check_golden(a / "pred.csv", "predictions.csv");
  check_golden(a / "sel.csv", "selection.csv");
}

TEST_CASE("benchmark outputs are deterministic and golden") {
  const auto dir = fresh("bench");
  const std::vector<std::string> base{"benchmark", "--dims", "3", "3", "--n", "6", "--n-test", "2", "--reps", "2",
                                      "--m-values", "2", "4", "--k-values", "2", "--rank-values", "1", "2",
                                      "--iters", "40", "--burnin", "20", "--seed", "3"};
  auto run_to = [&](const std::string& tag) {
    auto args = base;
    args.insert(args.end(), {"--out-csv", (dir / (tag + ".csv")).string(), "--out-json", (dir / (tag + ".json")).string()});
    return cli(args);
  };
  REQUIRE(run_to("a").code == 0);
  REQUIRE(run_to("b").code == 0);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
  // reps x methods x grid = 2 x 3 x (2 m x 1 k x 2 K), plus the header
  const auto csv = slurp(dir / "a.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 3 * 4);
  check_golden(dir / "a.csv", "benchmark.csv");
  check_golden(dir / "a.json", "benchmark_summary.json");
}

TEST_CASE("prediction intervals widen with the level") {
  const auto dir = pipeline("levels");
  const auto d = dir.string();
  REQUIRE(cli({"predict", "--fit", d + "/fit.jsonl", "--data", d + "/test.json", "--level", "0.5", "--out", d + "/p50.csv"}).code == 0);
  REQUIRE(cli({"predict", "--fit", d + "/fit.jsonl", "--data", d + "/test.json", "--level", "0.99", "--out", d + "/p99.csv"}).code == 0);
  auto widths = [](const std::string& text) {
    std::vector<double> w;
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      std::vector<std::string> cols;
      std::stringstream ls(line);
      std::string c;
      while (std::getline(ls, c, ',')) cols.push_back(c);
      w.push_back(std::stod(cols[4]) - std::stod(cols[3]));
    }
    return w;
  };
  const auto narrow = widths(slurp(dir / "p50.csv"));
  const auto wide = widths(slurp(dir / "p99.csv"));
  REQUIRE(narrow.size() == wide.size());
  for (std::size_t i = 0; i < narrow.size(); ++i) CHECK(wide[i] > narrow[i]);
}

TEST_CASE("exit codes") {
  const auto dir = pipeline("codes");
  const auto d = dir.string();
  CHECK(cli({"predict", "--fit", d + "/nope.jsonl", "--data", d + "/test.json"}).code == 4);
  CHECK(cli({"select", "--fit", d + "/nope.jsonl"}).code == 4);
  CHECK(cli({"fit", "--data", d + "/train.json", "--out", d + "/no/such/dir/fit.jsonl", "--iters", "3", "--burnin", "1"}).code == 4);
  CHECK(cli({"select", "--fit", d + "/fit.jsonl", "--level", "1.5"}).code == 2);
  CHECK(cli({"fit", "--data", d + "/train.json", "--out", d + "/f.jsonl", "--k", "5", "5"}).code == 2);
  CHECK(cli({"fit", "--data", d + "/train.json", "--out", d + "/f.jsonl", "--iters", "5", "--burnin", "5"}).code == 2);

  // covariates of the wrong shape
  REQUIRE(cli({"simulate", "--out-dir", d + "/other", "--dims", "2", "2", "--n", "2", "--n-test", "1"}).code == 0);
  const auto r = cli({"predict", "--fit", d + "/fit.jsonl", "--data", d + "/other/test.json"});
  CHECK(r.code == 2);
  CHECK(r.err.find("do not match") != std::string::npos);

  // overflow in the covariates breaks the factorisations
  auto ds = comet::read_dataset(d + "/train.json");
  for (auto& s : ds.subjects)
    for (auto& o : s.obs) o.x.data()[0] = 1e200;
  comet::write_dataset(d + "/huge.json", ds);
  const auto n = cli({"fit", "--data", d + "/huge.json", "--out", d + "/h.jsonl", "--iters", "5", "--burnin", "1"});
  CHECK(n.code == 3);
  CHECK(n.err.find("iteration") != std::string::npos);
}

TEST_CASE("config files: unknown keys rejected, explicit flags win") {
  const auto dir = fresh("config");
  const auto d = dir.string();
  std::ofstream(dir / "bad.json") << R"({"n": 3, "colour": "blue"})";
  const auto bad = cli({"simulate", "--config", d + "/bad.json", "--out-dir", d});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("colour") != std::string::npos);

  std::ofstream(dir / "good.json") << R"({"dims": [2, 3], "n": 3, "m": 2, "n-test": 1, "seed": 4})";
  REQUIRE(cli({"simulate", "--config", d + "/good.json", "--out-dir", d + "/x", "--n", "5"}).code == 0);
  const auto ds = comet::read_dataset(d + "/x/train.json");
  CHECK(ds.p == comet::Dims{2, 3});
  CHECK(ds.num_subjects() == 5);
  CHECK(ds.total_obs() == 10);

  CHECK(cli({"simulate", "--config", d + "/missing.json", "--out-dir", d}).code == 4);
}

TEST_CASE("standardized fits carry their scaling to prediction") {
  const auto dir = pipeline("std");
  const auto d = dir.string();
  REQUIRE(cli({"fit", "--data", d + "/train.json", "--out", d + "/s.jsonl", "--iters", "30", "--burnin", "10",
               "--standardize", "--k", "1", "1"})
              .code == 0);
  const auto fit = comet::read_fit(d + "/s.jsonl");
  CHECK(fit.standardization.has_value());
  CHECK(cli({"predict", "--fit", d + "/s.jsonl", "--data", d + "/test.json", "--out", d + "/sp.csv"}).code == 0);
}

TEST_CASE("geweke scenario runs from the benchmark command") {
  const auto dir = fresh("geweke");
  const auto r = cli({"benchmark", "--scenario", "geweke", "--sweeps", "400", "--forward-draws", "400",
                      "--out-json", (dir / "g.json").string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("log_tau2") != std::string::npos);
  CHECK(fs::exists(dir / "g.json"));
}

TEST_CASE("thread-count environment variable is validated") {
  setenv("COMET_NUM_THREADS", "zero", 1);
  CHECK(cli({"simulate", "--out-dir", fresh("env").string(), "--n", "1", "--n-test", "1", "--dims", "2"}).code == 2);
  setenv("COMET_NUM_THREADS", "2", 1);
  CHECK(cli({"simulate", "--out-dir", fresh("env").string(), "--n", "1", "--n-test", "1", "--dims", "2"}).code == 0);
  unsetenv("COMET_NUM_THREADS");
}
