#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <omp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "comet/geweke.hpp"
#include "comet/io.hpp"
#include "comet/linalg.hpp"
#include "comet/posterior.hpp"
#include "comet/sampler.hpp"
#include "comet/simbench.hpp"

namespace comet::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <class T>
using Opt = std::optional<T>;

template <class T>
void override_with(T& target, const Opt<T>& value) {
  if (value) target = *value;
}

// Parameters ----------------------------------------------------------------

struct SimulateArgs {
  std::string out_dir;
  std::string preset = "full";
  std::string encoding = "json";
  Opt<Dims> dims;
  Opt<std::size_t> true_rank, n, m, n_test, m_test;
  Opt<std::vector<std::size_t>> m_list;
  Opt<double> density, rho, tau2;
  Opt<std::uint64_t> seed;
};

struct FitArgs {
  std::string data, out;
  std::size_t rank = 1;
  Dims k;
  std::size_t iters = 11000, burnin = 1000;
  std::uint64_t seed = 1;
  double a0 = 0.01, b0 = 0.01;
  std::vector<double> sigma2;
  bool keep_shrinkage = false;
  bool standardize = false;
  bool serial = false;
};

struct PredictArgs {
  std::string fit, data, out = "-";
  double level = 0.95;
  std::uint64_t seed = 1;
};

struct SelectArgs {
  std::string fit, out = "-";
  double level = 0.95;
};

struct BenchmarkArgs {
  std::string scenario = "study";
  std::string preset = "desk";
  std::string out_csv, out_json, timings;
  Opt<std::vector<std::string>> methods;
  Opt<std::vector<std::size_t>> m_values, k_values, rank_values;
  Opt<std::size_t> reps, iters, burnin, n, n_test, true_rank;
  Opt<Dims> dims;
  Opt<double> rho, tau2, level;
  Opt<std::uint64_t> seed;
  // geweke scenario
  Opt<std::size_t> sweeps, forward_draws, chains;
};

// Helpers -------------------------------------------------------------------

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : path_(path), fallback_(fallback) {
    if (path_ != "-") {
      file_.open(path_, std::ios::out | std::ios::trunc);
      if (!file_) throw IoError("cannot open '" + path_ + "' for writing");
    }
  }
  std::ostream& stream() { return path_ == "-" ? fallback_ : file_; }
  void close() {
    if (path_ == "-") return;
    file_.close();
    if (!file_) throw IoError("failed writing '" + path_ + "'");
  }

 private:
  std::string path_;
  std::ostream& fallback_;
  std::ofstream file_;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::out | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw IoError("failed writing '" + path + "'");
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
}

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("--level must lie in (0, 1)");
}

void apply_thread_env() {
  const char* env = std::getenv("COMET_NUM_THREADS");
  if (!env || !*env) return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw ValidationError("COMET_NUM_THREADS must be a positive integer");
  omp_set_num_threads(static_cast<int>(n));
}

// Commands ------------------------------------------------------------------

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  SimConfig cfg;
  if (a.preset == "desk") {
    const auto desk = BenchmarkConfig::desk();
    cfg = desk.sim;
    cfg.m = 6;
  }
  override_with(cfg.dims, a.dims);
  override_with(cfg.true_rank, a.true_rank);
  override_with(cfg.density, a.density);
  override_with(cfg.rho, a.rho);
  override_with(cfg.tau2, a.tau2);
  override_with(cfg.n, a.n);
  override_with(cfg.m, a.m);
  override_with(cfg.m_list, a.m_list);
  override_with(cfg.n_test, a.n_test);
  override_with(cfg.m_test, a.m_test);
  override_with(cfg.seed, a.seed);
  cfg.check();

  auto rng = substream(cfg.seed, Stream::Simulate);
  const auto sim = simulate_dataset(cfg, rng);
  ensure_dir(a.out_dir);
  const auto enc = a.encoding == "f64le" ? Encoding::F64le : Encoding::Json;
  const auto dir = fs::path(a.out_dir);
  write_dataset((dir / "train.json").string(), sim.train, enc);
  write_dataset((dir / "test.json").string(), sim.test, enc);
  write_truth((dir / "truth.json").string(), sim.truth);
  out << "simulated " << sim.train.num_subjects() << " training subjects (" << sim.train.total_obs()
      << " observations) and " << sim.test.num_subjects() << " test subjects into " << a.out_dir << "\n";
  return Ok;
}

int cmd_fit(const FitArgs& a, std::ostream& out) {
  auto ds = read_dataset(a.data);
  require_valid(ds);
  FitArtifact fit;
  if (a.standardize) {
    fit.standardization = Standardization::fit(ds);
    fit.standardization->apply(ds);
  }
  Hyperparams hp;
  hp.rank = a.rank;
  hp.k = a.k;
  hp.iters = a.iters;
  hp.burnin = a.burnin;
  hp.seed = a.seed;
  hp.a0 = a.a0;
  hp.b0 = a.b0;
  if (a.sigma2.size() == 1) {
    hp.sigma2.assign(ds.order(), a.sigma2.front());
  } else {
    hp.sigma2 = a.sigma2;
  }
  hp.keep_shrinkage = a.keep_shrinkage;
  hp.check(ds.order());
  fit.chain = run_chain(ds, hp, {a.serial ? Exec::Serial : Exec::Parallel});
  write_fit(a.out, fit);
  const auto& t = fit.chain.timing;
  out << "fit " << fit.chain.size() << " draws (K=" << hp.rank << ", k=" << format_dims(fit.chain.meta.k)
      << ") to " << a.out << "\n";
  out << std::fixed << std::setprecision(2) << "time " << t.total << "s: cores " << t.cores << "s, gamma "
      << t.gamma << "s, margins " << t.beta << "s, shrinkage " << t.shrinkage << "s, tau2 " << t.tau << "s\n";
  return Ok;
}

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  check_level(a.level);
  const auto fit = read_fit(a.fit);
  if (fit.chain.meta.method != "comet") throw ValidationError("predict needs a comet fit artifact");
  auto ds = read_dataset(a.data, false);
  require_valid(ds);
  if (ds.p != fit.chain.meta.p || ds.q != fit.chain.meta.q) {
    throw ValidationError("covariate dims p=" + format_dims(ds.p) + ", q=" + format_dims(ds.q) +
                          " do not match the fit (p=" + format_dims(fit.chain.meta.p) +
                          ", q=" + format_dims(fit.chain.meta.q) + ")");
  }
  if (fit.chain.empty()) throw ValidationError("fit artifact holds no draws");
  if (fit.standardization) fit.standardization->apply(ds);
  const auto ps = draw_projections(fit.chain.meta.q, fit.chain.meta.k, fit.chain.meta.projection_seed);
  std::vector<std::vector<PredictionInterval>> rows;
  for (std::size_t i = 0; i < ds.num_subjects(); ++i) {
    auto rng = substream(a.seed, Stream::Predict, i);
    rows.push_back(prediction_intervals(predict_draws(fit.chain, ps, to_new_subject(ds.subjects[i]), rng), a.level));
  }
  Output o(a.out, out);
  write_predictions_csv(o.stream(), rows);
  o.close();
  return Ok;
}

int cmd_select(const SelectArgs& a, std::ostream& out) {
  check_level(a.level);
  const auto fit = read_fit(a.fit);
  if (fit.chain.size() < 2) throw ValidationError("selection needs at least 2 retained draws");
  const auto median = point_estimate(fit.chain);
  const auto ci = credible_intervals(fit.chain, a.level);
  Output o(a.out, out);
  write_selection_csv(o.stream(), fit.chain.meta.p, median, ci, select_s2m(fit.chain), select_ci(ci));
  o.close();
  return Ok;
}

int cmd_geweke(const BenchmarkArgs& a, std::ostream& out) {
  GewekeConfig cfg;
  override_with(cfg.sweeps, a.sweeps);
  override_with(cfg.forward_draws, a.forward_draws);
  override_with(cfg.chains, a.chains);
  override_with(cfg.seed, a.seed);
  const auto res = run_geweke(cfg);
  for (const auto& s : res.stats) {
    out << std::left << std::setw(14) << s.name << " forward " << format_double(s.forward_mean) << " (se "
        << format_double(s.forward_se) << ")  successive " << format_double(s.successive_mean) << " (se "
        << format_double(s.successive_se) << ")  z " << format_double(s.z)
        << (s.gated ? (s.pass ? "  ok" : "  FAIL") : "  (diagnostic)") << "\n";
  }
  out << "geweke " << (res.pass ? "passed" : "failed") << "\n";
  if (!a.out_json.empty()) write_text(a.out_json, geweke_json(cfg, res));
  return Ok;
}

int cmd_benchmark(const BenchmarkArgs& a, std::ostream& out) {
  if (a.scenario == "geweke") return cmd_geweke(a, out);
  BenchmarkConfig cfg = a.preset == "full" ? BenchmarkConfig::full() : BenchmarkConfig::desk();
  override_with(cfg.methods, a.methods);
  override_with(cfg.m_values, a.m_values);
  override_with(cfg.k_values, a.k_values);
  override_with(cfg.rank_values, a.rank_values);
  override_with(cfg.sim.replications, a.reps);
  override_with(cfg.iters, a.iters);
  override_with(cfg.burnin, a.burnin);
  override_with(cfg.sim.n, a.n);
  override_with(cfg.sim.n_test, a.n_test);
  override_with(cfg.sim.true_rank, a.true_rank);
  override_with(cfg.sim.dims, a.dims);
  override_with(cfg.sim.rho, a.rho);
  override_with(cfg.sim.tau2, a.tau2);
  override_with(cfg.level, a.level);
  override_with(cfg.sim.seed, a.seed);
  check_level(cfg.level);
  if (cfg.burnin >= cfg.iters) throw ValidationError("--burnin must be smaller than --iters");
  if (cfg.m_values.empty() || cfg.k_values.empty() || cfg.rank_values.empty() || cfg.methods.empty()) {
    throw ValidationError("benchmark grids must be non-empty");
  }

  const auto report = run_benchmark(cfg);
  if (!a.out_csv.empty()) {
    Output o(a.out_csv, out);
    write_benchmark_csv(o.stream(), report.rows);
    o.close();
  }
  if (!a.out_json.empty()) write_text(a.out_json, benchmark_summary_json(cfg, report));
  if (!a.timings.empty()) {
    std::ostringstream t;
    t << "replication,m,k,rank,method,seconds\n";
    for (const auto& r : report.rows) {
      t << r.replication + 1 << ',' << r.m << ',' << r.k << ',' << r.rank << ',' << r.method << ','
        << format_double(r.seconds) << '\n';
    }
    write_text(a.timings, t.str());
  }

  out << "method  m   k  K  n   rmse          rmspe         coverage      width         f1\n";
  auto cell = [](const SummaryStat& s) {
    std::ostringstream c;
    c << std::fixed << std::setprecision(3) << s.median << "(" << s.quartile_deviation << ")";
    return c.str();
  };
  for (const auto& s : report.summary) {
    out << std::left << std::setw(8) << s.method << std::setw(4) << s.m << std::setw(3) << s.k << std::setw(3)
        << s.rank << std::setw(4) << s.count << std::setw(14) << cell(s.rmse) << std::setw(14) << cell(s.rmspe)
        << std::setw(14) << cell(s.coverage) << std::setw(14) << cell(s.width) << cell(s.f1) << "\n";
  }
  std::size_t failed = 0;
  for (const auto& r : report.rows) failed += r.ok ? 0 : 1;
  out << report.rows.size() << " rows, " << failed << " failed, " << std::fixed << std::setprecision(1)
      << report.seconds << "s\n";
  return Ok;
}

// Config files ----------------------------------------------------------------

std::vector<std::string> config_tokens(const json& value, const std::string& key) {
  auto scalar = [&](const json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer() || v.is_number_unsigned() || v.is_number_float()) return v.dump();
    throw ValidationError("config key '" + key + "' has an unsupported value type");
  };
  if (value.is_boolean()) return value.get<bool>() ? std::vector<std::string>{"--" + key} : std::vector<std::string>{};
  std::vector<std::string> out{"--" + key};
  if (value.is_array()) {
    if (value.empty()) throw ValidationError("config key '" + key + "' must not be an empty list");
    for (const auto& v : value) out.push_back(scalar(v));
  } else {
    out.push_back(scalar(value));
  }
  return out;
}

bool given_on_command_line(const std::vector<std::string>& args, const std::string& key) {
  const std::string flag = "--" + key;
  return std::any_of(args.begin(), args.end(), [&](const std::string& t) {
    return t == flag || t.rfind(flag + "=", 0) == 0;
  });
}

/// Splices keys of the --config JSON object in as flags; explicit flags win.
std::vector<std::string> merge_config(CLI::App& app, std::vector<std::string> args) {
  auto it = std::find_if(args.begin(), args.end(), [](const std::string& t) {
    return t == "--config" || t.rfind("--config=", 0) == 0;
  });
  if (it == args.end()) return args;
  std::string path;
  auto erase_to = it + 1;
  if (*it == "--config") {
    if (it + 1 == args.end()) throw ValidationError("--config needs a file path");
    path = *(it + 1);
    erase_to = it + 2;
  } else {
    path = it->substr(9);
  }
  args.erase(it, erase_to);

  const auto sub_it = std::find_if(args.begin(), args.end(), [](const std::string& t) { return t.empty() || t[0] != '-'; });
  if (sub_it == args.end()) throw ValidationError("--config requires a subcommand");
  CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(*sub_it);
  } catch (const CLI::OptionNotFound&) {
    throw ValidationError("unknown subcommand '" + *sub_it + "'");
  }

  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError("cannot parse config '" + path + "': " + e.what());
  }
  if (!doc.is_object()) throw ValidationError("config '" + path + "' must be a JSON object");

  std::vector<std::string> extra;
  for (const auto& [key, value] : doc.items()) {
    if (key == "config" || sub->get_option_no_throw("--" + key) == nullptr) {
      throw ValidationError("config '" + path + "': unknown key '" + key + "' for " + sub->get_name());
    }
    if (given_on_command_line(args, key)) continue;
    const auto tokens = config_tokens(value, key);
    extra.insert(extra.end(), tokens.begin(), tokens.end());
  }
  args.insert(sub_it + 1, extra.begin(), extra.end());
  return args;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Compressed mixed-effects tensor regression"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");
  app.add_option("--config", "JSON object of flag values for the subcommand (flags given explicitly win)");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Draw training/test datasets and the truth file");
  s->add_option("--out-dir", sim.out_dir, "Directory for train.json, test.json, truth.json")->required();
  s->add_option("--preset", sim.preset, "Base settings")->check(CLI::IsMember({"full", "desk"}))->capture_default_str();
  s->add_option("--encoding", sim.encoding, "Dataset payload encoding")
      ->check(CLI::IsMember({"json", "f64le"}))->capture_default_str();
  s->add_option("--dims", sim.dims, "Tensor dims (p = q)");
  s->add_option("--true-rank", sim.true_rank, "CP rank of the true B");
  s->add_option("--density", sim.density, "Non-zero fraction of each true factor");
  s->add_option("--rho", sim.rho, "Equicorrelation of the random-effect covariances");
  s->add_option("--tau2", sim.tau2, "Noise variance");
  s->add_option("--n", sim.n, "Training subjects");
  s->add_option("--m", sim.m, "Observations per subject");
  s->add_option("--m-list", sim.m_list, "Per-subject observation counts (unbalanced)");
  s->add_option("--n-test", sim.n_test, "Test subjects");
  s->add_option("--m-test", sim.m_test, "Observations per test subject (0: same as --m)");
  s->add_option("--seed", sim.seed, "Random seed");

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "Run the Gibbs sampler and write a fit artifact");
  f->add_option("--data", fit.data, "Training dataset")->required();
  f->add_option("--out", fit.out, "Fit artifact path")->required();
  f->add_option("--rank", fit.rank, "CP rank K")->capture_default_str();
  f->add_option("--k", fit.k, "Compression dims, one per mode (default ceil(ln max q))");
  f->add_option("--iters", fit.iters, "Total sweeps")->capture_default_str();
  f->add_option("--burnin", fit.burnin, "Discarded sweeps")->capture_default_str();
  f->add_option("--seed", fit.seed, "Random seed")->capture_default_str();
  f->add_option("--a0", fit.a0, "tau2 prior shape")->capture_default_str();
  f->add_option("--b0", fit.b0, "tau2 prior scale")->capture_default_str();
  f->add_option("--sigma2", fit.sigma2, "Prior variance of Gamma_d entries (one value or one per mode)")
      ->default_str("1");
  f->add_flag("--keep-shrinkage", fit.keep_shrinkage, "Store lambda2 and delta2 draws");
  f->add_flag("--standardize", fit.standardize, "z-score every covariate cell before fitting");
  f->add_flag("--serial", fit.serial, "Use the serial kernels");

  PredictArgs pred;
  auto* p = app.add_subcommand("predict", "Posterior predictive intervals for new subjects");
  p->add_option("--fit", pred.fit, "Fit artifact")->required();
  p->add_option("--data", pred.data, "Dataset with the new covariates (y optional)")->required();
  p->add_option("--out", pred.out, "CSV path ('-' for stdout)")->capture_default_str();
  p->add_option("--level", pred.level, "Interval level")->capture_default_str();
  p->add_option("--seed", pred.seed, "Random seed for predictive draws")->capture_default_str();

  SelectArgs sel;
  auto* se = app.add_subcommand("select", "Per-cell summaries and selection flags for B");
  se->add_option("--fit", sel.fit, "Fit artifact")->required();
  se->add_option("--out", sel.out, "CSV path ('-' for stdout)")->capture_default_str();
  se->add_option("--level", sel.level, "Credible interval level")->capture_default_str();

  BenchmarkArgs bench;
  auto* b = app.add_subcommand("benchmark", "Simulation study or the Geweke check");
  b->add_option("--scenario", bench.scenario, "study or geweke")
      ->check(CLI::IsMember({"study", "geweke"}))->capture_default_str();
  b->add_option("--preset", bench.preset, "Grid and sizes")->check(CLI::IsMember({"desk", "full"}))->capture_default_str();
  b->add_option("--out-csv", bench.out_csv, "Per-replication rows");
  b->add_option("--out-json", bench.out_json, "Summary");
  b->add_option("--timings", bench.timings, "Per-row wall-clock CSV (not deterministic)");
  b->add_option("--methods", bench.methods, "Subset of comet, oracle, ridge");
  b->add_option("--m-values", bench.m_values, "Observations per subject grid");
  b->add_option("--k-values", bench.k_values, "Compression dim grid (same k on every mode)");
  b->add_option("--rank-values", bench.rank_values, "Fitted rank grid");
  b->add_option("--reps", bench.reps, "Replications");
  b->add_option("--iters", bench.iters, "Sweeps per fit");
  b->add_option("--burnin", bench.burnin, "Burn-in per fit");
  b->add_option("--n", bench.n, "Training subjects");
  b->add_option("--n-test", bench.n_test, "Test subjects");
  b->add_option("--true-rank", bench.true_rank, "CP rank of the true B");
  b->add_option("--dims", bench.dims, "Tensor dims (p = q)");
  b->add_option("--rho", bench.rho, "Random-effect equicorrelation");
  b->add_option("--tau2", bench.tau2, "Noise variance");
  b->add_option("--level", bench.level, "Prediction interval level");
  b->add_option("--seed", bench.seed, "Base seed");
  b->add_option("--sweeps", bench.sweeps, "Geweke successive-conditional sweeps");
  b->add_option("--forward-draws", bench.forward_draws, "Geweke forward draws");
  b->add_option("--chains", bench.chains, "Geweke independent successive-conditional chains");

  try {
    apply_thread_env();
    auto args = merge_config(app, raw_args);
    std::reverse(args.begin(), args.end());
    try {
      app.parse(args);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? Ok : Validation;
    }
    if (s->parsed()) return cmd_simulate(sim, out);
    if (f->parsed()) return cmd_fit(fit, out);
    if (p->parsed()) return cmd_predict(pred, out);
    if (se->parsed()) return cmd_select(sel, out);
    return cmd_benchmark(bench, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return Io;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return Numerical;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << "\n";
    return Validation;
  } catch (const DimensionError& e) {
    err << "invalid input: " << e.what() << "\n";
    return Validation;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return Validation;
  }
}

}  // namespace comet::cli
