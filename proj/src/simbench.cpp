#include "comet/simbench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>

#include <omp.h>

#include "comet/linalg.hpp"
#include "comet/sampler.hpp"

namespace comet {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t nonzero_count(double density, std::size_t pd, std::size_t rank) {
  // guard against 0.25 * 16 * 4 landing a hair above 16
  return static_cast<std::size_t>(std::ceil(density * static_cast<double>(pd * rank) - 1e-9));
}

Subject draw_subject(const SimConfig& cfg, const Truth& truth, std::size_t m, Engine& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const DenseTensor a = tensor_normal_draw(cfg.dims, truth.sigma, truth.tau2, rng);
  const double sd = std::sqrt(truth.tau2);
  Subject s;
  for (std::size_t j = 0; j < m; ++j) {
    Observation o{0.0, DenseTensor(cfg.dims), DenseTensor(cfg.dims)};
    for (auto& v : o.x.data()) v = normal(rng);
    for (auto& v : o.z.data()) v = normal(rng);
    o.y = inner_product(o.x, truth.B) + inner_product(o.z, a) + sd * normal(rng);
    s.obs.push_back(std::move(o));
  }
  return s;
}

std::size_t method_id(const std::string& m) {
  if (m == "comet") return 1;
  if (m == "oracle") return 2;
  if (m == "ridge") return 3;
  throw ValidationError("unknown benchmark method '" + m + "'");
}

}  // namespace

void SimConfig::check() const {
  if (dims.empty()) throw ValidationError("sim dims must be non-empty");
  for (auto d : dims)
    if (d < 1) throw ValidationError("sim dims must be positive");
  if (true_rank < 1) throw ValidationError("true rank must be at least 1");
  if (!(density > 0.0 && density <= 1.0)) throw ValidationError("density must lie in (0, 1]");
  if (values.empty()) throw ValidationError("value set must be non-empty");
  for (auto d : dims) {
    if (d > 1 && !(rho > -1.0 / static_cast<double>(d - 1) && rho < 1.0)) {
      throw ValidationError("rho outside the positive-definite range for q_d = " + std::to_string(d));
    }
    if (nonzero_count(density, d, true_rank) < 1) throw ValidationError("density * p_d * K must be at least 1");
  }
  if (!(tau2 >= 0.0) || !std::isfinite(tau2)) throw ValidationError("tau2 must be non-negative");
  if (n < 1 || n_test < 1) throw ValidationError("n and n_test must be positive");
  if (m_list.empty() && m < 1) throw ValidationError("m must be positive");
  if (!m_list.empty() && m_list.size() != n) throw ValidationError("m_list needs one entry per subject");
  for (auto mi : m_list)
    if (mi < 1) throw ValidationError("every m_i must be positive");
}

Eigen::MatrixXd Truth::sigma_star() const { return kronecker_descending(sigma); }

std::vector<bool> Truth::support() const {
  std::vector<bool> out(B.size());
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = B.data()[c] != 0.0;
  return out;
}

CpDecomposition gen_true_cp(const SimConfig& cfg, Engine& rng) {
  CpDecomposition cp;
  const auto K = cfg.true_rank;
  std::uniform_int_distribution<std::size_t> pick(0, cfg.values.size() - 1);
  for (auto pd : cfg.dims) {
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(pd), static_cast<Eigen::Index>(K));
    std::vector<std::size_t> cells(pd * K);
    std::iota(cells.begin(), cells.end(), std::size_t{0});
    std::shuffle(cells.begin(), cells.end(), rng);
    const auto count = std::min(nonzero_count(cfg.density, pd, K), cells.size());
    for (std::size_t c = 0; c < count; ++c) f.data()[cells[c]] = cfg.values[pick(rng)];
    cp.factors.push_back(std::move(f));
  }
  return cp;
}

Eigen::MatrixXd equicorrelation(std::size_t q, double rho) {
  if (q < 1) throw ValidationError("equicorrelation: dimension must be positive");
  if (q > 1 && !(rho > -1.0 / static_cast<double>(q - 1) && rho < 1.0)) {
    throw ValidationError("equicorrelation: rho outside the positive-definite range");
  }
  Eigen::MatrixXd s = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q), rho);
  s.diagonal().setOnes();
  return s;
}

DenseTensor tensor_normal_draw(const Dims& dims, const std::vector<Eigen::MatrixXd>& covariances,
                               double tau2, Engine& rng) {
  if (covariances.size() != dims.size()) throw DimensionError("tensor_normal_draw: one covariance per mode");
  std::vector<Eigen::MatrixXd> factors;
  for (std::size_t d = 0; d < dims.size(); ++d) {
    const auto& c = covariances[d];
    if (c.rows() != static_cast<Eigen::Index>(dims[d]) || c.cols() != c.rows()) {
      throw DimensionError("tensor_normal_draw: covariance shape mismatch in mode " + std::to_string(d + 1));
    }
    Eigen::LLT<Eigen::MatrixXd> llt(c);
    if (llt.info() != Eigen::Success) throw NumericalError("tensor_normal_draw: covariance not positive definite");
    factors.emplace_back(llt.matrixL());
  }
  factors.front() *= std::sqrt(tau2);
  const auto core_vals = standard_normal(rng, static_cast<Eigen::Index>(product(dims)));
  return multiply_all_modes(DenseTensor(dims, core_vals), factors);
}

SimulatedData simulate_dataset(const SimConfig& cfg, Engine& rng) {
  cfg.check();
  SimulatedData out;
  out.truth.cp = gen_true_cp(cfg, rng);
  out.truth.B = cp_compose(out.truth.cp);
  out.truth.rho = cfg.rho;
  out.truth.tau2 = cfg.tau2;
  for (auto d : cfg.dims) out.truth.sigma.push_back(equicorrelation(d, cfg.rho));
  out.train.p = out.train.q = cfg.dims;
  out.test.p = out.test.q = cfg.dims;
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const auto m = cfg.m_list.empty() ? cfg.m : cfg.m_list[i];
    out.train.subjects.push_back(draw_subject(cfg, out.truth, m, rng));
  }
  const auto mt = cfg.m_test == 0 ? (cfg.m_list.empty() ? cfg.m : cfg.m_list.front()) : cfg.m_test;
  for (std::size_t i = 0; i < cfg.n_test; ++i) out.test.subjects.push_back(draw_subject(cfg, out.truth, mt, rng));
  return out;
}

Chain oracle_fit(const ClusteredDataset& ds, const Hyperparams& hp, const Truth& truth) {
  hp.check(ds.order());
  const Dims unit(ds.order(), 1);
  const auto ps = draw_projections(ds.q, unit, hp.seed);
  const auto data = PreparedData::build(ds, ps);
  const auto w = Whitening::from_covariance(data, truth.sigma_star());

  Chain chain;
  chain.meta = {"oracle", ds.p, ds.q, unit, hp, ps.seed, dataset_fingerprint(ds)};
  chain.meta.hp.k = unit;
  auto init_rng = substream(hp.seed, Stream::Init);
  ParamState state = init_state(ds, hp, ps, init_rng);
  const auto start = Clock::now();
  for (std::size_t t = 0; t < hp.iters; ++t) {
    try {
      block2_update(data, w, hp, state, {hp.seed, t + 1}, &chain.timing);
      if (auto issue = audit_state(state, ds.p, unit, ds.num_subjects())) throw NumericalError(*issue);
    } catch (const NumericalError& e) {
      throw NumericalError("oracle iteration " + std::to_string(t + 1) + ": " + e.what());
    }
    if (t < hp.burnin) continue;
    Snapshot snap;
    snap.beta = cp_compose_vec(state.factors);
    snap.factors = state.factors.factors;
    snap.tau2 = state.tau2;
    chain.snapshots.push_back(std::move(snap));
  }
  chain.timing.total = std::chrono::duration<double>(Clock::now() - start).count();
  return chain;
}

namespace {

struct Stacked {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

Stacked stack(const ClusteredDataset& ds, const std::vector<std::size_t>& subjects) {
  std::size_t rows = 0;
  for (auto i : subjects) rows += ds.subjects[i].obs.size();
  Stacked s{Eigen::MatrixXd(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(product(ds.p))),
            Eigen::VectorXd(static_cast<Eigen::Index>(rows))};
  Eigen::Index r = 0;
  for (auto i : subjects) {
    for (const auto& o : ds.subjects[i].obs) {
      s.x.row(r) = o.x.vec().transpose();
      s.y[r++] = o.y;
    }
  }
  return s;
}

Eigen::VectorXd ridge_solve(const Stacked& s, double penalty) {
  Eigen::MatrixXd gram = s.x.transpose() * s.x;
  gram.diagonal().array() += penalty;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) throw NumericalError("ridge: singular normal equations");
  Eigen::VectorXd b = llt.solve(s.x.transpose() * s.y);
  if (!b.allFinite()) throw NumericalError("ridge: singular normal equations");
  return b;
}

}  // namespace

Eigen::VectorXd ridge_solve(const ClusteredDataset& ds, double penalty) {
  std::vector<std::size_t> all(ds.num_subjects());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return ridge_solve(stack(ds, all), penalty);
}

std::vector<double> default_ridge_grid() {
  std::vector<double> g;
  for (int e = -3; e <= 4; ++e) {
    g.push_back(std::pow(10.0, e));
    if (e < 4) g.push_back(3.0 * std::pow(10.0, e));
  }
  return g;
}

RidgeFit ridge_baseline(const ClusteredDataset& ds, const std::vector<double>& penalties,
                        std::size_t folds) {
  require_valid(ds);
  if (penalties.empty()) throw ValidationError("ridge: empty penalty grid");
  for (double l : penalties)
    if (!(l > 0.0)) throw ValidationError("ridge: penalties must be positive");
  folds = std::clamp<std::size_t>(folds, 2, std::max<std::size_t>(2, ds.num_subjects()));
  if (ds.num_subjects() < 2) throw ValidationError("ridge: cross-validation needs at least 2 subjects");

  RidgeFit fit;
  fit.cv_error.assign(penalties.size(), 0.0);
  std::size_t held_total = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train, held;
    for (std::size_t i = 0; i < ds.num_subjects(); ++i) (i % folds == f ? held : train).push_back(i);
    if (held.empty()) continue;
    const auto tr = stack(ds, train);
    const auto te = stack(ds, held);
    held_total += static_cast<std::size_t>(te.y.size());
    for (std::size_t l = 0; l < penalties.size(); ++l) {
      const auto b = ridge_solve(tr, penalties[l]);
      fit.cv_error[l] += (te.y - te.x * b).squaredNorm();
    }
  }
  for (auto& e : fit.cv_error) e /= static_cast<double>(held_total);
  const auto best = static_cast<std::size_t>(
      std::min_element(fit.cv_error.begin(), fit.cv_error.end()) - fit.cv_error.begin());
  fit.penalty = penalties[best];
  fit.B = DenseTensor(ds.p, ridge_solve(ds, fit.penalty));
  return fit;
}

double rmse(const DenseTensor& estimate, const DenseTensor& truth) {
  if (estimate.dims() != truth.dims()) throw DimensionError("rmse: shape mismatch");
  return std::sqrt((estimate.vec() - truth.vec()).squaredNorm() / static_cast<double>(truth.size()));
}

double rmspe(const std::vector<Eigen::VectorXd>& predictions, const ClusteredDataset& test) {
  if (predictions.size() != test.num_subjects() || predictions.empty()) {
    throw DimensionError("rmspe: one prediction vector per test subject required");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto& obs = test.subjects[i].obs;
    if (static_cast<std::size_t>(predictions[i].size()) != obs.size()) throw DimensionError("rmspe: length mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < obs.size(); ++j) {
      const double e = obs[j].y - predictions[i][static_cast<Eigen::Index>(j)];
      s += e * e;
    }
    total += s / static_cast<double>(obs.size());
  }
  return std::sqrt(total / static_cast<double>(predictions.size()));
}

CoverageWidth coverage_width(const std::vector<PredictionInterval>& intervals,
                             const std::vector<double>& targets) {
  if (intervals.size() != targets.size() || intervals.empty()) {
    throw DimensionError("coverage_width: one interval per target required");
  }
  double inside = 0.0, width = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] >= intervals[i].lo && targets[i] <= intervals[i].hi) inside += 1.0;
    width += intervals[i].hi - intervals[i].lo;
  }
  const auto n = static_cast<double>(targets.size());
  return {inside / n, width / n};
}

SupportScore support_f1(const std::vector<bool>& selected, const std::vector<bool>& truth) {
  if (selected.size() != truth.size()) throw DimensionError("support_f1: length mismatch");
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t c = 0; c < truth.size(); ++c) {
    if (selected[c] && truth[c]) ++tp;
    else if (selected[c]) ++fp;
    else if (truth[c]) ++fn;
  }
  const double precision = tp + fp > 0 ? tp / (tp + fp) : 1.0;
  const double recall = tp + fn > 0 ? tp / (tp + fn) : 1.0;
  const double f1 = precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
  return {precision, recall, f1};
}

NewSubject to_new_subject(const Subject& s) {
  const auto m = static_cast<Eigen::Index>(s.obs.size());
  NewSubject out{Eigen::MatrixXd(m, static_cast<Eigen::Index>(s.obs.front().x.size())),
                 Eigen::MatrixXd(m, static_cast<Eigen::Index>(s.obs.front().z.size()))};
  for (Eigen::Index j = 0; j < m; ++j) {
    out.x.row(j) = s.obs[static_cast<std::size_t>(j)].x.vec().transpose();
    out.z.row(j) = s.obs[static_cast<std::size_t>(j)].z.vec().transpose();
  }
  return out;
}

BenchmarkConfig BenchmarkConfig::desk() {
  BenchmarkConfig c;
  c.sim.dims = {16, 16};
  c.sim.true_rank = 4;
  c.sim.rho = 0.5;
  c.sim.tau2 = 0.1;
  c.sim.n = 50;
  c.sim.n_test = 25;
  c.sim.replications = 5;
  c.m_values = {3, 6, 12};
  c.k_values = {3};
  c.rank_values = {4};
  c.iters = 3000;
  c.burnin = 500;
  return c;
}

BenchmarkConfig BenchmarkConfig::full() {
  BenchmarkConfig c;
  c.sim.dims = {32, 32};
  c.sim.true_rank = 4;
  c.sim.rho = 0.5;
  c.sim.tau2 = 0.1;
  c.sim.n = 100;
  c.sim.n_test = 50;
  c.sim.replications = 25;
  c.m_values = {3, 6, 9, 12};
  c.k_values = {3, 6, 9};
  c.rank_values = {1, 2, 4, 6, 8};
  c.iters = 11000;
  c.burnin = 1000;
  return c;
}

SummaryStat summarize(std::vector<double> values) {
  values.erase(std::remove_if(values.begin(), values.end(), [](double v) { return std::isnan(v); }),
               values.end());
  if (values.empty()) return {kNaN, kNaN};
  std::sort(values.begin(), values.end());
  const Eigen::Map<const Eigen::VectorXd> v(values.data(), static_cast<Eigen::Index>(values.size()));
  return {sorted_quantile(v, 0.5), 0.5 * (sorted_quantile(v, 0.75) - sorted_quantile(v, 0.25))};
}

std::vector<SummaryRow> summarize_rows(const std::vector<BenchmarkRow>& rows) {
  using Key = std::tuple<std::size_t, std::size_t, std::size_t, std::size_t, std::string>;
  std::map<Key, std::vector<const BenchmarkRow*>> groups;
  for (const auto& r : rows) {
    if (!r.ok) continue;
    groups[{r.m, r.k, r.rank, method_id(r.method), r.method}].push_back(&r);
  }
  std::vector<SummaryRow> out;
  for (const auto& [key, members] : groups) {
    auto collect = [&](double BenchmarkRow::*field) {
      std::vector<double> v;
      for (const auto* r : members) v.push_back(r->*field);
      return summarize(std::move(v));
    };
    out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), std::get<4>(key),
                   members.size(), collect(&BenchmarkRow::rmse), collect(&BenchmarkRow::rmspe),
                   collect(&BenchmarkRow::coverage), collect(&BenchmarkRow::width),
                   collect(&BenchmarkRow::f1)});
  }
  return out;
}

namespace {

void fill_predictive_metrics(BenchmarkRow& row, const SimulatedData& sim,
                             const std::vector<Eigen::MatrixXd>& draws, double level) {
  std::vector<Eigen::VectorXd> preds;
  std::vector<PredictionInterval> intervals;
  std::vector<double> targets;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const auto pi = prediction_intervals(draws[i], level);
    Eigen::VectorXd point(static_cast<Eigen::Index>(pi.size()));
    for (std::size_t j = 0; j < pi.size(); ++j) {
      point[static_cast<Eigen::Index>(j)] = pi[j].point;
      intervals.push_back(pi[j]);
      targets.push_back(sim.test.subjects[i].obs[j].y);
    }
    preds.push_back(std::move(point));
  }
  row.rmspe = rmspe(preds, sim.test);
  const auto cw = coverage_width(intervals, targets);
  row.coverage = cw.coverage;
  row.width = cw.width;
}

BenchmarkRow run_cell(const BenchmarkConfig& cfg, const SimulatedData& sim, const std::string& method,
                      std::size_t rep, std::size_t m, std::size_t k, std::size_t rank,
                      std::uint64_t data_seed) {
  BenchmarkRow row;
  row.replication = rep;
  row.m = m;
  row.k = k;
  row.rank = rank;
  row.method = method;
  const auto start = Clock::now();
  const auto fit_seed = derive_seed(data_seed, method_id(method), k, rank);
  try {
    if (method == "ridge") {
      const auto fit = ridge_baseline(sim.train, cfg.ridge_grid);
      row.rmse = rmse(fit.B, sim.truth.B);
      std::vector<Eigen::VectorXd> preds;
      for (const auto& s : sim.test.subjects) preds.push_back(to_new_subject(s).x * fit.B.vec());
      row.rmspe = rmspe(preds, sim.test);
      row.coverage = row.width = row.f1 = kNaN;
    } else {
      Hyperparams hp;
      hp.rank = rank;
      hp.k = Dims(cfg.sim.dims.size(), k);
      hp.iters = cfg.iters;
      hp.burnin = cfg.burnin;
      hp.seed = fit_seed;
      std::vector<Eigen::MatrixXd> draws;
      Chain chain;
      if (method == "comet") {
        const auto ps = draw_projections(sim.train.q, hp.k, hp.seed);
        chain = run_chain(sim.train, hp, ps, {Exec::Serial});
        for (std::size_t i = 0; i < sim.test.num_subjects(); ++i) {
          auto rng = substream(fit_seed, Stream::Predict, i);
          draws.push_back(predict_draws(chain, ps, to_new_subject(sim.test.subjects[i]), rng));
        }
      } else {
        chain = oracle_fit(sim.train, hp, sim.truth);
        const auto sigma_star = sim.truth.sigma_star();
        for (std::size_t i = 0; i < sim.test.num_subjects(); ++i) {
          auto rng = substream(fit_seed, Stream::Predict, i);
          draws.push_back(predict_draws_fixed(chain, sigma_star, to_new_subject(sim.test.subjects[i]), rng));
        }
      }
      row.rmse = rmse(point_estimate(chain), sim.truth.B);
      row.f1 = support_f1(select_s2m(chain), sim.truth.support()).f1;
      fill_predictive_metrics(row, sim, draws, cfg.level);
    }
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
    row.rmse = row.rmspe = row.coverage = row.width = row.f1 = kNaN;
  }
  row.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return row;
}

}  // namespace

BenchmarkReport run_benchmark(const BenchmarkConfig& cfg) {
  cfg.sim.check();
  for (const auto& m : cfg.methods) method_id(m);
  for (auto m : cfg.m_values)
    if (m < 1) throw ValidationError("benchmark: m values must be positive");
  for (auto r : cfg.rank_values)
    if (r < 1) throw ValidationError("benchmark: rank values must be positive");
  for (auto k : cfg.k_values)
    for (auto q : cfg.sim.dims)
      if (k < 1 || k > q) throw ValidationError("benchmark: k values must lie in [1, q_d]");
  if (cfg.burnin >= cfg.iters) throw ValidationError("benchmark: burn-in must be smaller than iters");
  const auto start = Clock::now();

  struct Task {
    std::size_t rep, m;
  };
  std::vector<Task> tasks;
  for (std::size_t r = 0; r < cfg.sim.replications; ++r)
    for (auto m : cfg.m_values) tasks.push_back({r, m});

  std::vector<std::vector<BenchmarkRow>> per_task(tasks.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(tasks.size()); ++t) {
    const auto& task = tasks[static_cast<std::size_t>(t)];
    SimConfig sc = cfg.sim;
    sc.m = task.m;
    sc.m_list.clear();
    sc.m_test = 0;
    const auto data_seed = derive_seed(cfg.sim.seed, task.rep, task.m);
    auto rng = substream(data_seed, Stream::Simulate);
    const auto sim = simulate_dataset(sc, rng);
    auto& rows = per_task[static_cast<std::size_t>(t)];
    for (auto k : cfg.k_values)
      for (auto rank : cfg.rank_values)
        for (const auto& method : cfg.methods)
          rows.push_back(run_cell(cfg, sim, method, task.rep, task.m, k, rank, data_seed));
  }

  BenchmarkReport report;
  for (auto& rows : per_task)
    for (auto& r : rows) report.rows.push_back(std::move(r));
  report.summary = summarize_rows(report.rows);
  report.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return report;
}

}  // namespace comet
