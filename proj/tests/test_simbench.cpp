#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "comet/simbench.hpp"
#include "support.hpp"

using namespace comet;

TEST_CASE("true factors: exact non-zero count from the value set") {
  SimConfig cfg;
  auto rng = substream(1, Stream::Simulate);
  const auto cp = gen_true_cp(cfg, rng);
  for (const auto& f : cp.factors) {
    CHECK(f.rows() == 32);
    CHECK((f.array() != 0.0).count() == 32);
    for (double v : f.reshaped())
      if (v != 0.0) CHECK(std::find(cfg.values.begin(), cfg.values.end(), v) != cfg.values.end());
  }
}

TEST_CASE("equicorrelation eigenvalues") {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> two(equicorrelation(2, 0.5));
  CHECK(two.eigenvalues()[0] == doctest::Approx(0.5));
  CHECK(two.eigenvalues()[1] == doctest::Approx(1.5));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> big(equicorrelation(32, 0.5));
  CHECK(big.eigenvalues().minCoeff() == doctest::Approx(0.5));
  CHECK_THROWS(equicorrelation(3, -0.6));
}

TEST_CASE("tensor normal draws: covariance tau2 Sigma2 (x) Sigma1") {
  auto rng = substream(2, Stream::Simulate);
  const std::vector<Eigen::MatrixXd> covs{equicorrelation(2, 0.5), equicorrelation(2, -0.3)};
  const double tau2 = 0.7;
  const Eigen::MatrixXd target = tau2 * kronecker(covs[1], covs[0]);
  const int n = 100000;
  Eigen::Matrix4d acc = Eigen::Matrix4d::Zero();
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd v = tensor_normal_draw({2, 2}, covs, tau2, rng).vec();
    acc += v * v.transpose();
  }
  acc /= n;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double se = std::sqrt((target(i, i) * target(j, j) + target(i, j) * target(i, j)) / n);
      CHECK(std::abs(acc(i, j) - target(i, j)) < 4 * se);
    }
}

TEST_CASE("identity covariances give iid standard normals") {
  auto rng = substream(3, Stream::Simulate);
  const std::vector<Eigen::MatrixXd> covs{Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(3, 3)};
  std::vector<double> cell;
  for (int i = 0; i < 100000; ++i) cell.push_back(tensor_normal_draw({2, 3}, covs, 1.0, rng).data()[4]);
  std::sort(cell.begin(), cell.end());
  double ks = 0.0;
  const double n = static_cast<double>(cell.size());
  for (std::size_t i = 0; i < cell.size(); ++i) {
    const double f = 0.5 * std::erfc(-cell[i] / std::sqrt(2.0));
    ks = std::max({ks, std::abs(f - i / n), std::abs(f - (i + 1) / n)});
  }
  CHECK(ks < 1.63 / std::sqrt(n));  // 1% critical value
}

TEST_CASE("simulated dataset shapes and mean structure") {
  SimConfig cfg;
  cfg.dims = {4, 4};
  cfg.n = 100;
  cfg.m = 3;
  cfg.n_test = 5;
  auto rng = substream(4, Stream::Simulate);
  const auto sim = simulate_dataset(cfg, rng);
  CHECK(sim.train.total_obs() == 300);
  CHECK(sim.test.num_subjects() == 5);
  CHECK_FALSE(validate_dataset(sim.train).has_value());

  // E[y | X] = <X, B>: residual mean over many observations near zero
  double s = 0, ss = 0;
  std::size_t count = 0;
  for (const auto& sub : sim.train.subjects)
    for (const auto& o : sub.obs) {
      const double r = o.y - inner_product(o.x, sim.truth.B);
      s += r;
      ss += r * r;
      ++count;
    }
  const double mean = s / count;
  // subjects are independent; 3 observations each share a random effect
  CHECK(std::abs(mean) < 4 * std::sqrt(3.0 * (ss / count) / count));
}

TEST_CASE("within-subject responses share the random effect") {
  SimConfig cfg;
  cfg.dims = {3, 3};
  cfg.n = 400;
  cfg.m = 2;
  cfg.n_test = 1;
  cfg.tau2 = 1.0;
  auto rng = substream(5, Stream::Simulate);
  const auto sim = simulate_dataset(cfg, rng);
  const Eigen::MatrixXd sigma = cfg.tau2 * sim.truth.sigma_star();
  // E[r_i1 r_i2 | Z] = z_i1' tau2 Sigma* z_i2 within a subject, 0 across subjects
  auto slope = [&](std::size_t shift) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < cfg.n; ++i) {
      const auto& a = sim.train.subjects[i].obs[0];
      const auto& b = sim.train.subjects[(i + shift) % cfg.n].obs[1];
      const double r1 = a.y - inner_product(a.x, sim.truth.B);
      const double r2 = b.y - inner_product(b.x, sim.truth.B);
      const double s = a.z.vec().dot(sigma * b.z.vec());
      num += r1 * r2 * s;
      den += s * s;
    }
    return num / den;
  };
  const double within = slope(0);
  const double between = slope(1);
  CHECK(within > between);
  CHECK(within == doctest::Approx(1.0).epsilon(0.3));
}

TEST_CASE("metrics") {
  const DenseTensor b({2}, std::vector<double>{1, 2});
  CHECK(rmse(b, b) == 0.0);
  CHECK(rmse(DenseTensor({2}, std::vector<double>{1, 4}), b) == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS(rmse(DenseTensor({3}), b));

  ClusteredDataset test;
  test.p = test.q = {1};
  test.subjects.push_back({{{1.0, DenseTensor({1}), DenseTensor({1})}, {2.0, DenseTensor({1}), DenseTensor({1})}}});
  CHECK(rmspe({Eigen::Vector2d(2.0, 1.0)}, test) == doctest::Approx(1.0));
  CHECK(rmspe({Eigen::Vector2d(1.0, 2.0)}, test) == 0.0);

  const auto cw = coverage_width({{0, -1, 1}, {0, 0, 4}}, {0.5, 5.0});
  CHECK(cw.coverage == 0.5);
  CHECK(cw.width == 3.0);

  const auto f = support_f1({true, true, false, false}, {true, false, true, false});
  CHECK(f.precision == 0.5);
  CHECK(f.recall == 0.5);
  CHECK(f.f1 == 0.5);
}

TEST_CASE("ridge baseline limits") {
  SimConfig cfg;
  cfg.dims = {2, 2};
  cfg.n = 30;
  cfg.m = 4;
  cfg.n_test = 1;
  cfg.tau2 = 0.01;
  auto rng = substream(7, Stream::Simulate);
  const auto sim = simulate_dataset(cfg, rng);
  CHECK(ridge_solve(sim.train, 1e12).norm() < 1e-6);

  // tiny penalty reproduces least squares
  Eigen::MatrixXd x(static_cast<Eigen::Index>(sim.train.total_obs()), 4);
  Eigen::VectorXd y(x.rows());
  Eigen::Index r = 0;
  for (const auto& s : sim.train.subjects)
    for (const auto& o : s.obs) {
      x.row(r) = o.x.vec().transpose();
      y[r++] = o.y;
    }
  const Eigen::VectorXd ls = x.colPivHouseholderQr().solve(y);
  CHECK((ridge_solve(sim.train, 1e-10) - ls).norm() < 1e-6);

  const auto fit = ridge_baseline(sim.train, {0.01, 1.0, 100.0});
  CHECK(fit.cv_error.size() == 3);
  CHECK_THROWS(ridge_baseline(sim.train, {0.0, 1.0}));
}

TEST_CASE("summary statistics") {
  const auto s = summarize({5, 1, 4, 2, 3});
  CHECK(s.median == 3.0);
  CHECK(s.quartile_deviation == doctest::Approx(1.0));
  const auto t = summarize({1, 2, 3, 4, std::nan("")});
  CHECK(t.median == 2.5);
  CHECK(t.quartile_deviation == doctest::Approx(0.75));
  CHECK(std::isnan(summarize({}).median));
}

TEST_CASE("presets") {
  const auto desk = BenchmarkConfig::desk();
  CHECK(desk.sim.dims == Dims{16, 16});
  CHECK(desk.sim.n == 50);
  CHECK(desk.sim.n_test == 25);
  CHECK(desk.iters == 3000);
  CHECK(desk.burnin == 500);
  CHECK(desk.sim.replications == 5);
  const auto full = BenchmarkConfig::full();
  CHECK(full.k_values == std::vector<std::size_t>{3, 6, 9});
  CHECK(full.rank_values == std::vector<std::size_t>{1, 2, 4, 6, 8});
  CHECK(full.m_values == std::vector<std::size_t>{3, 6, 9, 12});
  CHECK(full.sim.dims == Dims{32, 32});
  CHECK(full.sim.n == 100);
  CHECK(full.iters == 11000);
  CHECK(full.grid_cells() == 60);
}

TEST_CASE("small benchmark: row bookkeeping and determinism") {
  BenchmarkConfig cfg;
  cfg.sim.dims = {3, 3};
  cfg.sim.n = 8;
  cfg.sim.n_test = 3;
  cfg.sim.replications = 2;
  cfg.m_values = {2, 3};
  cfg.k_values = {1, 2};
  cfg.rank_values = {1};
  cfg.iters = 40;
  cfg.burnin = 20;
  const auto a = run_benchmark(cfg);
  CHECK(a.rows.size() == 2 * 2 * 2 * 3);
  for (const auto& r : a.rows) CHECK(r.ok);
  const auto b = run_benchmark(cfg);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].rmse == b.rows[i].rmse);
    CHECK(a.rows[i].method == b.rows[i].method);
  }
  CHECK(a.summary.size() == 2 * 2 * 3);
  cfg.methods = {"bogus"};
  CHECK_THROWS(run_benchmark(cfg));
}
