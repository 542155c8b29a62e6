#include <doctest.h>

#include <cmath>

#include "comet/posterior.hpp"
#include "comet/rng.hpp"

using namespace comet;

namespace {

Chain chain_of(const std::vector<std::vector<double>>& betas, Dims p) {
  Chain c;
  c.meta.p = std::move(p);
  c.meta.q = {1};
  c.meta.k = {1};
  for (const auto& b : betas) {
    Snapshot s;
    s.beta = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    s.gamma = {Eigen::MatrixXd::Constant(1, 1, 0.5)};
    s.tau2 = 1.0;
    c.snapshots.push_back(s);
  }
  return c;
}

}  // namespace

TEST_CASE("point estimate is the cell-wise median") {
  CHECK(point_estimate(chain_of({{1, 5}, {3, 4}}, {2})).data()[0] == 2.0);
  CHECK(point_estimate(chain_of({{1, 5}, {3, 4}, {2, 9}}, {2})).data()[1] == 5.0);
  CHECK_THROWS(point_estimate(Chain{}));
}

TEST_CASE("credible intervals") {
  std::vector<std::vector<double>> draws;
  for (int i = 0; i <= 100; ++i) draws.push_back({static_cast<double>(i)});
  const auto c = chain_of(draws, {1});
  const auto ci = credible_intervals(c, 0.9);
  CHECK(ci.lo.data()[0] == doctest::Approx(5.0));
  CHECK(ci.hi.data()[0] == doctest::Approx(95.0));
  CHECK_THROWS(credible_intervals(c, 1.0));
  CHECK_THROWS(credible_intervals(chain_of({{1}}, {1}), 0.9));
}

TEST_CASE("two-means split") {
  Eigen::VectorXd v(6);
  v << 0.01, 0.02, 2.0, 0.0, 1.9, 0.03;
  const auto s = two_means_split(v);
  CHECK(s == std::vector<bool>{false, false, true, false, true, false});
  CHECK(two_means_split(Eigen::VectorXd::Constant(4, 0.3)) == std::vector<bool>(4, false));
}

TEST_CASE("selection rules on synthetic chains") {
  std::vector<std::vector<double>> zero(50, {0.0, 0.0, 0.0});
  const auto z = chain_of(zero, {3});
  CHECK(select_s2m(z) == std::vector<bool>(3, false));
  CHECK(select_ci(credible_intervals(z, 0.95)) == std::vector<bool>(3, false));

  auto rng = substream(1, Stream::Benchmark);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<std::vector<double>> strong;
  for (int t = 0; t < 200; ++t) strong.push_back({noise(rng), 3.0 + noise(rng), noise(rng)});
  const auto s = chain_of(strong, {3});
  const std::vector<bool> expected{false, true, false};
  CHECK(select_s2m(s) == expected);
  CHECK(select_ci(credible_intervals(s, 0.95)) == expected);
}

TEST_CASE("predictive draws centre on X beta") {
  auto rng = substream(2, Stream::Benchmark);
  std::vector<std::vector<double>> betas;
  for (int t = 0; t < 20000; ++t) betas.push_back({1.0 + 0.1 * std::sin(t), -0.5});
  const auto chain = chain_of(betas, {2});
  const auto ps = draw_projections({1}, {1}, 3);
  NewSubject s{Eigen::MatrixXd(1, 2), Eigen::MatrixXd::Constant(1, 1, 0.8)};
  s.x << 2.0, 1.0;
  const auto draws = predict_draws(chain, ps, s, rng);
  REQUIRE(draws.rows() == 20000);
  double target = 0.0;
  for (const auto& b : betas) target += 2.0 * b[0] + b[1];
  target /= 20000.0;
  const Eigen::VectorXd col = draws.col(0);
  const double mean = col.mean();
  const double sd = std::sqrt((col.array() - mean).square().mean());
  CHECK(std::abs(mean - target) < 4 * sd / std::sqrt(20000.0));

  NewSubject wrong{Eigen::MatrixXd::Zero(1, 3), Eigen::MatrixXd::Zero(1, 1)};
  CHECK_THROWS(predict_draws(chain, ps, wrong, rng));
}

TEST_CASE("prediction intervals of standard-normal draws") {
  auto rng = substream(3, Stream::Benchmark);
  const Eigen::MatrixXd draws = standard_normal(rng, 100000, 1);
  const auto pi = prediction_intervals(draws, 0.95);
  CHECK(std::abs(pi[0].lo + 1.959964) < 0.035);
  CHECK(std::abs(pi[0].hi - 1.959964) < 0.035);
  const auto narrow = prediction_intervals(draws, 0.5);
  const auto wide = prediction_intervals(draws, 0.99);
  CHECK(narrow[0].lo > pi[0].lo);
  CHECK(wide[0].hi > pi[0].hi);
}
