#include "support.hpp"

#include <cmath>
#include <numbers>

#include "comet/linalg.hpp"

namespace testing {

DenseTensor random_tensor(const Dims& dims, Engine& rng) {
  return DenseTensor(dims, standard_normal(rng, static_cast<Eigen::Index>(product(dims))));
}

std::size_t uniform_index(Engine& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

Dims random_dims(Engine& rng, std::size_t order, std::size_t lo, std::size_t hi) {
  Dims d(order);
  for (auto& v : d) v = uniform_index(rng, lo, hi);
  return d;
}

double positive(Engine& rng) { return std::exp(0.5 * std::normal_distribution<double>()(rng)); }

TinyModel make_tiny(std::uint64_t seed, std::size_t order) {
  auto rng = substream(seed, Stream::Benchmark, 99);
  TinyModel t;
  const auto D = order ? order : uniform_index(rng, 1, 3);
  t.ds.p = random_dims(rng, D, 1, 3);
  t.ds.q = random_dims(rng, D, 1, 3);
  const auto n = uniform_index(rng, 2, 3);
  for (std::size_t i = 0; i < n; ++i) {
    Subject s;
    const auto m = uniform_index(rng, 1, 3);
    for (std::size_t j = 0; j < m; ++j) {
      s.obs.push_back({std::normal_distribution<double>()(rng), random_tensor(t.ds.p, rng),
                       random_tensor(t.ds.q, rng)});
    }
    t.ds.subjects.push_back(std::move(s));
  }
  t.hp.rank = uniform_index(rng, 1, 2);
  t.hp.k.clear();
  for (auto q : t.ds.q) t.hp.k.push_back(uniform_index(rng, 1, q));
  t.hp.a0 = 0.5 + positive(rng);
  t.hp.b0 = positive(rng);
  t.hp.sigma2.clear();
  for (std::size_t d = 0; d < D; ++d) t.hp.sigma2.push_back(positive(rng));
  t.hp.seed = seed;
  t.ps = draw_projections(t.ds.q, t.hp.k, seed);
  t.data = PreparedData::build(t.ds, t.ps);

  auto init = substream(seed, Stream::Init);
  t.state = init_state(t.ds, t.hp, t.ps, init);
  for (auto& f : t.state.factors.factors) f = standard_normal(rng, f.rows(), f.cols());
  for (auto& g : t.state.gamma.gamma) g = 0.7 * standard_normal(rng, g.rows(), g.cols());
  for (auto& v : t.state.dtilde) v = standard_normal(rng, v.size());
  for (auto& m : t.state.lambda2) for (auto& v : m.reshaped()) v = positive(rng);
  for (auto& m : t.state.nu) for (auto& v : m.reshaped()) v = positive(rng);
  for (auto& v : t.state.delta2) v = positive(rng);
  for (auto& v : t.state.xi) v = positive(rng);
  t.state.tau2 = positive(rng);
  return t;
}

namespace {

double normal_log_density(double x, double var) {
  return -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * x * x / var;
}

}  // namespace

double log_prior(const ParamState& s, const Hyperparams& hp) {
  double lp = inv_gamma_log_density(s.tau2, {hp.a0, hp.b0});
  for (Eigen::Index g = 0; g < s.delta2.size(); ++g) {
    lp += inv_gamma_log_density(s.xi[g], {0.5, 1.0});
    lp += inv_gamma_log_density(s.delta2[g], {0.5, 1.0 / s.xi[g]});
  }
  for (std::size_t d = 0; d < s.factors.order(); ++d) {
    const auto& f = s.factors.factors[d];
    for (Eigen::Index g = 0; g < f.cols(); ++g) {
      for (Eigen::Index j = 0; j < f.rows(); ++j) {
        lp += inv_gamma_log_density(s.nu[d](j, g), {0.5, 1.0});
        lp += inv_gamma_log_density(s.lambda2[d](j, g), {0.5, 1.0 / s.nu[d](j, g)});
        lp += normal_log_density(f(j, g), s.tau2 * s.delta2[g] * s.lambda2[d](j, g));
      }
    }
    for (double v : s.gamma.gamma[d].reshaped()) lp += normal_log_density(v, hp.sigma2_for(d));
  }
  return lp;
}

double log_lik_explicit(const PreparedData& data, const ParamState& s) {
  const Eigen::VectorXd beta = cp_compose_vec(s.factors);
  const Eigen::MatrixXd gs = gamma_star(s.gamma);
  double ll = 0.0;
  for (std::size_t i = 0; i < data.num_subjects(); ++i) {
    const auto& sub = data.subjects[i];
    const Eigen::VectorXd mean = sub.xcols.transpose() * beta + sub.ztil * gs * s.dtilde[i];
    const auto m = sub.y.size();
    ll += gaussian_log_density(sub.y, mean, s.tau2 * Eigen::MatrixXd::Identity(m, m));
    ll += gaussian_log_density(s.dtilde[i], Eigen::VectorXd::Zero(s.dtilde[i].size()), s.tau2 * data.core_cov);
  }
  return ll;
}

double log_lik_collapsed(const PreparedData& data, const ParamState& s) {
  const Eigen::VectorXd beta = cp_compose_vec(s.factors);
  const Eigen::MatrixXd gs = gamma_star(s.gamma);
  double ll = 0.0;
  for (std::size_t i = 0; i < data.num_subjects(); ++i) {
    const auto& sub = data.subjects[i];
    const Eigen::MatrixXd g = sub.ztil * gs;
    Eigen::MatrixXd c = g * data.core_cov * g.transpose();
    c.diagonal().array() += 1.0;
    ll += gaussian_log_density(sub.y, sub.xcols.transpose() * beta, s.tau2 * c);
  }
  return ll;
}

double precision_log_density(const Eigen::VectorXd& x, const PrecisionConditional& c) {
  const Cholesky chol(c.precision);
  const Eigen::VectorXd mu = chol.solve(c.linear);
  const Eigen::VectorXd r = x - mu;
  const auto k = static_cast<double>(x.size());
  const double quad = r.dot(c.precision * r) / c.scale;
  return -0.5 * k * std::log(2.0 * std::numbers::pi * c.scale) + 0.5 * chol.log_det() - 0.5 * quad;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace testing
