#include "comet/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "comet/linalg.hpp"

namespace comet {

namespace {

void require_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0, 1)");
}

Eigen::VectorXd sorted_column(const Eigen::MatrixXd& m, Eigen::Index c) {
  Eigen::VectorXd v = m.col(c);
  std::sort(v.data(), v.data() + v.size());
  return v;
}

template <class CovFn>
Eigen::MatrixXd predict_impl(const Chain& chain, const NewSubject& s, std::size_t pstar,
                             Engine& rng, CovFn&& random_cov) {
  if (chain.empty()) throw std::invalid_argument("predict: empty chain");
  if (static_cast<std::size_t>(s.x.cols()) != pstar || s.x.rows() != s.z.rows()) {
    throw DimensionError("predict: new covariate dims do not match the fit");
  }
  const auto m = s.x.rows();
  Eigen::MatrixXd draws(static_cast<Eigen::Index>(chain.size()), m);
  for (std::size_t t = 0; t < chain.size(); ++t) {
    const auto& snap = chain.snapshots[t];
    Eigen::MatrixXd cov = random_cov(snap);
    cov.diagonal().array() += 1.0;
    const Eigen::VectorXd mean = s.x * snap.beta;
    draws.row(static_cast<Eigen::Index>(t)) = sample_from_covariance(mean, cov, snap.tau2, rng).transpose();
  }
  return draws;
}

}  // namespace

DenseTensor point_estimate(const Chain& chain) {
  if (chain.empty()) throw std::invalid_argument("point_estimate: empty chain");
  const auto draws = chain.coefficient_draws();
  Eigen::VectorXd med(draws.cols());
  for (Eigen::Index c = 0; c < draws.cols(); ++c) med[c] = sorted_quantile(sorted_column(draws, c), 0.5);
  return DenseTensor(chain.meta.p, med);
}

CellIntervals credible_intervals(const Chain& chain, double level) {
  require_level(level);
  if (chain.size() < 2) throw std::invalid_argument("credible_intervals: need at least 2 draws");
  const auto draws = chain.coefficient_draws();
  const double tail = 0.5 * (1.0 - level);
  CellIntervals out{DenseTensor(chain.meta.p), DenseTensor(chain.meta.p)};
  for (Eigen::Index c = 0; c < draws.cols(); ++c) {
    const auto v = sorted_column(draws, c);
    out.lo.data()[static_cast<std::size_t>(c)] = sorted_quantile(v, tail);
    out.hi.data()[static_cast<std::size_t>(c)] = sorted_quantile(v, 1.0 - tail);
  }
  return out;
}

std::vector<bool> two_means_split(const Eigen::Ref<const Eigen::VectorXd>& values) {
  const auto n = values.size();
  std::vector<bool> high(static_cast<std::size_t>(n), false);
  if (n == 0) return high;
  double c_lo = values.minCoeff();
  double c_hi = values.maxCoeff();
  if (!(c_hi > c_lo)) return high;
  for (int iter = 0; iter < 1000; ++iter) {
    bool changed = false;
    double sum_lo = 0.0, sum_hi = 0.0;
    Eigen::Index n_lo = 0, n_hi = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      // ties go to the low cluster
      const bool h = std::abs(values[i] - c_hi) < std::abs(values[i] - c_lo);
      if (h != high[static_cast<std::size_t>(i)]) changed = true;
      high[static_cast<std::size_t>(i)] = h;
      (h ? sum_hi : sum_lo) += values[i];
      ++(h ? n_hi : n_lo);
    }
    if (n_lo > 0) c_lo = sum_lo / static_cast<double>(n_lo);
    if (n_hi > 0) c_hi = sum_hi / static_cast<double>(n_hi);
    if (!changed && iter > 0) break;
  }
  return high;
}

std::vector<bool> select_s2m(const Chain& chain) {
  if (chain.empty()) throw std::invalid_argument("select_s2m: empty chain");
  const auto draws = chain.coefficient_draws();
  std::vector<std::size_t> hits(static_cast<std::size_t>(draws.cols()), 0);
  for (Eigen::Index t = 0; t < draws.rows(); ++t) {
    const Eigen::VectorXd a = draws.row(t).cwiseAbs().transpose();
    const auto split = two_means_split(a);
    for (std::size_t c = 0; c < split.size(); ++c) hits[c] += split[c] ? 1 : 0;
  }
  std::vector<bool> out(hits.size());
  for (std::size_t c = 0; c < hits.size(); ++c) {
    out[c] = 2 * hits[c] > static_cast<std::size_t>(draws.rows());
  }
  return out;
}

std::vector<bool> select_ci(const CellIntervals& ci) {
  std::vector<bool> out(ci.lo.size());
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = ci.lo.data()[c] > 0.0 || ci.hi.data()[c] < 0.0;
  return out;
}

Eigen::MatrixXd predict_draws(const Chain& chain, const ProjectionSet& ps, const NewSubject& subject,
                              Engine& rng) {
  if (static_cast<std::size_t>(subject.z.cols()) != product(ps.q)) {
    throw DimensionError("predict: random-effect covariate dims do not match the projections");
  }
  const Eigen::MatrixXd s_star = kronecker_descending(ps.S);
  const Eigen::MatrixXd ztil = subject.z * s_star.transpose();
  const Eigen::MatrixXd core = core_covariance(ps);
  return predict_impl(chain, subject, product(chain.meta.p), rng, [&](const Snapshot& snap) {
    const Eigen::MatrixXd g = ztil * kronecker_descending(snap.gamma);
    Eigen::MatrixXd cov = g * core * g.transpose();
    return Eigen::MatrixXd(0.5 * (cov + cov.transpose()));
  });
}

Eigen::MatrixXd predict_draws_fixed(const Chain& chain,
                                    const Eigen::Ref<const Eigen::MatrixXd>& sigma_star,
                                    const NewSubject& subject, Engine& rng) {
  if (subject.z.cols() != sigma_star.rows()) throw DimensionError("predict: Sigma* dims mismatch");
  Eigen::MatrixXd fixed = subject.z * sigma_star * subject.z.transpose();
  fixed = 0.5 * (fixed + fixed.transpose()).eval();
  return predict_impl(chain, subject, product(chain.meta.p), rng,
                      [&](const Snapshot&) { return fixed; });
}

std::vector<PredictionInterval> prediction_intervals(const Eigen::Ref<const Eigen::MatrixXd>& draws,
                                                     double level) {
  require_level(level);
  if (draws.rows() == 0) throw std::invalid_argument("prediction_intervals: no draws");
  const double tail = 0.5 * (1.0 - level);
  const Eigen::MatrixXd d = draws;
  std::vector<PredictionInterval> out;
  for (Eigen::Index c = 0; c < d.cols(); ++c) {
    const auto v = sorted_column(d, c);
    out.push_back({d.col(c).mean(), sorted_quantile(v, tail), sorted_quantile(v, 1.0 - tail)});
  }
  return out;
}

}  // namespace comet
