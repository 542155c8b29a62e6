#include "comet/linalg.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace comet {

Cholesky::Cholesky(const Eigen::Ref<const Eigen::MatrixXd>& a, const char* what) {
  if (a.rows() != a.cols()) throw NumericalError(std::string("Cholesky of non-square ") + what);
  if (!a.allFinite()) throw NumericalError(std::string("non-finite entries in ") + what);
  constexpr std::array<double, 4> ladder{0.0, 1e-10, 1e-8, 1e-6};
  const double base = a.rows() > 0 ? std::max(a.diagonal().cwiseAbs().mean(), 1.0) : 1.0;
  for (double eps : ladder) {
    Eigen::MatrixXd work = a;
    if (eps > 0.0) work.diagonal().array() += eps * base;
    Eigen::LLT<Eigen::MatrixXd> llt(work);
    if (llt.info() == Eigen::Success) {
      l_ = llt.matrixL();
      jitter_ = eps * base;
      return;
    }
  }
  throw NumericalError(std::string("Cholesky failed for ") + what + " after jitter 1e-6");
}

Eigen::MatrixXd Cholesky::solve_lower(const Eigen::Ref<const Eigen::MatrixXd>& b) const {
  return l_.triangularView<Eigen::Lower>().solve(b);
}

Eigen::MatrixXd Cholesky::solve_upper(const Eigen::Ref<const Eigen::MatrixXd>& b) const {
  return l_.transpose().triangularView<Eigen::Upper>().solve(b);
}

Eigen::MatrixXd Cholesky::solve(const Eigen::Ref<const Eigen::MatrixXd>& b) const {
  return solve_upper(solve_lower(b));
}

double Cholesky::log_det() const { return 2.0 * l_.diagonal().array().log().sum(); }

Eigen::VectorXd sample_from_precision(const Eigen::Ref<const Eigen::MatrixXd>& precision,
                                      const Eigen::Ref<const Eigen::VectorXd>& linear,
                                      double scale, Engine& rng) {
  const Cholesky chol(precision, "posterior precision");
  Eigen::VectorXd mean = chol.solve(linear);
  Eigen::VectorXd z = standard_normal(rng, precision.rows());
  return mean + std::sqrt(scale) * chol.solve_upper(z);
}

Eigen::VectorXd sample_from_covariance(const Eigen::Ref<const Eigen::VectorXd>& mean,
                                       const Eigen::Ref<const Eigen::MatrixXd>& cov, double scale,
                                       Engine& rng) {
  const Cholesky chol(cov, "conditional covariance");
  Eigen::VectorXd z = standard_normal(rng, cov.rows());
  return mean + std::sqrt(scale) * (chol.matrix_l() * z);
}

double gaussian_log_density(const Eigen::Ref<const Eigen::VectorXd>& x,
                            const Eigen::Ref<const Eigen::VectorXd>& mean,
                            const Eigen::Ref<const Eigen::MatrixXd>& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("gaussian_log_density: covariance not PD");
  const Eigen::VectorXd r = llt.matrixL().solve(x - mean);
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * (static_cast<double>(x.size()) * std::log(2.0 * std::numbers::pi) + log_det +
                 r.squaredNorm());
}

double sorted_quantile(const Eigen::Ref<const Eigen::VectorXd>& sorted, double prob) {
  const auto n = sorted.size();
  if (n == 0) throw std::invalid_argument("quantile of empty sample");
  const double h = prob * static_cast<double>(n - 1);
  const auto lo = static_cast<Eigen::Index>(std::floor(h));
  const auto hi = std::min<Eigen::Index>(lo + 1, n - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace comet
