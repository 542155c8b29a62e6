#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "comet/rng.hpp"

namespace comet {

/// Numerical breakdown (e.g. a Cholesky that fails even after jitter).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lower Cholesky factor of a symmetric matrix. On failure the diagonal is
/// inflated by 1e-10, 1e-8 and then 1e-6 (relative to the mean diagonal, with
/// an absolute floor); if all three fail a NumericalError is thrown.
class Cholesky {
 public:
  Cholesky() = default;
  explicit Cholesky(const Eigen::Ref<const Eigen::MatrixXd>& a, const char* what = "matrix");

  Eigen::Index size() const { return l_.rows(); }
  const Eigen::MatrixXd& matrix_l() const { return l_; }
  double jitter() const { return jitter_; }

  /// L^{-1} b
  Eigen::MatrixXd solve_lower(const Eigen::Ref<const Eigen::MatrixXd>& b) const;
  /// L^{-T} b
  Eigen::MatrixXd solve_upper(const Eigen::Ref<const Eigen::MatrixXd>& b) const;
  /// A^{-1} b
  Eigen::MatrixXd solve(const Eigen::Ref<const Eigen::MatrixXd>& b) const;
  double log_det() const;

 private:
  Eigen::MatrixXd l_;
  double jitter_ = 0.0;
};

/// Draw from N(P^{-1} b, scale * P^{-1}) given the precision P, without forming P^{-1}.
Eigen::VectorXd sample_from_precision(const Eigen::Ref<const Eigen::MatrixXd>& precision,
                                      const Eigen::Ref<const Eigen::VectorXd>& linear,
                                      double scale, Engine& rng);

/// Draw from N(mean, scale * cov).
Eigen::VectorXd sample_from_covariance(const Eigen::Ref<const Eigen::VectorXd>& mean,
                                       const Eigen::Ref<const Eigen::MatrixXd>& cov, double scale,
                                       Engine& rng);

double gaussian_log_density(const Eigen::Ref<const Eigen::VectorXd>& x,
                            const Eigen::Ref<const Eigen::VectorXd>& mean,
                            const Eigen::Ref<const Eigen::MatrixXd>& cov);

/// Linear-interpolation sample quantile (type 7) of an already sorted range.
double sorted_quantile(const Eigen::Ref<const Eigen::VectorXd>& sorted, double prob);

}  // namespace comet
