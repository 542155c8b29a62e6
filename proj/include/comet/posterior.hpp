#pragma once

#include <vector>

#include <Eigen/Dense>

#include "comet/chain.hpp"
#include "comet/compression.hpp"
#include "comet/rng.hpp"
#include "comet/tensor.hpp"

namespace comet {

/// Cell-wise posterior median of B. Even-length chains average the two
/// central order statistics.
DenseTensor point_estimate(const Chain& chain);

struct CellIntervals {
  DenseTensor lo;
  DenseTensor hi;
};

/// Equal-tailed intervals with linear-interpolation quantiles.
CellIntervals credible_intervals(const Chain& chain, double level);

/// Sequential two-means selection, per-draw variant: in each draw the absolute
/// cell values are split by 1-D 2-means (centres start at min and max); a cell
/// is selected when it lands in the larger-centre cluster in more than half of
/// the draws. A draw whose absolute values are all equal selects nothing.
std::vector<bool> select_s2m(const Chain& chain);

/// Two-cluster Lloyd iteration on 1-D values; true marks the larger-centre cluster.
std::vector<bool> two_means_split(const Eigen::Ref<const Eigen::VectorXd>& values);

/// Cells whose equal-tailed interval excludes zero.
std::vector<bool> select_ci(const CellIntervals& ci);

/// Covariates of one new subject; rows are vectorised observations.
struct NewSubject {
  Eigen::MatrixXd x;  // m* x p*
  Eigen::MatrixXd z;  // m* x q*
};

/// T x m* predictive draws: row t ~ N(X beta^(t), tau2^(t) (Z~ Gamma*^(t) R* R*^T Gamma*^(t)^T Z~^T + I)).
Eigen::MatrixXd predict_draws(const Chain& chain, const ProjectionSet& ps, const NewSubject& subject,
                              Engine& rng);

/// Same with a fixed uncompressed random-effects covariance Sigma* (q* x q*):
/// row t ~ N(X beta^(t), tau2^(t) (Z Sigma* Z^T + I)). Used by the oracle.
Eigen::MatrixXd predict_draws_fixed(const Chain& chain,
                                    const Eigen::Ref<const Eigen::MatrixXd>& sigma_star,
                                    const NewSubject& subject, Engine& rng);

struct PredictionInterval {
  double point;
  double lo;
  double hi;
};

/// Point prediction is the mean of the draws (noise included); bounds are
/// equal-tailed quantiles per observation (column).
std::vector<PredictionInterval> prediction_intervals(const Eigen::Ref<const Eigen::MatrixXd>& draws,
                                                     double level);

}  // namespace comet
