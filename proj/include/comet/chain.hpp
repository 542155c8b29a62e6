#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "comet/model.hpp"
#include "comet/tensor.hpp"

namespace comet {

/// Retained draw. `beta` is vec(B) (first-mode-fastest); `factors` is empty when
/// the snapshot was read back from a fit artifact.
struct Snapshot {
  Eigen::VectorXd beta;
  std::vector<Eigen::MatrixXd> factors;
  std::vector<Eigen::MatrixXd> gamma;
  double tau2 = 0.0;
  std::vector<Eigen::MatrixXd> lambda2;  // only with keep_shrinkage
  Eigen::VectorXd delta2;                // only with keep_shrinkage
  std::vector<Eigen::VectorXd> dtilde;   // only with keep_cores
};

struct ChainMeta {
  std::string method = "comet";
  Dims p;
  Dims q;
  Dims k;
  Hyperparams hp;
  std::uint64_t projection_seed = 0;
  std::uint64_t dataset_fingerprint = 0;
};

/// Wall-clock seconds, total and per Gibbs block.
struct ChainTiming {
  double total = 0.0;
  double cores = 0.0;
  double gamma = 0.0;
  double beta = 0.0;
  double shrinkage = 0.0;
  double tau = 0.0;
};

struct Chain {
  ChainMeta meta;
  std::vector<Snapshot> snapshots;
  ChainTiming timing;

  std::size_t size() const noexcept { return snapshots.size(); }
  bool empty() const noexcept { return snapshots.empty(); }
  /// T x p* matrix whose row t is vec(B^(t)).
  Eigen::MatrixXd coefficient_draws() const;
};

}  // namespace comet
