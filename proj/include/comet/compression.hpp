#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "comet/tensor.hpp"

namespace comet {

/// Fixed mode-wise Gaussian sketches. R[d] and S[d] are k_d x q_d with iid
/// N(0, 1/k_d) entries; R and S come from independent substreams of `seed`.
struct ProjectionSet {
  Dims q;
  Dims k;
  std::uint64_t seed = 0;
  std::vector<Eigen::MatrixXd> R;
  std::vector<Eigen::MatrixXd> S;

  std::size_t order() const noexcept { return q.size(); }
  std::size_t core_size() const { return product(k); }
};

ProjectionSet draw_projections(const Dims& q, const Dims& k, std::uint64_t seed);

/// max(1, ceil(ln(max_d q_d))) for each mode, clipped to q_d.
Dims default_compression_dims(const Dims& q);

/// Gamma[d] is k_d x k_d.
struct CompressedFactors {
  std::vector<Eigen::MatrixXd> gamma;

  /// vec(Gamma_d), column-major.
  Eigen::VectorXd vec(std::size_t d) const;
  void set_vec(std::size_t d, const Eigen::Ref<const Eigen::VectorXd>& v);
};

/// z x_1 S_1 x_2 ... x_D S_D.
DenseTensor compress_covariate(const DenseTensor& z, const ProjectionSet& ps);
/// Same map on a flat first-mode-fastest vector of length q*.
Eigen::VectorXd compress_covariate(const Eigen::Ref<const Eigen::VectorXd>& z,
                                   const ProjectionSet& ps);

struct KroneckerAssembly {
  Eigen::MatrixXd gamma_star;  // k* x k*
  Eigen::MatrixXd r_star;      // k* x q*
  Eigen::MatrixXd s_star;      // k* x q*
};

/// Starred matrices are Kronecker products in descending mode order.
KroneckerAssembly assemble_kron(const ProjectionSet& ps, const CompressedFactors& cf);

/// R* R*^T, assembled as (R_D R_D^T) (x) ... (x) (R_1 R_1^T) without forming R*.
Eigen::MatrixXd core_covariance(const ProjectionSet& ps);

/// Gamma* alone.
Eigen::MatrixXd gamma_star(const CompressedFactors& cf);

}  // namespace comet
