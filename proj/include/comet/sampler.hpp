#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "comet/chain.hpp"
#include "comet/compression.hpp"
#include "comet/linalg.hpp"
#include "comet/model.hpp"
#include "comet/rng.hpp"

namespace comet {

enum class Exec { Serial, Parallel };

/// Data-side quantities that stay fixed for a whole fit.
struct PreparedSubject {
  Eigen::VectorXd y;
  Eigen::MatrixXd xcols;  // p* x m_i; column j is vec(X_ij)
  Eigen::MatrixXd zcols;  // q* x m_i; column j is vec(Z_ij)
  Eigen::MatrixXd ztil;   // m_i x k*; row j is vec(Z~_ij)
};

struct PreparedData {
  Dims p;
  Dims q;
  Dims k;
  std::vector<PreparedSubject> subjects;
  std::vector<std::size_t> offsets;  // first stacked row of each subject
  std::size_t total_obs = 0;
  Eigen::MatrixXd core_cov;          // R* R*^T

  static PreparedData build(const ClusteredDataset& ds, const ProjectionSet& ps);
  std::size_t order() const noexcept { return p.size(); }
  std::size_t num_subjects() const noexcept { return subjects.size(); }
  /// Swap in new responses (same shapes); used by the Geweke harness.
  void set_responses(const std::vector<Eigen::VectorXd>& y);
};

/// Blocks of the joint covariance of (y_i, d~_i), all divided by tau2.
struct SubjectGaussianBlocks {
  Eigen::MatrixXd v_yy;  // m_i x m_i, equals C_i
  Eigen::MatrixXd v_yd;  // m_i x k*
  Eigen::MatrixXd v_dd;  // k* x k*
  Cholesky chol;         // of v_yy
};

SubjectGaussianBlocks joint_blocks(const Eigen::Ref<const Eigen::MatrixXd>& ztil,
                                   const Eigen::Ref<const Eigen::MatrixXd>& gamma_star,
                                   const Eigen::Ref<const Eigen::MatrixXd>& core_cov);

/// N(mean, scale * cov).
struct GaussianConditional {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double scale = 1.0;
};

/// N(P^{-1} linear, scale * P^{-1}).
struct PrecisionConditional {
  Eigen::MatrixXd precision;
  Eigen::VectorXd linear;
  double scale = 1.0;

  Eigen::VectorXd mean() const;
  Eigen::MatrixXd covariance() const;  // includes scale
  Eigen::VectorXd sample(Engine& rng) const;
};

struct RegressionDesign {
  Eigen::VectorXd response;
  Eigen::MatrixXd design;
};

/// Per-subject lower Cholesky factors L_i of the working covariance C_i.
struct Whitening {
  std::vector<Cholesky> chol;

  static Whitening from_blocks(const std::vector<SubjectGaussianBlocks>& blocks);
  /// C_i = Z_i cov Z_i^T + I, the uncompressed working covariance.
  static Whitening from_covariance(const PreparedData& data,
                                   const Eigen::Ref<const Eigen::MatrixXd>& cov);
  /// L_i^{-1} m for an m_i-row matrix.
  Eigen::MatrixXd whiten(std::size_t subject, const Eigen::Ref<const Eigen::MatrixXd>& m) const;
};

// Block 1: cores and compressed covariance factors -------------------------

GaussianConditional dtilde_conditional(const PreparedSubject& s, const SubjectGaussianBlocks& b,
                                       const Eigen::Ref<const Eigen::VectorXd>& beta, double tau2);
Eigen::VectorXd sample_dtilde(const PreparedSubject& s, const SubjectGaussianBlocks& b,
                              const Eigen::Ref<const Eigen::VectorXd>& beta, double tau2,
                              Engine& rng);

/// Stacked y_ij - <X_ij, B> and the N x k_d^2 design whose rows are
/// vec(Z~_ij(d) (Gamma_{-d}) D~_i(d)^T).
RegressionDesign gamma_design(std::size_t mode, const PreparedData& data,
                              const CompressedFactors& gamma,
                              const std::vector<Eigen::VectorXd>& cores,
                              const Eigen::Ref<const Eigen::VectorXd>& beta);
PrecisionConditional gamma_conditional(const RegressionDesign& design, double tau2,
                                       double sigma2);

// Block 2: CP margins, shrinkage and tau2 with cores integrated out --------

/// Whitened response and the whitened N x (K p_d) design with rows vec(X_ij(d) B_{-d}).
RegressionDesign beta_design(std::size_t mode, const PreparedData& data, const Whitening& w,
                             const CpDecomposition& factors, Exec exec = Exec::Parallel);
/// Direct transcription (explicit unfold and Khatri-Rao per observation); test reference.
RegressionDesign beta_design_reference(std::size_t mode, const PreparedData& data,
                                       const Whitening& w, const CpDecomposition& factors);
PrecisionConditional beta_conditional(std::size_t mode, const RegressionDesign& design,
                                      const ParamState& state);

InvGammaParams local_shrinkage_conditional(double beta, double nu, double tau2, double delta2);
InvGammaParams nu_conditional(double lambda2);
InvGammaParams global_shrinkage_conditional(std::size_t component, const ParamState& state);
InvGammaParams xi_conditional(double delta2);

/// Sum over subjects of ||L_i^{-1}(y_i - X_i beta)||^2.
double whitened_rss(const PreparedData& data, const Whitening& w,
                    const Eigen::Ref<const Eigen::VectorXd>& beta, Exec exec = Exec::Parallel);
InvGammaParams tau2_conditional(const PreparedData& data, const Whitening& w,
                                const ParamState& state, const Hyperparams& hp);

/// Mode-d local updates (lambda2 then nu) for every g, j.
void sample_local_shrinkage(std::size_t mode, ParamState& state, Engine& rng);
void sample_global_shrinkage(ParamState& state, Engine& rng);

// Sweeps ------------------------------------------------------------------

/// Per-subject blocks at the current Gamma.
std::vector<SubjectGaussianBlocks> compute_blocks(const PreparedData& data,
                                                  const CompressedFactors& gamma,
                                                  Exec exec = Exec::Parallel);
/// Draws every core from its own (seed, sweep, subject) substream.
void sample_all_cores(const PreparedData& data, const std::vector<SubjectGaussianBlocks>& blocks,
                      const Eigen::Ref<const Eigen::VectorXd>& beta, double tau2,
                      std::uint64_t seed, std::uint64_t sweep, std::vector<Eigen::VectorXd>& out,
                      Exec exec = Exec::Parallel);

/// Identifies the random substreams of one sweep.
struct SweepKey {
  std::uint64_t seed = 0;
  std::uint64_t sweep = 0;
};

/// Steps (c)-(e): margins with their local shrinkage, global shrinkage, tau2,
/// all given the whitening of the current working covariance.
void block2_update(const PreparedData& data, const Whitening& w, const Hyperparams& hp,
                   ParamState& state, SweepKey key, ChainTiming* timing = nullptr,
                   Exec exec = Exec::Parallel);

/// One full sweep; the input state is left untouched.
ParamState gibbs_step(const PreparedData& data, const Hyperparams& hp, const ParamState& state,
                      SweepKey key, ChainTiming* timing = nullptr, Exec exec = Exec::Parallel);

struct RunOptions {
  Exec exec = Exec::Parallel;
};

/// Draws the projections from hp.seed, initialises, iterates hp.iters sweeps and
/// retains the post-burn-in draws. Numerical failures are rethrown as
/// NumericalError naming the iteration.
Chain run_chain(const ClusteredDataset& ds, const Hyperparams& hp, RunOptions opts = {});
Chain run_chain(const ClusteredDataset& ds, const Hyperparams& hp, const ProjectionSet& ps,
                RunOptions opts = {});

/// Compression dims actually used for a fit (hp.k or the default rule).
Dims resolve_compression_dims(const Hyperparams& hp, const Dims& q);

}  // namespace comet
