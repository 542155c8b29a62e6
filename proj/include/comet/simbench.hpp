#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "comet/chain.hpp"
#include "comet/model.hpp"
#include "comet/posterior.hpp"
#include "comet/rng.hpp"
#include "comet/tensor.hpp"

namespace comet {

/// Simulation protocol: CP-sparse truth, separable equicorrelated random
/// effects, standard-normal covariates, p = q.
struct SimConfig {
  Dims dims{32, 32};
  std::size_t true_rank = 4;
  double density = 0.25;
  std::vector<double> values{-2.0, -1.0, 1.0, 2.0};
  double rho = 0.5;
  double tau2 = 0.1;
  std::size_t n = 100;
  std::size_t m = 6;
  std::vector<std::size_t> m_list;  // unbalanced sizes; overrides m when non-empty
  std::size_t n_test = 50;
  std::size_t m_test = 0;           // 0 means same as m
  std::size_t replications = 25;
  std::uint64_t seed = 1;

  /// Throws ValidationError on a violated invariant.
  void check() const;
};

struct Truth {
  CpDecomposition cp;
  DenseTensor B;
  std::vector<Eigen::MatrixXd> sigma;  // per-mode covariances
  double rho = 0.0;
  double tau2 = 0.0;

  /// Sigma_D (x) ... (x) Sigma_1.
  Eigen::MatrixXd sigma_star() const;
  std::vector<bool> support() const;
};

struct SimulatedData {
  ClusteredDataset train;
  ClusteredDataset test;
  Truth truth;
};

/// Exactly ceil(density p_d K) entries per factor (positions without
/// replacement), values drawn with replacement from cfg.values.
CpDecomposition gen_true_cp(const SimConfig& cfg, Engine& rng);

Eigen::MatrixXd equicorrelation(std::size_t q, double rho);

/// vec(A) ~ N(0, tau2 Sigma_D (x) ... (x) Sigma_1), built from an iid core
/// multiplied along each mode by a Cholesky factor (scaled by sqrt(tau2) on mode 1).
DenseTensor tensor_normal_draw(const Dims& dims, const std::vector<Eigen::MatrixXd>& covariances,
                               double tau2, Engine& rng);

SimulatedData simulate_dataset(const SimConfig& cfg, Engine& rng);

/// Block-2 sampler with the working covariance fixed at Z_i Sigma* Z_i^T + I.
Chain oracle_fit(const ClusteredDataset& ds, const Hyperparams& hp, const Truth& truth);

struct RidgeFit {
  DenseTensor B;
  double penalty = 0.0;
  std::vector<double> cv_error;  // one per grid value
};

/// (X^T X + penalty I)^{-1} X^T y on stacked vectorised covariates.
Eigen::VectorXd ridge_solve(const ClusteredDataset& ds, double penalty);
/// Penalty chosen by grouped cross-validation (subject i in fold i mod folds).
RidgeFit ridge_baseline(const ClusteredDataset& ds, const std::vector<double>& penalties,
                        std::size_t folds = 5);
std::vector<double> default_ridge_grid();

double rmse(const DenseTensor& estimate, const DenseTensor& truth);
/// Root of the subject-averaged per-subject mean squared error.
double rmspe(const std::vector<Eigen::VectorXd>& predictions, const ClusteredDataset& test);

struct CoverageWidth {
  double coverage;
  double width;
};
CoverageWidth coverage_width(const std::vector<PredictionInterval>& intervals,
                             const std::vector<double>& targets);

struct SupportScore {
  double precision;
  double recall;
  double f1;
};
SupportScore support_f1(const std::vector<bool>& selected, const std::vector<bool>& truth);

NewSubject to_new_subject(const Subject& s);

// Benchmark ---------------------------------------------------------------

struct BenchmarkConfig {
  SimConfig sim;
  std::vector<std::string> methods{"comet", "oracle", "ridge"};
  std::vector<std::size_t> m_values{6};
  std::vector<std::size_t> k_values{3};      // same k for every mode
  std::vector<std::size_t> rank_values{4};
  std::size_t iters = 3000;
  std::size_t burnin = 500;
  double level = 0.95;
  std::vector<double> ridge_grid = default_ridge_grid();

  static BenchmarkConfig desk();
  static BenchmarkConfig full();
  std::size_t grid_cells() const { return m_values.size() * k_values.size() * rank_values.size(); }
};

struct BenchmarkRow {
  std::size_t replication = 0;
  std::size_t m = 0;
  std::size_t k = 0;
  std::size_t rank = 0;
  std::string method;
  double rmse = 0.0;
  double rmspe = 0.0;
  double coverage = 0.0;  // NaN when the method gives no intervals
  double width = 0.0;
  double f1 = 0.0;        // NaN when the method does no selection
  double seconds = 0.0;
  bool ok = true;
  std::string error;
};

struct SummaryStat {
  double median;
  double quartile_deviation;  // (Q3 - Q1) / 2
};
SummaryStat summarize(std::vector<double> values);

struct SummaryRow {
  std::size_t m, k, rank;
  std::string method;
  std::size_t count;
  SummaryStat rmse, rmspe, coverage, width, f1;
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;
  std::vector<SummaryRow> summary;
  double seconds = 0.0;
};

BenchmarkReport run_benchmark(const BenchmarkConfig& cfg);
std::vector<SummaryRow> summarize_rows(const std::vector<BenchmarkRow>& rows);

}  // namespace comet
