#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "comet/compression.hpp"
#include "comet/rng.hpp"
#include "comet/tensor.hpp"

namespace comet {

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Observation {
  double y = 0.0;
  DenseTensor x;  // dims p
  DenseTensor z;  // dims q
};

struct Subject {
  std::vector<Observation> obs;
};

struct ClusteredDataset {
  Dims p;
  Dims q;
  std::vector<Subject> subjects;

  std::size_t order() const noexcept { return p.size(); }
  std::size_t num_subjects() const noexcept { return subjects.size(); }
  std::size_t total_obs() const;
};

enum class IssueKind { Empty, EmptySubject, DimensionMismatch, NonFinite };

/// First invariant violation found. Subject/observation numbers are 1-based.
struct DatasetIssue {
  IssueKind kind;
  std::size_t subject = 0;
  std::size_t observation = 0;
  std::string field;
  std::string message;
};

std::optional<DatasetIssue> validate_dataset(const ClusteredDataset& ds);
/// Throws ValidationError carrying the issue message.
void require_valid(const ClusteredDataset& ds);

/// 64-bit FNV-1a over dims and every stored value; identifies a dataset in fit artifacts.
std::uint64_t dataset_fingerprint(const ClusteredDataset& ds);

struct Hyperparams {
  std::size_t rank = 1;
  Dims k;                      // compression dims; empty selects the default rule
  double a0 = 0.01;
  double b0 = 0.01;
  std::vector<double> sigma2;  // per-mode prior variance of gamma_d; empty means all 1
  std::size_t iters = 11000;
  std::size_t burnin = 1000;
  std::uint64_t seed = 1;
  bool keep_shrinkage = false;
  bool keep_cores = false;

  double sigma2_for(std::size_t d) const { return sigma2.empty() ? 1.0 : sigma2.at(d); }
  /// Throws ValidationError on a violated invariant.
  void check(std::size_t order) const;
};

/// One Gibbs state. Shrinkage matrices are laid out like the factors: mode d
/// holds a p_d x K matrix whose (j, g) entry belongs to beta_{dj}^{(g)}.
struct ParamState {
  CpDecomposition factors;
  CompressedFactors gamma;
  double tau2 = 1.0;
  std::vector<Eigen::MatrixXd> lambda2;
  std::vector<Eigen::MatrixXd> nu;
  Eigen::VectorXd delta2;
  Eigen::VectorXd xi;
  std::vector<Eigen::VectorXd> dtilde;  // one length-k* core per subject
};

/// Positivity, finiteness and shape audit. Returns the first problem found.
std::optional<std::string> audit_state(const ParamState& s, const Dims& p, const Dims& k,
                                       std::size_t num_subjects);

/// Small random factors (N(0, 0.01)), Gamma_d entries N(0, 0.01 / k_d), tau2 = 1,
/// unit shrinkage and auxiliaries, zero cores.
ParamState init_state(const ClusteredDataset& ds, const Hyperparams& hp, const ProjectionSet& ps,
                      Engine& rng);

}  // namespace comet
