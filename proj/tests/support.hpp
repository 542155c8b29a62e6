#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "comet/compression.hpp"
#include "comet/model.hpp"
#include "comet/rng.hpp"
#include "comet/sampler.hpp"
#include "comet/tensor.hpp"

namespace testing {

using namespace comet;

DenseTensor random_tensor(const Dims& dims, Engine& rng);
Dims random_dims(Engine& rng, std::size_t order, std::size_t lo, std::size_t hi);
std::size_t uniform_index(Engine& rng, std::size_t lo, std::size_t hi);  // inclusive
double positive(Engine& rng);  // exp(N(0, 0.5^2))

/// Small random dataset with matching projections and a random valid state.
struct TinyModel {
  ClusteredDataset ds;
  Hyperparams hp;
  ProjectionSet ps;
  PreparedData data;
  ParamState state;
};
TinyModel make_tiny(std::uint64_t seed, std::size_t order = 0);

/// Parameter-expanded priors of every block except the cores.
double log_prior(const ParamState& s, const Hyperparams& hp);
/// Likelihood with cores explicit plus the core prior N(0, tau2 R* R*^T).
double log_lik_explicit(const PreparedData& data, const ParamState& s);
/// Likelihood with cores integrated out: y_i ~ N(X_i beta, tau2 C_i).
double log_lik_collapsed(const PreparedData& data, const ParamState& s);

/// log N(x; P^{-1} b, scale P^{-1}).
double precision_log_density(const Eigen::VectorXd& x, const PrecisionConditional& c);

double rel_diff(double a, double b);

}  // namespace testing
