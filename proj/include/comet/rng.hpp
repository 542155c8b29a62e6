#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace comet {

/// Every random quantity comes from std::mt19937_64 seeded through
/// std::seed_seq over (seed, purpose, a, b). Both algorithms are fixed by the
/// C++ standard, so a key always maps to the same bit stream.
using Engine = std::mt19937_64;

enum class Stream : std::uint32_t {
  ProjectionR = 1,
  ProjectionS = 2,
  Init = 3,
  Cores = 4,
  Gamma = 5,
  Beta = 6,
  LocalShrinkage = 7,
  GlobalShrinkage = 8,
  Tau = 9,
  Simulate = 10,
  Predict = 11,
  Benchmark = 12,
  Geweke = 13,
};

Engine substream(std::uint64_t seed, Stream purpose, std::uint64_t a = 0, std::uint64_t b = 0);

/// Mixes extra coordinates into a seed; used to derive per-cell seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

Eigen::VectorXd standard_normal(Engine& rng, Eigen::Index n);
Eigen::MatrixXd standard_normal(Engine& rng, Eigen::Index rows, Eigen::Index cols);

/// Gamma(shape, rate) drawn via std::gamma_distribution.
double draw_gamma(Engine& rng, double shape, double rate);

/// Inverse-gamma with density proportional to x^{-shape-1} exp(-scale / x).
/// Drawn as 1 / Gamma(shape, rate = scale), with the gamma draw floored at 1e-300.
double draw_inv_gamma(Engine& rng, double shape, double scale);

struct InvGammaParams {
  double shape;
  double scale;
};

double inv_gamma_log_density(double x, InvGammaParams p);

}  // namespace comet
