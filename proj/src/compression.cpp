#include "comet/compression.hpp"

#include <algorithm>
#include <cmath>

#include "comet/rng.hpp"

namespace comet {

ProjectionSet draw_projections(const Dims& q, const Dims& k, std::uint64_t seed) {
  if (q.empty() || q.size() != k.size()) {
    throw DimensionError("draw_projections: q and k must be non-empty and of equal length");
  }
  ProjectionSet ps{q, k, seed, {}, {}};
  for (std::size_t d = 0; d < q.size(); ++d) {
    if (k[d] < 1 || k[d] > q[d]) {
      throw DimensionError("compression dim k_" + std::to_string(d + 1) + "=" +
                           std::to_string(k[d]) + " must lie in [1, " + std::to_string(q[d]) +
                           "]");
    }
    const double sd = 1.0 / std::sqrt(static_cast<double>(k[d]));
    const auto rows = static_cast<Eigen::Index>(k[d]);
    const auto cols = static_cast<Eigen::Index>(q[d]);
    auto r_rng = substream(seed, Stream::ProjectionR, d);
    auto s_rng = substream(seed, Stream::ProjectionS, d);
    ps.R.push_back(sd * standard_normal(r_rng, rows, cols));
    ps.S.push_back(sd * standard_normal(s_rng, rows, cols));
  }
  return ps;
}

Dims default_compression_dims(const Dims& q) {
  const auto qmax = *std::max_element(q.begin(), q.end());
  const auto base = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(std::log(static_cast<double>(qmax)))));
  Dims k;
  for (auto qd : q) k.push_back(std::min(base, qd));
  return k;
}

Eigen::VectorXd CompressedFactors::vec(std::size_t d) const {
  const auto& g = gamma.at(d);
  return Eigen::Map<const Eigen::VectorXd>(g.data(), g.size());
}

void CompressedFactors::set_vec(std::size_t d, const Eigen::Ref<const Eigen::VectorXd>& v) {
  auto& g = gamma.at(d);
  if (v.size() != g.size()) throw DimensionError("set_vec: length mismatch");
  Eigen::Map<Eigen::VectorXd>(g.data(), g.size()) = v;
}

DenseTensor compress_covariate(const DenseTensor& z, const ProjectionSet& ps) {
  if (z.dims() != ps.q) {
    throw DimensionError("compress_covariate: covariate dims " + format_dims(z.dims()) +
                         " differ from projection dims " + format_dims(ps.q));
  }
  return multiply_all_modes(z, ps.S);
}

Eigen::VectorXd compress_covariate(const Eigen::Ref<const Eigen::VectorXd>& z,
                                   const ProjectionSet& ps) {
  return compress_covariate(DenseTensor(ps.q, z), ps).vec();
}

KroneckerAssembly assemble_kron(const ProjectionSet& ps, const CompressedFactors& cf) {
  if (cf.gamma.size() != ps.order()) throw DimensionError("assemble_kron: order mismatch");
  for (std::size_t d = 0; d < ps.order(); ++d) {
    const auto kd = static_cast<Eigen::Index>(ps.k[d]);
    if (cf.gamma[d].rows() != kd || cf.gamma[d].cols() != kd) {
      throw DimensionError("assemble_kron: Gamma_" + std::to_string(d + 1) + " is not k_d x k_d");
    }
  }
  return {kronecker_descending(cf.gamma), kronecker_descending(ps.R), kronecker_descending(ps.S)};
}

Eigen::MatrixXd core_covariance(const ProjectionSet& ps) {
  std::vector<Eigen::MatrixXd> grams;
  grams.reserve(ps.order());
  for (const auto& r : ps.R) grams.push_back(r * r.transpose());
  return kronecker_descending(grams);
}

Eigen::MatrixXd gamma_star(const CompressedFactors& cf) { return kronecker_descending(cf.gamma); }

}  // namespace comet
