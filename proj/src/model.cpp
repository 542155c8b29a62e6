#include "comet/model.hpp"

#include <cmath>
#include <cstring>

namespace comet {

std::size_t ClusteredDataset::total_obs() const {
  std::size_t n = 0;
  for (const auto& s : subjects) n += s.obs.size();
  return n;
}

namespace {

DatasetIssue make_issue(IssueKind kind, std::size_t i, std::size_t j, std::string field,
                        const std::string& what) {
  std::string msg = what;
  if (i > 0) msg += " (subject " + std::to_string(i);
  if (j > 0) msg += ", observation " + std::to_string(j);
  if (i > 0) msg += ", field " + field + ")";
  return {kind, i, j, std::move(field), msg};
}

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

std::optional<DatasetIssue> validate_dataset(const ClusteredDataset& ds) {
  if (ds.subjects.empty()) return make_issue(IssueKind::Empty, 0, 0, "", "dataset has no subjects");
  if (ds.p.empty() || ds.p.size() != ds.q.size()) {
    return make_issue(IssueKind::DimensionMismatch, 0, 0, "",
                      "fixed and random covariate orders must match and be at least 1");
  }
  for (std::size_t i = 0; i < ds.subjects.size(); ++i) {
    const auto& s = ds.subjects[i];
    if (s.obs.empty()) {
      return make_issue(IssueKind::EmptySubject, i + 1, 0, "obs", "subject has no observations");
    }
    for (std::size_t j = 0; j < s.obs.size(); ++j) {
      const auto& o = s.obs[j];
      if (o.x.dims() != ds.p) {
        return make_issue(IssueKind::DimensionMismatch, i + 1, j + 1, "X",
                          "X has dims " + format_dims(o.x.dims()) + ", expected " +
                              format_dims(ds.p));
      }
      if (o.z.dims() != ds.q) {
        return make_issue(IssueKind::DimensionMismatch, i + 1, j + 1, "Z",
                          "Z has dims " + format_dims(o.z.dims()) + ", expected " +
                              format_dims(ds.q));
      }
      if (!std::isfinite(o.y)) return make_issue(IssueKind::NonFinite, i + 1, j + 1, "y", "non-finite response");
      if (!all_finite(o.x.data())) return make_issue(IssueKind::NonFinite, i + 1, j + 1, "X", "non-finite covariate");
      if (!all_finite(o.z.data())) return make_issue(IssueKind::NonFinite, i + 1, j + 1, "Z", "non-finite covariate");
    }
  }
  return std::nullopt;
}

void require_valid(const ClusteredDataset& ds) {
  if (auto issue = validate_dataset(ds)) throw ValidationError(issue->message);
}

std::uint64_t dataset_fingerprint(const ClusteredDataset& ds) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  auto mix_u64 = [&mix](std::uint64_t v) { mix(&v, sizeof v); };
  for (auto d : ds.p) mix_u64(d);
  for (auto d : ds.q) mix_u64(d);
  for (const auto& s : ds.subjects) {
    mix_u64(s.obs.size());
    for (const auto& o : s.obs) {
      mix(&o.y, sizeof o.y);
      mix(o.x.data().data(), o.x.size() * sizeof(double));
      mix(o.z.data().data(), o.z.size() * sizeof(double));
    }
  }
  return h;
}

void Hyperparams::check(std::size_t order) const {
  if (rank < 1) throw ValidationError("rank K must be at least 1");
  if (!(a0 > 0.0) || !(b0 > 0.0)) throw ValidationError("a0 and b0 must be positive");
  if (!sigma2.empty()) {
    if (sigma2.size() != order) throw ValidationError("sigma2 needs one value per mode");
    for (double s : sigma2)
      if (!(s > 0.0)) throw ValidationError("sigma2 values must be positive");
  }
  if (!k.empty() && k.size() != order) throw ValidationError("k needs one value per mode");
  if (burnin >= iters) throw ValidationError("burnin must be smaller than iters");
}

std::optional<std::string> audit_state(const ParamState& s, const Dims& p, const Dims& k,
                                       std::size_t num_subjects) {
  const auto D = p.size();
  if (s.factors.order() != D) return "factor count differs from order";
  const auto K = s.factors.rank();
  if (K < 1) return "rank is zero";
  auto finite = [](const auto& m) { return m.allFinite(); };
  auto positive = [](const auto& m) { return (m.array() > 0.0).all(); };
  for (std::size_t d = 0; d < D; ++d) {
    const auto pd = static_cast<Eigen::Index>(p[d]);
    const auto& f = s.factors.factors[d];
    if (f.rows() != pd || f.cols() != static_cast<Eigen::Index>(K)) return "factor shape mismatch";
    if (!finite(f)) return "non-finite factor entry";
    if (s.lambda2.size() != D || s.nu.size() != D) return "shrinkage arrays missing a mode";
    for (const auto* m : {&s.lambda2[d], &s.nu[d]}) {
      if (m->rows() != pd || m->cols() != static_cast<Eigen::Index>(K)) return "shrinkage shape mismatch";
      if (!finite(*m) || !positive(*m)) return "local shrinkage not positive and finite";
    }
  }
  if (s.gamma.gamma.size() != D) return "compressed factor count differs from order";
  for (std::size_t d = 0; d < D; ++d) {
    const auto kd = static_cast<Eigen::Index>(k[d]);
    if (s.gamma.gamma[d].rows() != kd || s.gamma.gamma[d].cols() != kd) return "Gamma shape mismatch";
    if (!finite(s.gamma.gamma[d])) return "non-finite Gamma entry";
  }
  if (!(std::isfinite(s.tau2) && s.tau2 > 0.0)) return "tau2 not positive and finite";
  for (const auto* v : {&s.delta2, &s.xi}) {
    if (v->size() != static_cast<Eigen::Index>(K)) return "global shrinkage length mismatch";
    if (!finite(*v) || !positive(*v)) return "global shrinkage not positive and finite";
  }
  if (s.dtilde.size() != num_subjects) return "core count differs from subject count";
  const auto kstar = static_cast<Eigen::Index>(product(k));
  for (const auto& c : s.dtilde) {
    if (c.size() != kstar) return "core length differs from k*";
    if (!finite(c)) return "non-finite core entry";
  }
  return std::nullopt;
}

ParamState init_state(const ClusteredDataset& ds, const Hyperparams& hp, const ProjectionSet& ps,
                      Engine& rng) {
  const auto D = ds.order();
  const auto K = static_cast<Eigen::Index>(hp.rank);
  ParamState s;
  for (std::size_t d = 0; d < D; ++d) {
    const auto pd = static_cast<Eigen::Index>(ds.p[d]);
    s.factors.factors.push_back(0.1 * standard_normal(rng, pd, K));
    s.lambda2.push_back(Eigen::MatrixXd::Ones(pd, K));
    s.nu.push_back(Eigen::MatrixXd::Ones(pd, K));
  }
  for (std::size_t d = 0; d < D; ++d) {
    const auto kd = static_cast<Eigen::Index>(ps.k[d]);
    const double sd = std::sqrt(0.01 / static_cast<double>(ps.k[d]));
    s.gamma.gamma.push_back(sd * standard_normal(rng, kd, kd));
  }
  s.tau2 = 1.0;
  s.delta2 = Eigen::VectorXd::Ones(K);
  s.xi = Eigen::VectorXd::Ones(K);
  s.dtilde.assign(ds.num_subjects(), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ps.core_size())));
  return s;
}

}  // namespace comet
