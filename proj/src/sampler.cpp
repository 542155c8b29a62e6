#include "comet/sampler.hpp"

#include <chrono>

namespace comet {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void symmetrize(Eigen::MatrixXd& m) { m = 0.5 * (m + m.transpose()).eval(); }

}  // namespace

Dims resolve_compression_dims(const Hyperparams& hp, const Dims& q) {
  return hp.k.empty() ? default_compression_dims(q) : hp.k;
}

PreparedData PreparedData::build(const ClusteredDataset& ds, const ProjectionSet& ps) {
  require_valid(ds);
  if (ds.q != ps.q) {
    throw DimensionError("projection dims " + format_dims(ps.q) + " differ from data dims " +
                         format_dims(ds.q));
  }
  PreparedData out;
  out.p = ds.p;
  out.q = ds.q;
  out.k = ps.k;
  out.core_cov = core_covariance(ps);
  const auto pstar = static_cast<Eigen::Index>(product(ds.p));
  const auto qstar = static_cast<Eigen::Index>(product(ds.q));
  const auto kstar = static_cast<Eigen::Index>(ps.core_size());
  for (const auto& subj : ds.subjects) {
    const auto m = static_cast<Eigen::Index>(subj.obs.size());
    PreparedSubject s{Eigen::VectorXd(m), Eigen::MatrixXd(pstar, m), Eigen::MatrixXd(qstar, m),
                      Eigen::MatrixXd(m, kstar)};
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto& o = subj.obs[static_cast<std::size_t>(j)];
      s.y[j] = o.y;
      s.xcols.col(j) = o.x.vec();
      s.zcols.col(j) = o.z.vec();
      s.ztil.row(j) = compress_covariate(o.z, ps).vec().transpose();
    }
    out.offsets.push_back(out.total_obs);
    out.total_obs += static_cast<std::size_t>(m);
    out.subjects.push_back(std::move(s));
  }
  return out;
}

void PreparedData::set_responses(const std::vector<Eigen::VectorXd>& y) {
  if (y.size() != subjects.size()) throw DimensionError("set_responses: subject count mismatch");
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i].size() != subjects[i].y.size()) throw DimensionError("set_responses: length mismatch");
    subjects[i].y = y[i];
  }
}

SubjectGaussianBlocks joint_blocks(const Eigen::Ref<const Eigen::MatrixXd>& ztil,
                                   const Eigen::Ref<const Eigen::MatrixXd>& gamma_star,
                                   const Eigen::Ref<const Eigen::MatrixXd>& core_cov) {
  if (ztil.cols() != gamma_star.rows() || gamma_star.cols() != core_cov.rows()) {
    throw DimensionError("joint_blocks: compressed dims disagree");
  }
  SubjectGaussianBlocks b;
  const Eigen::MatrixXd zg = ztil * gamma_star;
  b.v_dd = core_cov;
  b.v_yd = zg * core_cov;
  b.v_yy = b.v_yd * zg.transpose();
  symmetrize(b.v_yy);
  b.v_yy.diagonal().array() += 1.0;
  b.chol = Cholesky(b.v_yy, "C_i");
  return b;
}

Eigen::VectorXd PrecisionConditional::mean() const {
  return Cholesky(precision, "posterior precision").solve(linear);
}

Eigen::MatrixXd PrecisionConditional::covariance() const {
  const Cholesky chol(precision, "posterior precision");
  return scale * chol.solve(Eigen::MatrixXd::Identity(precision.rows(), precision.cols()));
}

Eigen::VectorXd PrecisionConditional::sample(Engine& rng) const {
  return sample_from_precision(precision, linear, scale, rng);
}

Whitening Whitening::from_blocks(const std::vector<SubjectGaussianBlocks>& blocks) {
  Whitening w;
  w.chol.reserve(blocks.size());
  for (const auto& b : blocks) w.chol.push_back(b.chol);
  return w;
}

Whitening Whitening::from_covariance(const PreparedData& data,
                                     const Eigen::Ref<const Eigen::MatrixXd>& cov) {
  Whitening w;
  w.chol.reserve(data.num_subjects());
  for (const auto& s : data.subjects) {
    if (cov.rows() != s.zcols.rows()) throw DimensionError("from_covariance: q* mismatch");
    Eigen::MatrixXd c = s.zcols.transpose() * cov * s.zcols;
    symmetrize(c);
    c.diagonal().array() += 1.0;
    w.chol.emplace_back(c, "C_i");
  }
  return w;
}

Eigen::MatrixXd Whitening::whiten(std::size_t subject,
                                  const Eigen::Ref<const Eigen::MatrixXd>& m) const {
  return chol.at(subject).solve_lower(m);
}

GaussianConditional dtilde_conditional(const PreparedSubject& s, const SubjectGaussianBlocks& b,
                                       const Eigen::Ref<const Eigen::VectorXd>& beta,
                                       double tau2) {
  const Eigen::VectorXd resid = s.y - s.xcols.transpose() * beta;
  const Eigen::MatrixXd w = b.chol.solve_lower(b.v_yd);
  GaussianConditional out;
  out.mean = w.transpose() * b.chol.solve_lower(resid);
  out.cov = b.v_dd - w.transpose() * w;
  symmetrize(out.cov);
  out.scale = tau2;
  return out;
}

Eigen::VectorXd sample_dtilde(const PreparedSubject& s, const SubjectGaussianBlocks& b,
                              const Eigen::Ref<const Eigen::VectorXd>& beta, double tau2,
                              Engine& rng) {
  const auto c = dtilde_conditional(s, b, beta, tau2);
  return sample_from_covariance(c.mean, c.cov, c.scale, rng);
}

RegressionDesign gamma_design(std::size_t mode, const PreparedData& data,
                              const CompressedFactors& gamma,
                              const std::vector<Eigen::VectorXd>& cores,
                              const Eigen::Ref<const Eigen::VectorXd>& beta) {
  const auto& k = data.k;
  const auto kd = static_cast<Eigen::Index>(k[mode]);
  const Eigen::MatrixXd others = kronecker_descending(gamma.gamma, static_cast<std::ptrdiff_t>(mode));
  RegressionDesign out{Eigen::VectorXd(static_cast<Eigen::Index>(data.total_obs)),
                       Eigen::MatrixXd(static_cast<Eigen::Index>(data.total_obs), kd * kd)};
  for (std::size_t i = 0; i < data.num_subjects(); ++i) {
    const auto& s = data.subjects[i];
    const Eigen::MatrixXd h = others * unfold(std::span<const double>(cores.at(i).data(), static_cast<std::size_t>(cores.at(i).size())), k, mode).transpose();
    const Eigen::VectorXd resid = s.y - s.xcols.transpose() * beta;
    for (Eigen::Index j = 0; j < s.y.size(); ++j) {
      const Eigen::RowVectorXd zrow = s.ztil.row(j);
      const Eigen::MatrixXd prod = unfold(std::span<const double>(zrow.data(), static_cast<std::size_t>(zrow.size())), k, mode) * h;
      const auto row = static_cast<Eigen::Index>(data.offsets[i]) + j;
      out.design.row(row) = Eigen::Map<const Eigen::RowVectorXd>(prod.data(), kd * kd);
      out.response[row] = resid[j];
    }
  }
  return out;
}

PrecisionConditional gamma_conditional(const RegressionDesign& design, double tau2,
                                       double sigma2) {
  PrecisionConditional c;
  c.precision = design.design.transpose() * design.design / tau2;
  c.precision.diagonal().array() += 1.0 / sigma2;
  c.linear = design.design.transpose() * design.response / tau2;
  c.scale = 1.0;
  return c;
}

PrecisionConditional beta_conditional(std::size_t mode, const RegressionDesign& design,
                                      const ParamState& state) {
  const auto& lambda2 = state.lambda2.at(mode);
  const auto pd = lambda2.rows();
  const auto K = lambda2.cols();
  PrecisionConditional c;
  c.precision = design.design.transpose() * design.design;
  for (Eigen::Index g = 0; g < K; ++g) {
    for (Eigen::Index j = 0; j < pd; ++j) {
      c.precision(j + pd * g, j + pd * g) += 1.0 / (state.delta2[g] * lambda2(j, g));
    }
  }
  c.linear = design.design.transpose() * design.response;
  c.scale = state.tau2;
  return c;
}

InvGammaParams local_shrinkage_conditional(double beta, double nu, double tau2, double delta2) {
  return {1.0, 1.0 / nu + beta * beta / (2.0 * tau2 * delta2)};
}

InvGammaParams nu_conditional(double lambda2) { return {1.0, 1.0 + 1.0 / lambda2}; }

InvGammaParams global_shrinkage_conditional(std::size_t component, const ParamState& state) {
  const auto g = static_cast<Eigen::Index>(component);
  double count = 0.0;
  double weighted = 0.0;
  for (std::size_t d = 0; d < state.factors.order(); ++d) {
    const auto& f = state.factors.factors[d];
    count += static_cast<double>(f.rows());
    weighted += (f.col(g).array().square() / state.lambda2[d].col(g).array()).sum();
  }
  return {0.5 * (1.0 + count), 1.0 / state.xi[g] + weighted / (2.0 * state.tau2)};
}

InvGammaParams xi_conditional(double delta2) { return {1.0, 1.0 + 1.0 / delta2}; }

InvGammaParams tau2_conditional(const PreparedData& data, const Whitening& w,
                                const ParamState& state, const Hyperparams& hp) {
  const Eigen::VectorXd beta = cp_compose_vec(state.factors);
  const double rss = whitened_rss(data, w, beta);
  double penalty = 0.0;
  double count = 0.0;
  for (std::size_t d = 0; d < state.factors.order(); ++d) {
    const auto& f = state.factors.factors[d];
    count += static_cast<double>(f.size());
    for (Eigen::Index g = 0; g < f.cols(); ++g) {
      penalty += (f.col(g).array().square() / state.lambda2[d].col(g).array()).sum() / state.delta2[g];
    }
  }
  return {hp.a0 + 0.5 * (static_cast<double>(data.total_obs) + count),
          hp.b0 + 0.5 * (rss + penalty)};
}

void sample_local_shrinkage(std::size_t mode, ParamState& state, Engine& rng) {
  const auto& f = state.factors.factors.at(mode);
  auto& lambda2 = state.lambda2[mode];
  auto& nu = state.nu[mode];
  for (Eigen::Index g = 0; g < f.cols(); ++g) {
    for (Eigen::Index j = 0; j < f.rows(); ++j) {
      const auto lp = local_shrinkage_conditional(f(j, g), nu(j, g), state.tau2, state.delta2[g]);
      lambda2(j, g) = draw_inv_gamma(rng, lp.shape, lp.scale);
      const auto np = nu_conditional(lambda2(j, g));
      nu(j, g) = draw_inv_gamma(rng, np.shape, np.scale);
    }
  }
}

void sample_global_shrinkage(ParamState& state, Engine& rng) {
  for (Eigen::Index g = 0; g < state.delta2.size(); ++g) {
    const auto dp = global_shrinkage_conditional(static_cast<std::size_t>(g), state);
    state.delta2[g] = draw_inv_gamma(rng, dp.shape, dp.scale);
    const auto xp = xi_conditional(state.delta2[g]);
    state.xi[g] = draw_inv_gamma(rng, xp.shape, xp.scale);
  }
}

void block2_update(const PreparedData& data, const Whitening& w, const Hyperparams& hp,
                   ParamState& state, SweepKey key, ChainTiming* timing, Exec exec) {
  for (std::size_t d = 0; d < data.order(); ++d) {
    auto start = Clock::now();
    const auto design = beta_design(d, data, w, state.factors, exec);
    auto brng = substream(key.seed, Stream::Beta, key.sweep, d);
    const Eigen::VectorXd draw = beta_conditional(d, design, state).sample(brng);
    auto& f = state.factors.factors[d];
    f = Eigen::Map<const Eigen::MatrixXd>(draw.data(), f.rows(), f.cols());
    if (timing) timing->beta += seconds_since(start);

    start = Clock::now();
    auto lrng = substream(key.seed, Stream::LocalShrinkage, key.sweep, d);
    sample_local_shrinkage(d, state, lrng);
    if (timing) timing->shrinkage += seconds_since(start);
  }

  auto start = Clock::now();
  auto grng = substream(key.seed, Stream::GlobalShrinkage, key.sweep);
  sample_global_shrinkage(state, grng);
  if (timing) timing->shrinkage += seconds_since(start);

  start = Clock::now();
  auto trng = substream(key.seed, Stream::Tau, key.sweep);
  const auto tp = tau2_conditional(data, w, state, hp);
  state.tau2 = draw_inv_gamma(trng, tp.shape, tp.scale);
  if (timing) timing->tau += seconds_since(start);
}

ParamState gibbs_step(const PreparedData& data, const Hyperparams& hp, const ParamState& state,
                      SweepKey key, ChainTiming* timing, Exec exec) {
  ParamState next = state;
  const Eigen::VectorXd beta = cp_compose_vec(next.factors);

  auto start = Clock::now();
  auto blocks = compute_blocks(data, next.gamma, exec);
  sample_all_cores(data, blocks, beta, next.tau2, key.seed, key.sweep, next.dtilde, exec);
  if (timing) timing->cores += seconds_since(start);

  start = Clock::now();
  for (std::size_t d = 0; d < data.order(); ++d) {
    const auto design = gamma_design(d, data, next.gamma, next.dtilde, beta);
    auto rng = substream(key.seed, Stream::Gamma, key.sweep, d);
    next.gamma.set_vec(d, gamma_conditional(design, next.tau2, hp.sigma2_for(d)).sample(rng));
  }
  blocks = compute_blocks(data, next.gamma, exec);
  const auto w = Whitening::from_blocks(blocks);
  if (timing) timing->gamma += seconds_since(start);

  block2_update(data, w, hp, next, key, timing, exec);
  return next;
}

Chain run_chain(const ClusteredDataset& ds, const Hyperparams& hp, RunOptions opts) {
  const auto ps = draw_projections(ds.q, resolve_compression_dims(hp, ds.q), hp.seed);
  return run_chain(ds, hp, ps, opts);
}

Chain run_chain(const ClusteredDataset& ds, const Hyperparams& hp, const ProjectionSet& ps,
                RunOptions opts) {
  hp.check(ds.order());
  if (!hp.k.empty() && hp.k != ps.k) throw ValidationError("hyperparameter k differs from projections");
  const auto data = PreparedData::build(ds, ps);

  Chain chain;
  chain.meta = {"comet", ds.p, ds.q, ps.k, hp, ps.seed, dataset_fingerprint(ds)};
  chain.meta.hp.k = ps.k;
  chain.snapshots.reserve(hp.iters - hp.burnin);

  auto init_rng = substream(hp.seed, Stream::Init);
  ParamState state = init_state(ds, hp, ps, init_rng);
  const auto start = Clock::now();
  for (std::size_t t = 0; t < hp.iters; ++t) {
    try {
      state = gibbs_step(data, hp, state, {hp.seed, t + 1}, &chain.timing, opts.exec);
      if (auto issue = audit_state(state, ds.p, ps.k, ds.num_subjects())) throw NumericalError(*issue);
    } catch (const NumericalError& e) {
      throw NumericalError("iteration " + std::to_string(t + 1) + ": " + e.what());
    }
    if (t < hp.burnin) continue;
    Snapshot snap;
    snap.beta = cp_compose_vec(state.factors);
    snap.factors = state.factors.factors;
    snap.gamma = state.gamma.gamma;
    snap.tau2 = state.tau2;
    if (hp.keep_shrinkage) {
      snap.lambda2 = state.lambda2;
      snap.delta2 = state.delta2;
    }
    if (hp.keep_cores) snap.dtilde = state.dtilde;
    chain.snapshots.push_back(std::move(snap));
  }
  chain.timing.total = seconds_since(start);
  return chain;
}

Eigen::MatrixXd Chain::coefficient_draws() const {
  if (snapshots.empty()) return {};
  Eigen::MatrixXd out(static_cast<Eigen::Index>(snapshots.size()), snapshots.front().beta.size());
  for (std::size_t t = 0; t < snapshots.size(); ++t) out.row(static_cast<Eigen::Index>(t)) = snapshots[t].beta.transpose();
  return out;
}

}  // namespace comet
