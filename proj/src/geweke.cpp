#include "comet/geweke.hpp"

#include <array>
#include <chrono>
#include <cmath>

#include "comet/linalg.hpp"
#include "comet/sampler.hpp"

namespace comet {

namespace {

// The data are redrawn before every sweep, so the gamma path is blind to the
// mean-parameter block and vice versa; gating gamma_1_sq and log_lambda2_1 as
// well gives the check power against every block of the sweep.
constexpr std::size_t kStats = 4;
const char* const kNames[kStats] = {"log_tau2", "log_delta2_1", "log_lambda2_1", "gamma_1_sq"};
constexpr bool kGated[kStats] = {true, true, true, true};

std::array<double, kStats> functionals(const ParamState& s) {
  const double g = s.gamma.gamma.front()(0, 0);
  return {std::log(s.tau2), std::log(s.delta2[0]), std::log(s.lambda2.front()(0, 0)), g * g};
}

ParamState draw_prior(const GewekeConfig& cfg, const ParamState& shape, Engine& rng) {
  ParamState s = shape;
  s.tau2 = draw_inv_gamma(rng, cfg.a0, cfg.b0);
  for (Eigen::Index g = 0; g < s.delta2.size(); ++g) {
    s.xi[g] = draw_inv_gamma(rng, 0.5, 1.0);
    s.delta2[g] = draw_inv_gamma(rng, 0.5, 1.0 / s.xi[g]);
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t d = 0; d < s.factors.order(); ++d) {
    auto& f = s.factors.factors[d];
    for (Eigen::Index g = 0; g < f.cols(); ++g) {
      for (Eigen::Index j = 0; j < f.rows(); ++j) {
        s.nu[d](j, g) = draw_inv_gamma(rng, 0.5, 1.0);
        s.lambda2[d](j, g) = draw_inv_gamma(rng, 0.5, 1.0 / s.nu[d](j, g));
        f(j, g) = std::sqrt(s.tau2 * s.delta2[g] * s.lambda2[d](j, g)) * normal(rng);
      }
    }
    auto& gm = s.gamma.gamma[d];
    for (Eigen::Index c = 0; c < gm.size(); ++c) gm.data()[c] = std::sqrt(cfg.sigma2) * normal(rng);
  }
  return s;
}

// y_i ~ N(X_i beta, tau2 C_i), cores integrated out
std::vector<Eigen::VectorXd> draw_responses(const PreparedData& data, const ParamState& s, Engine& rng) {
  const Eigen::VectorXd beta = cp_compose_vec(s.factors);
  const auto blocks = compute_blocks(data, s.gamma, Exec::Serial);
  std::vector<Eigen::VectorXd> y;
  for (std::size_t i = 0; i < data.num_subjects(); ++i) {
    const Eigen::VectorXd mean = data.subjects[i].xcols.transpose() * beta;
    y.push_back(sample_from_covariance(mean, blocks[i].v_yy, s.tau2, rng));
  }
  return y;
}

struct Moments {
  double mean, se;
};

Moments iid_moments(const std::vector<double>& v) {
  const auto n = static_cast<double>(v.size());
  double m = 0.0;
  for (double x : v) m += x;
  m /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / (n - 1.0) / n)};
}


}  // namespace

GewekeResult run_geweke(const GewekeConfig& cfg) {
  if (cfg.chains < 2 || cfg.sweeps < cfg.chains || cfg.forward_draws < 2 || cfg.steps_per_data_draw < 1) {
    throw ValidationError("geweke: need at least 2 chains, one sweep per chain and 2 forward draws");
  }
  const auto start = std::chrono::steady_clock::now();

  // fixed covariates; responses are swapped in every step
  auto rng = substream(cfg.seed, Stream::Geweke, 0);
  ClusteredDataset ds;
  ds.p = cfg.p;
  ds.q = cfg.q;
  for (std::size_t i = 0; i < cfg.subjects; ++i) {
    Subject s;
    for (std::size_t j = 0; j < cfg.obs_per_subject; ++j) {
      Observation o{0.0, DenseTensor(cfg.p, standard_normal(rng, static_cast<Eigen::Index>(product(cfg.p)))),
                    DenseTensor(cfg.q, standard_normal(rng, static_cast<Eigen::Index>(product(cfg.q))))};
      s.obs.push_back(std::move(o));
    }
    ds.subjects.push_back(std::move(s));
  }
  Hyperparams hp;
  hp.rank = cfg.rank;
  hp.k = cfg.k;
  hp.a0 = cfg.a0;
  hp.b0 = cfg.b0;
  hp.sigma2.assign(cfg.p.size(), cfg.sigma2);
  hp.iters = cfg.sweeps;
  hp.burnin = 0;
  hp.seed = derive_seed(cfg.seed, 1);
  hp.check(ds.order());
  const auto ps = draw_projections(cfg.q, cfg.k, hp.seed);
  auto data = PreparedData::build(ds, ps);
  auto init_rng = substream(hp.seed, Stream::Init);
  const ParamState shape = init_state(ds, hp, ps, init_rng);

  std::array<std::vector<double>, kStats> fwd;
  auto fwd_rng = substream(cfg.seed, Stream::Geweke, 1);
  for (std::size_t t = 0; t < cfg.forward_draws; ++t) {
    const auto f = functionals(draw_prior(cfg, shape, fwd_rng));
    for (std::size_t s = 0; s < kStats; ++s) fwd[s].push_back(f[s]);
  }

  // per-chain means of each statistic
  std::array<std::vector<double>, kStats> succ;
  const std::size_t per_chain = cfg.sweeps / cfg.chains;
  std::uint64_t sweep = 0;
  for (std::size_t c = 0; c < cfg.chains; ++c) {
    auto sc_rng = substream(cfg.seed, Stream::Geweke, 2, c);
    ParamState state = draw_prior(cfg, shape, sc_rng);
    data.set_responses(draw_responses(data, state, sc_rng));
    std::array<double, kStats> sums{};
    for (std::size_t t = 0; t < per_chain; ++t) {
      for (std::size_t r = 0; r < cfg.steps_per_data_draw; ++r) {
        state = gibbs_step(data, hp, state, {hp.seed, ++sweep}, nullptr, Exec::Serial);
      }
      if (auto issue = audit_state(state, cfg.p, cfg.k, cfg.subjects)) {
        throw NumericalError("geweke chain " + std::to_string(c + 1) + " sweep " + std::to_string(t + 1) + ": " +
                             *issue);
      }
      data.set_responses(draw_responses(data, state, sc_rng));
      const auto f = functionals(state);
      for (std::size_t s = 0; s < kStats; ++s) sums[s] += f[s];
    }
    for (std::size_t s = 0; s < kStats; ++s) succ[s].push_back(sums[s] / static_cast<double>(per_chain));
  }

  GewekeResult out;
  out.pass = true;
  for (std::size_t s = 0; s < kStats; ++s) {
    const auto a = iid_moments(fwd[s]);
    const auto b = iid_moments(succ[s]);
    GewekeStat st;
    st.name = kNames[s];
    st.forward_mean = a.mean;
    st.forward_se = a.se;
    st.successive_mean = b.mean;
    st.successive_se = b.se;
    st.z = (b.mean - a.mean) / std::sqrt(a.se * a.se + b.se * b.se);
    st.gated = kGated[s];
    st.pass = std::abs(st.z) <= cfg.threshold;
    if (st.gated && !st.pass) out.pass = false;
    out.stats.push_back(st);
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace comet
