// Serial reference vs OpenMP kernels on a desk-sized problem.
#include <benchmark/benchmark.h>

#include "comet/sampler.hpp"
#include "comet/simbench.hpp"

namespace {

using namespace comet;

struct Fixture {
  ClusteredDataset ds;
  ProjectionSet ps;
  PreparedData data;
  Hyperparams hp;
  ParamState state;
  Whitening w;

  Fixture() {
    SimConfig cfg = BenchmarkConfig::desk().sim;
    cfg.m = 6;
    auto rng = substream(7, Stream::Simulate);
    ds = simulate_dataset(cfg, rng).train;
    hp.rank = 4;
    hp.k = {3, 3};
    ps = draw_projections(ds.q, hp.k, 7);
    data = PreparedData::build(ds, ps);
    auto init = substream(7, Stream::Init);
    state = init_state(ds, hp, ps, init);
    for (std::uint64_t t = 1; t <= 20; ++t) state = gibbs_step(data, hp, state, {7, t});
    w = Whitening::from_blocks(compute_blocks(data, state.gamma));
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

void BM_BetaDesignReference(benchmark::State& st) {
  auto& f = fixture();
  for (auto _ : st) benchmark::DoNotOptimize(beta_design_reference(0, f.data, f.w, f.state.factors));
}

void BM_BetaDesign(benchmark::State& st) {
  auto& f = fixture();
  const auto exec = st.range(0) ? Exec::Parallel : Exec::Serial;
  for (auto _ : st) benchmark::DoNotOptimize(beta_design(0, f.data, f.w, f.state.factors, exec));
}

void BM_Blocks(benchmark::State& st) {
  auto& f = fixture();
  const auto exec = st.range(0) ? Exec::Parallel : Exec::Serial;
  for (auto _ : st) benchmark::DoNotOptimize(compute_blocks(f.data, f.state.gamma, exec));
}

void BM_Sweep(benchmark::State& st) {
  auto& f = fixture();
  const auto exec = st.range(0) ? Exec::Parallel : Exec::Serial;
  std::uint64_t t = 100;
  for (auto _ : st) benchmark::DoNotOptimize(gibbs_step(f.data, f.hp, f.state, {7, ++t}, nullptr, exec));
}

}  // namespace

BENCHMARK(BM_BetaDesignReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BetaDesign)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Blocks)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Sweep)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
