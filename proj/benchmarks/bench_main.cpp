#include <benchmark/benchmark.h>

#include "fkpp/branching.hpp"
#include "fkpp/control.hpp"
#include "fkpp/semigroup.hpp"

namespace {

using namespace fkpp;

void BM_KernelApply(benchmark::State& state) {
  GridSpec grid{-20.0, 20.0, static_cast<std::size_t>(state.range(0))};
  LevyModel model = LevyModel::brownian();
  model.jump_intensity = 1.0;
  model.jumps = {{-0.5, 0.5}, {0.75, 0.5}};
  const auto kernel = TransitionKernel::build(model, 0.05, grid);
  auto u = GridFn::heaviside(grid);
  for (auto _ : state) {
    u = kernel.apply(u);
    benchmark::DoNotOptimize(u);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid.points));
}
BENCHMARK(BM_KernelApply)->Arg(2001)->Arg(8001);

void BM_SimulateDyadic(benchmark::State& state) {
  BranchingConfig config{LevyModel::brownian(), OffspringLaw::dyadic()};
  const double t = static_cast<double>(state.range(0));
  std::uint64_t i = 0;
  for (auto _ : state) {
    Rng rng = make_stream(1, i++);
    benchmark::DoNotOptimize(simulate(config, t, rng, false));
  }
}
BENCHMARK(BM_SimulateDyadic)->Arg(4)->Arg(8);

void BM_EstimateValue(benchmark::State& state) {
  const LevyModel model = LevyModel::brownian();
  const ReactionFn rf(OffspringLaw::dyadic());
  const auto u0 = GridFn::heaviside(GridSpec{});
  const auto policy = ControlPolicy::ramp(rf, 1.0);
  MonteCarloOptions opts;
  opts.n_paths = static_cast<std::size_t>(state.range(0));
  opts.threads = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_value(model, 0.0, 1.0, policy, rf, u0, opts));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EstimateValue)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
