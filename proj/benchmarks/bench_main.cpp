#include <benchmark/benchmark.h>

#include "ganinv/experiments.hpp"
#include "ganinv/generator.hpp"
#include "ganinv/inversion.hpp"

namespace {

using namespace ganinv;

GeneratorNetwork net_for(int arch) {
  return build(arch == 0 ? reference_mlp_spec(42) : reference_dcgan_spec(42));
}

void BM_Forward(benchmark::State& state) {
  const auto net = net_for(static_cast<int>(state.range(0)));
  const auto z = trial_latent(net.latent_dim(), 1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(net, z));
}
BENCHMARK(BM_Forward)->Arg(0)->Arg(1)->ArgNames({"dcgan"});

void BM_ForwardBackward(benchmark::State& state) {
  const auto net = net_for(static_cast<int>(state.range(0)));
  const auto z = trial_latent(net.latent_dim(), 1, 0);
  const auto target = evaluate(net, trial_latent(net.latent_dim(), 2, 0));
  for (auto _ : state) {
    const auto fr = forward(net, z);
    benchmark::DoNotOptimize(backward_input(net, fr.tape, target));
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(0)->Arg(1)->ArgNames({"dcgan"});

// Fixed-budget inversion; reported per iteration.
void BM_InvertIterations(benchmark::State& state) {
  const auto net = net_for(0);
  const auto target = evaluate(net, trial_latent(100, 3, 0));
  InversionConfig cfg;
  cfg.mode = static_cast<ClippingMode>(state.range(0));
  cfg.max_iters = 1000;
  cfg.loss_tol = 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(invert(net, target, cfg));
  state.SetItemsProcessed(state.iterations() * cfg.max_iters);
}
BENCHMARK(BM_InvertIterations)->DenseRange(0, 2)->ArgNames({"mode"})->Unit(benchmark::kMillisecond);

void BM_BaselinePairwise(benchmark::State& state) {
  for (auto _ : state) {
    Rng rng = derive_stream(42, 0, StreamPurpose::baseline);
    benchmark::DoNotOptimize(baseline_pairwise(100, static_cast<std::size_t>(state.range(0)), rng));
  }
}
BENCHMARK(BM_BaselinePairwise)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
