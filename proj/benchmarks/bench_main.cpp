#include <benchmark/benchmark.h>

#include "infocomp/campaign.hpp"
#include "infocomp/generate.hpp"
#include "infocomp/protocol.hpp"
#include "infocomp/sampler.hpp"

namespace {

using namespace infocomp;

void BM_PrfBlock(benchmark::State& state) {
  const SharedSeed seed{0x1234, 0x5678};
  std::uint64_t i = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(prf::block(seed, prf::kTagTapeX, i++, 0));
  }
}
BENCHMARK(BM_PrfBlock);

void BM_TapeElement(benchmark::State& state) {
  const SharedSeed seed{0x1234, 0x5678};
  const Universe u{static_cast<std::size_t>(state.range(0))};
  std::uint64_t i = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(element_at(seed, u, i++));
  }
}
BENCHMARK(BM_TapeElement)->Arg(16)->Arg(65536);

void BM_OneShotSampler(benchmark::State& state) {
  const std::size_t d = static_cast<std::size_t>(state.range(0));
  const auto pair = gen_uniform_subset(std::size_t{1} << d, std::size_t{1} << d, 1);
  SamplerConfig cfg;
  cfg.eps = 0.01;
  const SamplerConfig rc = cfg.resolved(&pair.p, &pair.q);
  std::uint64_t trial = 0;
  for (auto _ : state) {
    const SampleRun run =
        run_sampler(pair.p, pair.q, trial_seed(SharedSeed{7, 9}, trial++), rc);
    benchmark::DoNotOptimize(run.stats.bits_a);
  }
}
BENCHMARK(BM_OneShotSampler)->Arg(4)->Arg(8)->Arg(12);

void BM_CpjPathSampling(benchmark::State& state) {
  const CpjInstance f = gen_random_cpj(3, 2, SharedSeed{21, 12});
  std::uint64_t trial = 0;
  for (auto _ : state) {
    const PathSampleRun run = sample_path(f, trial_seed(SharedSeed{8, 10}, trial++), 0.01);
    benchmark::DoNotOptimize(run.stats.bits_a);
  }
}
BENCHMARK(BM_CpjPathSampling);

void BM_InternalInfoCost(benchmark::State& state) {
  const ProtocolTree pi = gen_random_protocol(
      static_cast<std::uint32_t>(state.range(0)), 4, 4, 2, SharedSeed{31, 41});
  DetStream s(SharedSeed{59, 26});
  const JointDist mu = random_joint(s, 4, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(internal_info_cost(pi, mu));
  }
}
BENCHMARK(BM_InternalInfoCost)->Arg(2)->Arg(4);

void BM_CompressRun(benchmark::State& state) {
  const ReferenceProtocol ref = gen_reference_protocol();
  std::uint64_t trial = 0;
  for (auto _ : state) {
    const CompressRun run =
        compress(ref.pi, ref.mu, 0.01, trial_seed(SharedSeed{77, 88}, trial++));
    benchmark::DoNotOptimize(run.stats.bits_a);
  }
}
BENCHMARK(BM_CompressRun);

}  // namespace

BENCHMARK_MAIN();
