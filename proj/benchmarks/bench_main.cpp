// Microbenchmarks for the hot paths: special-function evaluation, the
// normal sampler, one spectral/finite-difference/front step, and single
// particle-system replicas.  Run with --benchmark_filter=... as usual.

#include <benchmark/benchmark.h>

#include <cmath>

#include "bbmlab/airy.hpp"
#include "bbmlab/bbm_mc.hpp"
#include "bbmlab/fd_oracle.hpp"
#include "bbmlab/field.hpp"
#include "bbmlab/fkpp.hpp"
#include "bbmlab/gibbs.hpp"
#include "bbmlab/offspring.hpp"
#include "bbmlab/rng.hpp"
#include "bbmlab/sigma_profile.hpp"
#include "bbmlab/spectral.hpp"

namespace {

bbmlab::SigmaProfile unit_profile() {
  return bbmlab::SigmaProfile(
      "unit", [](double) { return 1.0; }, [](double) { return 0.0; },
      [](double) { return 0.0; });
}

void BM_AiryOscillatory(benchmark::State& state) {
  double x = -8.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bbmlab::airy::ai(x));
    x -= 1e-9;  // defeat constant folding
  }
}
BENCHMARK(BM_AiryOscillatory);

void BM_AiryDecay(benchmark::State& state) {
  double x = 4.2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bbmlab::airy::ai(x));
    x += 1e-9;
  }
}
BENCHMARK(BM_AiryDecay);

void BM_BasisBuild(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    bbmlab::airy::Basis basis(n);
    benchmark::DoNotOptimize(basis.normalizer(n));
  }
}
BENCHMARK(BM_BasisBuild)->Arg(4)->Arg(12);

void BM_InnerProduct(benchmark::State& state) {
  static const bbmlab::airy::Basis basis(12);
  for (auto _ : state) {
    benchmark::DoNotOptimize(bbmlab::airy::inner_product(basis, 7, 12));
  }
}
BENCHMARK(BM_InnerProduct);

void BM_RngUniform(benchmark::State& state) {
  bbmlab::Rng rng(42);
  for (auto _ : state) benchmark::DoNotOptimize(rng.uniform01());
}
BENCHMARK(BM_RngUniform);

void BM_RngNormal(benchmark::State& state) {
  bbmlab::Rng rng(42);
  for (auto _ : state) benchmark::DoNotOptimize(rng.normal());
}
BENCHMARK(BM_RngNormal);

void BM_SpectralEvolve(benchmark::State& state) {
  static const auto prob = bbmlab::CanonicalProblem::registry("ramp", 0.04);
  static const bbmlab::SpectralSolver solver(prob);
  static const auto init = solver.project_function(
      [](double x) { return x * std::exp(-x * x); });
  for (auto _ : state) {
    benchmark::DoNotOptimize(solver.evolve(init, 0.2));
  }
}
BENCHMARK(BM_SpectralEvolve);

void BM_FdSolve(benchmark::State& state) {
  static const auto prob = bbmlab::CanonicalProblem::registry("ramp", 0.04);
  bbmlab::FdConfig cfg;
  bbmlab::ScalarField1D init;
  init.x0 = 0.0;
  init.dx = 0.01;
  init.values.resize(1401);
  for (std::size_t i = 0; i < init.values.size(); ++i) {
    const double x = init.x(i);
    init.values[i] = x * std::exp(-x * x);
  }
  init.values.front() = init.values.back() = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bbmlab::fd_solve(prob, init, 0.02, cfg));
  }
}
BENCHMARK(BM_FdSolve);

void BM_FkppFront(benchmark::State& state) {
  const auto profile = unit_profile();
  const auto law = bbmlab::OffspringLaw::binary();
  for (auto _ : state) {
    benchmark::DoNotOptimize(bbmlab::solve_fkpp(profile, law, 4.0));
  }
}
BENCHMARK(BM_FkppFront);

void BM_BbmReplica(benchmark::State& state) {
  bbmlab::McConfig cfg;
  cfg.T = 8.0;
  cfg.replicas = 1;
  cfg.seed = 7;
  const bbmlab::BbmSimulator sim(bbmlab::SigmaProfile::registry("linear2"),
                                 bbmlab::OffspringLaw::binary(), cfg);
  std::uint64_t j = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sim.run_replica(j++ % 64));
  }
}
BENCHMARK(BM_BbmReplica);

void BM_GibbsReplica(benchmark::State& state) {
  bbmlab::GibbsConfig cfg;
  cfg.t = 4.0;
  cfg.replicas = 1;
  cfg.seed = 7;
  const bbmlab::GibbsSimulator sim(bbmlab::OffspringLaw::binary(), cfg);
  std::uint64_t j = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sim.run_replica(j++ % 64));
  }
}
BENCHMARK(BM_GibbsReplica);

}  // namespace

BENCHMARK_MAIN();
