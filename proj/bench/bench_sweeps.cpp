// Serial reference against the OpenMP path for the three sweep kernels.
#include <benchmark/benchmark.h>

#include "floq/exactsim.hpp"
#include "floq/log.hpp"
#include "floq/montecarlo.hpp"
#include "floq/prethermal.hpp"

using namespace floq;

namespace {

DriveSequence drive() { return DriveSequence{56e-6, 92e-6, 4460.0, 0.0}; }

std::vector<double> detunings(int n, double a, double b) {
  std::vector<double> x;
  for (int k = 0; k < n; ++k) x.push_back(a + (b - a) * k / (n - 1));
  return x;
}

SpinClusterGeometry three_spin() {
  const double a = phys::diamond_a0;
  return make_geometry({a * Vec3(1, 1, -3) / 4.0, a * Vec3(4, 2, 2) / 4.0, a * Vec3(-2, -4, 2) / 4.0},
                       {a * Vec3(0.2, -0.2, 20.25)}, {1.0});
}

Exec policy(const benchmark::State& s) { return s.range(0) ? Exec::parallel : Exec::serial; }

void BM_exact(benchmark::State& state) {
  ToyModelSpec spec;
  spec.geometry = three_spin();
  spec.drive = drive();
  const auto x = detunings(8, 1500.0, 3500.0);
  for (auto _ : state) benchmark::DoNotOptimize(sweep_exact(spec, x, policy(state)));
}

void BM_montecarlo(benchmark::State& state) {
  MonteCarloConfig cfg;
  cfg.n_configs = 16;
  const auto x = detunings(8, 0.0, 6000.0);
  for (auto _ : state) benchmark::DoNotOptimize(ensemble_sweep(cfg, x, policy(state)));
}

void BM_prethermal(benchmark::State& state) {
  LatticeConfig l;
  l.carbon_occupancy = 0.05;
  const auto g = sample_cluster(l, 8);
  const auto x = detunings(4, 2000.0, 5000.0);
  for (auto _ : state) benchmark::DoNotOptimize(sweep_prethermal(g, drive(), x, true, policy(state)));
}

}  // namespace

BENCHMARK(BM_exact)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_montecarlo)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_prethermal)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  set_warning_sink([](const std::string&) {});
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
