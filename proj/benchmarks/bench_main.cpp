#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "qboot/bootstrap.hpp"
#include "qboot/quadrature.hpp"
#include "qboot/spectra.hpp"

using namespace qboot;

namespace {

void BM_QTailQuadrature(benchmark::State& state) {
  const double qm1 = 0.1, a = 0.05, M = 100.0;
  auto f = [&](double m) { return std::pow(1.0 + qm1 * a * m, -1.0 / qm1) / m; };
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrate_qtail(f, M, qm1, a, 1e-12, -1.0).value);
  }
}
BENCHMARK(BM_QTailQuadrature);

void BM_TailHypergeometric(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(tail_integral_hypergeometric(0.1, 0.05, 100.0));
  }
}
BENCHMARK(BM_TailHypergeometric);

void BM_GammaClosedForm(benchmark::State& state) {
  const auto p = reference_parameters();
  const auto d = matched_deformation(p.beta0 + 0.01, p);
  for (auto _ : state) benchmark::DoNotOptimize(zq_gamma_closed_form(d, p).value);
}
BENCHMARK(BM_GammaClosedForm);

void BM_EnergyRep(benchmark::State& state) {
  const auto p = reference_parameters();
  const auto d = matched_deformation(p.beta0 + 0.01, p);
  for (auto _ : state) benchmark::DoNotOptimize(zq_energy_rep(d, p).value);
}
BENCHMARK(BM_EnergyRep);

void BM_MassRep(benchmark::State& state) {
  const auto p = reference_parameters();
  const auto cut = CutoffParams::defaults_for(p);
  const auto d = matched_deformation(p.beta0 * 1.05, p);
  for (auto _ : state) benchmark::DoNotOptimize(zq_mass_rep(d, p, cut).value);
}
BENCHMARK(BM_MassRep);

void BM_SingularityScan(benchmark::State& state) {
  const auto p = reference_parameters();
  std::vector<double> grid;
  for (int i = 0; i < 30; ++i) grid.push_back(p.beta0 + 1e-3 * std::pow(100.0, i / 29.0));
  const auto threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(singularity_scan(p, grid, threads).slope);
}
BENCHMARK(BM_SingularityScan)->Arg(1)->Arg(4);

void BM_FitSpectrum(benchmark::State& state) {
  const auto grid = log_grid(0.1, 6.0, static_cast<std::size_t>(state.range(0)));
  const auto ds = generate_synthetic({0.110, 1.2, 1.0}, grid, 0.05, 1);
  for (auto _ : state) benchmark::DoNotOptimize(fit_spectrum(ds, {0.150, 1.10, 0.5}).chi2);
}
BENCHMARK(BM_FitSpectrum)->Arg(50)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
