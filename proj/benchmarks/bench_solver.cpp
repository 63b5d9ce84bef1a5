#include <benchmark/benchmark.h>

#include "cpflow/diagnostics.hpp"
#include "cpflow/flux_carrier.hpp"

using namespace cpflow;

namespace {

DomainSpec bridge() {
  DomainSpec s;
  s.core = {{-2, 0, 2, 1}};
  OutletSpec a;
  a.direction = Direction::MinusX;
  a.attach = {-2, 1};
  a.flux = -0.05;
  a.slip0 = -0.1;
  OutletSpec b;
  b.direction = Direction::PlusX;
  b.attach = {2, 0};
  b.flux = 0.05;
  b.slip1 = 0.1;
  s.outlets = {a, b};
  ObstacleSpec ob;
  ob.box = {-0.5, 0.375, 0.5, 0.625};
  s.obstacles = {ob};
  return s;
}

void BM_CornerStokes(benchmark::State& st) {
  const ValidatedDomain d = validate_domain(bridge());
  const double delta = 1.0 / st.range(0);
  for (auto _ : st) benchmark::DoNotOptimize(solve_corner_stokes(d, delta));
}
BENCHMARK(BM_CornerStokes)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_SteadyNS(benchmark::State& st) {
  const ValidatedDomain d = validate_domain(bridge());
  const CarrierField c = assemble_carrier(solve_corner_stokes(d, 1.0 / st.range(0)), 6.0, 0.5, CarrierMode::Hopf);
  for (auto _ : st) benchmark::DoNotOptimize(solve_steady_ns(NSProblem{c.disc, c.vel, {}}, SolverOptions{}));
}
BENCHMARK(BM_SteadyNS)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Residual(benchmark::State& st) {
  const ValidatedDomain d = validate_domain(bridge());
  const CarrierField c = assemble_carrier(solve_corner_stokes(d, 1.0 / 32), 6.0, 0.5, CarrierMode::Hopf);
  const std::vector<double> p(c.grid->num_cells(), 0.0);
  for (auto _ : st) benchmark::DoNotOptimize(c.disc->momentum_residual(c.vel, p, nullptr, 1.0, true));
}
BENCHMARK(BM_Residual)->Unit(benchmark::kMicrosecond);

void BM_LerayHopf(benchmark::State& st) {
  const OutletCarrier oc = outlet_carrier(cp_from_data(1.0, 0.0, 0.1, 0.05), 0.5);
  for (auto _ : st) benchmark::DoNotOptimize(leray_hopf_certify(oc, 0, 2.0, 10.0, 20, 7));
}
BENCHMARK(BM_LerayHopf)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
