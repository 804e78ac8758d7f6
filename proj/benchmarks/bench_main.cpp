#include <benchmark/benchmark.h>

#include <vector>

#include "sdg/bsde_engine.hpp"
#include "sdg/examples.hpp"
#include "sdg/hamiltonians.hpp"
#include "sdg/isaacs_pde.hpp"
#include "sdg/mc_paths.hpp"
#include "sdg/parallel.hpp"
#include "sdg/regression.hpp"
#include "sdg/sde_engine.hpp"

namespace {

void BM_GenerateIncrements(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const sdg::TimeGrid grid = sdg::TimeGrid::make(0.0, 1.0, 50);
  for (auto _ : state) benchmark::DoNotOptimize(sdg::generate(grid, 1, m, 7));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m * 50));
}
BENCHMARK(BM_GenerateIncrements)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);

void BM_ForwardEuler(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const sdg::CoefficientSet cs = sdg::make_game("additive_diffusion");
  const sdg::TimeGrid grid = sdg::TimeGrid::make(0.0, 1.0, 50);
  const sdg::PathBundle b = sdg::generate(grid, 1, m, 7);
  const double zero = 0.0, x0 = 0.5;
  const auto mu = sdg::ControlPath::constant(grid, m, cs.u_space, sdg::ConstVec(&zero, 1));
  const auto nu = sdg::ControlPath::constant(grid, m, cs.v_space, sdg::ConstVec(&zero, 1));
  for (auto _ : state) benchmark::DoNotOptimize(sdg::simulate_forward(cs, sdg::ConstVec(&x0, 1), mu, nu, b));
}
BENCHMARK(BM_ForwardEuler)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);

void BM_Regression(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const sdg::CoefficientSet cs = sdg::make_game("additive_diffusion");
  const sdg::TimeGrid grid = sdg::TimeGrid::make(0.0, 1.0, 10);
  const sdg::PathBundle b = sdg::generate(grid, 1, m, 3);
  const double zero = 0.0, x0 = 0.0;
  const auto mu = sdg::ControlPath::constant(grid, m, cs.u_space, sdg::ConstVec(&zero, 1));
  const auto nu = sdg::ControlPath::constant(grid, m, cs.v_space, sdg::ConstVec(&zero, 1));
  const sdg::StatePaths x = sdg::simulate_forward(cs, sdg::ConstVec(&x0, 1), mu, nu, b);
  std::vector<double> target(m), fitted(m);
  for (std::size_t i = 0; i < m; ++i) target[i] = x.at(i, 10)[0] * x.at(i, 10)[0];
  for (auto _ : state) {
    const sdg::Projection p(x, 5, &cs.terminal, sdg::BasisSpec{});
    p.project(target, fitted);
    benchmark::DoNotOptimize(fitted.data());
  }
}
BENCHMARK(BM_Regression)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);

void BM_SolveBsde(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const sdg::CoefficientSet cs = sdg::make_game("additive_diffusion");
  const sdg::TimeGrid grid = sdg::TimeGrid::make(0.0, 1.0, 50);
  const sdg::PathBundle b = sdg::generate(grid, 1, m, 11);
  const double zero = 0.0, x0 = 0.0;
  const auto mu = sdg::ControlPath::constant(grid, m, cs.u_space, sdg::ConstVec(&zero, 1));
  const auto nu = sdg::ControlPath::constant(grid, m, cs.v_space, sdg::ConstVec(&zero, 1));
  for (auto _ : state) benchmark::DoNotOptimize(sdg::payoff_J(cs, sdg::ConstVec(&x0, 1), mu, nu, b));
}
BENCHMARK(BM_SolveBsde)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);

void BM_HeatPde(benchmark::State& state) {
  const sdg::CoefficientSet cs = sdg::make_game("heat");
  sdg::PdeSpec spec;
  spec.n_x = static_cast<std::size_t>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(sdg::solve_pde(cs, spec, sdg::PdeHamiltonian::SupInf, sdg::ControlGrids{}));
}
BENCHMARK(BM_HeatPde)->Arg(101)->Arg(201)->Unit(benchmark::kMillisecond);

void BM_EnvelopeH1Upper(benchmark::State& state) {
  const sdg::CoefficientSet cs = sdg::make_game("compact_demo");
  sdg::HamPoint xi{0.2, {0.3}, 0.1, {0.5}, {0.4}};
  sdg::EnvelopeGrids g;
  const double c = 0.0;
  g.anchors_u = sdg::ball_lattice(sdg::ConstVec(&c, 1), 1.0, 11);
  g.anchors_v = g.anchors_u;
  g.lattice_u = g.anchors_u;
  g.lattice_v = g.anchors_u;
  g.xi_radius = g.control_radius = 0.05;
  for (auto _ : state) benchmark::DoNotOptimize(sdg::envelope_h(cs, xi, sdg::Envelope::H1Upper, g));
}
BENCHMARK(BM_EnvelopeH1Upper)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
