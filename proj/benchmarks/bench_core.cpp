#include "flexform/controller.hpp"
#include "flexform/equilibria.hpp"
#include "flexform/hessian.hpp"
#include "flexform/integrator.hpp"
#include "flexform/stability.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace flexform;

namespace {

const auto kQuad = PotentialFamily::quadratic();

FormationGraph graph_for(int dim) {
  return FormationGraph::uniform(dim == 2 ? Topology::TriangleFlex2D : Topology::TetrahedronFlex3D, 4.0);
}

Realization random_state(const FormationGraph& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  Eigen::VectorXd p(g.num_nodes() * g.dimension());
  for (Eigen::Index k = 0; k < p.size(); ++k) p[k] = u(rng);
  return Realization(p, g.dimension());
}

void BM_GradientControl(benchmark::State& state) {
  const auto g = graph_for(static_cast<int>(state.range(0)));
  const auto p = random_state(g, 1);
  for (auto _ : state) benchmark::DoNotOptimize(gradient_control(p, g, kQuad));
}
BENCHMARK(BM_GradientControl)->Arg(2)->Arg(3);

void BM_AssembleHessian(benchmark::State& state) {
  const auto g = graph_for(static_cast<int>(state.range(0)));
  const auto p = random_state(g, 2);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_hessian(p, g, kQuad));
}
BENCHMARK(BM_AssembleHessian)->Arg(2)->Arg(3);

// Full 20 s horizon at the bundled step size.
void BM_Integrate(benchmark::State& state) {
  const auto g = graph_for(static_cast<int>(state.range(0)));
  const ClosedLoop sys{g, kQuad, {}};
  const auto p = random_state(g, 3);
  IntegrationOptions opt;
  opt.t_end = 20.0;
  opt.step = {StepMode::Fixed, 2.5e-4};
  opt.record_stride = 400;
  for (auto _ : state) benchmark::DoNotOptimize(integrate(p, sys, opt));
}
BENCHMARK(BM_Integrate)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_Analyze(benchmark::State& state) {
  const auto g = graph_for(3);
  const auto e = find_coplanar_equilibrium(g, kQuad, 'a');
  for (auto _ : state) benchmark::DoNotOptimize(analyze(e.p, g, kQuad));
}
BENCHMARK(BM_Analyze)->Unit(benchmark::kMicrosecond);

void BM_Catalog(benchmark::State& state) {
  const auto g = graph_for(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_catalog(g, kQuad));
}
BENCHMARK(BM_Catalog)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
