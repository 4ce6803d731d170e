#include <benchmark/benchmark.h>

#include <random>

#include "boro/bootstrap.hpp"
#include "boro/convex_engine.hpp"
#include "boro/experiments.hpp"
#include "boro/robust.hpp"
#include "boro/sweeps.hpp"

using namespace boro;

namespace {

Dataset newsvendor_data(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return NewsvendorModel{}.sample(n, rng);
}

GroupedInstance random_kernel(std::size_t size, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0), l(0.0, 10.0);
  Vector w(size), loss(size), p(size);
  double total = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    w[i] = u(rng);
    loss[i] = l(rng);
    total += (p[i] = u(rng));
  }
  for (auto& v : p) v /= total;
  return GroupedInstance::kernel(w, loss, p);
}

}  // namespace

static void BM_DualKernelCost(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const GroupedInstance inst = random_kernel(static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(bootstrap_dual_cost(inst, 0.05).cost);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DualKernelCost)->RangeMultiplier(4)->Range(16, 4096)->Complexity();

static void BM_PrimalKernelCost(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const GroupedInstance inst = random_kernel(static_cast<std::size_t>(state.range(0)), rng);
  const FDivergence gen = entropy_generator();
  for (auto _ : state) benchmark::DoNotOptimize(primal_cost(gen, inst, 0.05).cost);
}
BENCHMARK(BM_PrimalKernelCost)->RangeMultiplier(4)->Range(16, 256);

static void BM_RobustCostNeighbors(benchmark::State& state) {
  const Dataset data = newsvendor_data(static_cast<std::size_t>(state.range(0)), 2);
  const EmpiricalModel m = empirical_model(data);
  const NewsvendorModel model;
  const Learner l = rule_of_thumb_learner(default_family(Formulation::nn), data);
  RobustCostEvaluator ev(RobustConfig::with_target(0.1), l, newsvendor_loss(), m, model.context);
  const Vector z{95.0};
  for (auto _ : state) benchmark::DoNotOptimize(ev.evaluate(z).cost);
}
BENCHMARK(BM_RobustCostNeighbors)->Arg(50)->Arg(200)->Arg(800);

static void BM_RobustPrescribe(benchmark::State& state) {
  const auto f = static_cast<Formulation>(state.range(1));
  const Dataset data = newsvendor_data(static_cast<std::size_t>(state.range(0)), 3);
  const EmpiricalModel m = empirical_model(data);
  const NewsvendorModel model;
  const Learner l = rule_of_thumb_learner(default_family(f), data);
  for (auto _ : state)
    benchmark::DoNotOptimize(robust_prescribe(RobustConfig::with_target(0.1), l, newsvendor_loss(), m, model.context).cost);
}
BENCHMARK(BM_RobustPrescribe)->ArgsProduct({{50, 200}, {0, 1}})->Unit(benchmark::kMillisecond);

static void BM_BootstrapDisappointment(benchmark::State& state) {
  const Dataset data = newsvendor_data(100, 4);
  const EmpiricalModel m = empirical_model(data);
  const NewsvendorModel model;
  const Learner l = rule_of_thumb_learner(default_family(Formulation::nw), data);
  const Prescription p = robust_prescribe(RobustConfig::with_target(0.1), l, newsvendor_loss(), m, model.context);
  BootstrapPlan plan;
  plan.resamples = static_cast<std::size_t>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(estimate_disappointment(p, l, newsvendor_loss(), data, model.context, plan).empirical_b);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BootstrapDisappointment)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_ProjectSimplex(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  Vector v(static_cast<std::size_t>(state.range(0)));
  for (auto& x : v) x = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(project_simplex(v));
}
BENCHMARK(BM_ProjectSimplex)->Range(8, 4096);

BENCHMARK_MAIN();
