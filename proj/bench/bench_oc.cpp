// Serial reference kernel vs the OpenMP kernel for the second-stage integral,
// plus the simulator at one and all threads.
#include "amdsp/double_plan.hpp"
#include "amdsp/mc_oracle.hpp"
#include "amdsp/one_sided.hpp"

#include <benchmark/benchmark.h>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace amdsp;

namespace {

const SpecLimits kLim(1.0, 9.0);
const DoublePlan kPlan(23, 0.013681, 0.039455, 18, 0.026617);
const ProcessPoint kPoint(5.0, 2.0);

QuadratureConfig config(int nodes, OcFormula f) {
  QuadratureConfig c;
  c.nodes_per_dim = nodes;
  c.formula = f;
  return c;
}

void BM_JointParallel(benchmark::State& state) {
  const DoublePlanEvaluator eval(kPlan, kLim, config(int(state.range(0)), OcFormula::exact));
  for (auto _ : state) benchmark::DoNotOptimize(eval.prob_A2_upper(kPoint).value);
}
BENCHMARK(BM_JointParallel)->Arg(16)->Arg(32)->Arg(48)->Unit(benchmark::kMillisecond);

void BM_JointSerialReference(benchmark::State& state) {
  const DoublePlanEvaluator eval(kPlan, kLim, config(int(state.range(0)), OcFormula::exact));
  for (auto _ : state) benchmark::DoNotOptimize(eval.prob_joint_reference(kPlan.k2, kPoint).value);
}
BENCHMARK(BM_JointSerialReference)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_JointPrinted(benchmark::State& state) {
  const DoublePlanEvaluator eval(kPlan, kLim, config(int(state.range(0)), OcFormula::printed));
  for (auto _ : state) benchmark::DoNotOptimize(eval.prob_A2_upper(kPoint).value);
}
BENCHMARK(BM_JointPrinted)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_OneSidedDouble(benchmark::State& state) {
  const OneSidedDoublePlan plan = translate_to_one_sided(kPlan);
  for (auto _ : state) benchmark::DoNotOptimize(oc_one_sided_double(plan, 0.06, 32));
}
BENCHMARK(BM_OneSidedDouble)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
#ifdef _OPENMP
  const int saved = omp_get_max_threads();
  omp_set_num_threads(state.range(0) == 0 ? omp_get_num_procs() : int(state.range(0)));
#endif
  for (auto _ : state) benchmark::DoNotOptimize(simulate_double_plan(kPlan, kPoint, kLim, 100000, 1));
#ifdef _OPENMP
  omp_set_num_threads(saved);
#endif
}
// 1 thread vs all processors (argument 0)
BENCHMARK(BM_Simulate)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
