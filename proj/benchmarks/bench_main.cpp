// Throughput benchmarks for the hot paths: the per-iteration step, whole
// runs, the Monte Carlo estimators, and the objective evaluations that
// dominate them.

#include <cmath>
#include <string>

#include <benchmark/benchmark.h>

#include "es1p1/algorithm.hpp"
#include "es1p1/estimators.hpp"
#include "es1p1/objectives.hpp"
#include "es1p1/rng.hpp"

namespace {

void BM_RngNormal(benchmark::State& state) {
    es::Rng rng(42);
    for (auto _ : state) benchmark::DoNotOptimize(rng.normal());
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_RngNormal);

void BM_ObjectiveEval(benchmark::State& state, const std::string& spec) {
    es::objectives::Objective objective = es::objectives::make_objective(spec);
    es::vec x(objective.dim, 0.25L);
    for (auto _ : state) {
        benchmark::DoNotOptimize(objective.evaluate(x));
        x[0] = -x[0];  // defeat value caching without leaving the domain
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK_CAPTURE(BM_ObjectiveEval, sphere_d2, "sphere:d=2");
BENCHMARK_CAPTURE(BM_ObjectiveEval, sphere_d16, "sphere:d=16");
BENCHMARK_CAPTURE(BM_ObjectiveEval, rosenbrock2d, "rosenbrock2d");
BENCHMARK_CAPTURE(BM_ObjectiveEval, quadratic_saddle, "quadratic_saddle:a=9");
BENCHMARK_CAPTURE(BM_ObjectiveEval, linear_ridge, "linear_ridge:a=10");
BENCHMARK_CAPTURE(BM_ObjectiveEval, stepped_sphere, "stepped_sphere:k=4,d=2");
BENCHMARK_CAPTURE(BM_ObjectiveEval, sphere_jump_star, "sphere_jump:variant=star,d=2");

// Cantor membership walks one tree level per stage: cost should be linear in
// the truncation depth.
void BM_CantorContains(benchmark::State& state) {
    es::objectives::CantorSpec spec;
    spec.depth = static_cast<int>(state.range(0));
    es::real x = -0.3L;
    for (auto _ : state) {
        benchmark::DoNotOptimize(es::objectives::cantor_contains(x, spec));
        x = x < -0.5L ? x + 1e-6L : -0.7L;
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_CantorContains)->Arg(8)->Arg(20)->Arg(40)->Arg(60);

void BM_EsStep(benchmark::State& state, const std::string& spec) {
    es::objectives::Objective objective = es::objectives::make_objective(spec);
    es::EsState s;
    s.m = es::vec(objective.dim, 1.0L);
    s.log_sigma = std::log(0.5);
    es::Rng rng(7);
    es::EsParams params;
    for (auto _ : state) {
        benchmark::DoNotOptimize(es::es_step(s, objective, rng, params));
        if (!(s.log_sigma > -600.0)) {  // keep sigma in a realistic band
            s.m = es::vec(objective.dim, 1.0L);
            s.log_sigma = std::log(0.5);
        }
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK_CAPTURE(BM_EsStep, sphere_d2, "sphere:d=2");
BENCHMARK_CAPTURE(BM_EsStep, sphere_d16, "sphere:d=16");
BENCHMARK_CAPTURE(BM_EsStep, rosenbrock2d, "rosenbrock2d");

void BM_EsRunSphere(benchmark::State& state) {
    es::objectives::Objective objective = es::objectives::make_objective("sphere:d=2");
    es::StoppingRule stopping;
    stopping.max_iterations = state.range(0);
    std::uint64_t seed = 0;
    for (auto _ : state) {
        es::EsState init;
        init.m = es::vec{-2.0L, 2.0L};
        es::RunTrace trace = es::es_run(objective, es::EsParams{}, std::move(init), stopping,
                                        seed++, /*record_stride=*/0);
        benchmark::DoNotOptimize(trace.final_f);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EsRunSphere)->Arg(1000)->Unit(benchmark::kMicrosecond);

void BM_EstimateSuccess(benchmark::State& state) {
    es::objectives::Objective objective = es::objectives::make_objective("quadratic_saddle:a=9");
    es::vec m{0.0L, 0.0L};
    long long n = state.range(0);
    std::uint64_t seed = 0;
    for (auto _ : state) {
        auto r = es::estimators::estimate_success_prob(m, 0.5, objective, n,
                                                       es::estimators::CompareMode::strict,
                                                       seed++);
        benchmark::DoNotOptimize(r.estimate);
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_EstimateSuccess)->Arg(4096)->Arg(65536)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
