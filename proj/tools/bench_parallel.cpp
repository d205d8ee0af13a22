// Serial-reference vs OpenMP comparison for the three data-parallel kernels:
// observation-model simulation, pipeline trials, and bootstrap refits.
// The jobs=1 runs are the serial baselines the test suite checks bit-equality
// against; jobs=0 uses every hardware thread.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "curvecorrect/fitter.hpp"
#include "curvecorrect/parallel.hpp"
#include "curvecorrect/pipeline.hpp"
#include "curvecorrect/simulate.hpp"

namespace {

using namespace curvecorrect;

std::vector<std::int64_t> log_grid(std::int64_t lo, std::int64_t hi, int points) {
    std::vector<std::int64_t> grid;
    for (int i = 0; i < points; ++i) {
        const double t = static_cast<double>(i) / (points - 1);
        grid.push_back(static_cast<std::int64_t>(std::llround(
            std::exp(std::log(static_cast<double>(lo)) +
                     t * (std::log(static_cast<double>(hi)) - std::log(static_cast<double>(lo)))))));
    }
    return grid;
}

void BM_Experiment1(benchmark::State& state) {
    const CurveParams p = problem_preset(1).params;
    Experiment1Config cfg;
    cfg.n_grid = log_grid(20, 1000, 12);
    cfg.teams = 2000;
    cfg.thresholds = default_sim_thresholds(p);
    cfg.seed = 1;
    cfg.jobs = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_experiment1(p, cfg));
    }
}
BENCHMARK(BM_Experiment1)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

void BM_PipelineTrials(benchmark::State& state) {
    const auto grid = log_grid(20, 500, 8);
    const int jobs = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(estimate_true_curve(1, grid, 8, 7, -1, jobs));
    }
}
BENCHMARK(BM_PipelineTrials)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

void BM_BootstrapRefits(benchmark::State& state) {
    const CurveParams p = problem_preset(1).params;
    Experiment1Config ecfg;
    ecfg.n_grid = log_grid(20, 1000, 12);
    ecfg.teams = 100;
    ecfg.thresholds = default_sim_thresholds(p);
    ecfg.seed = 5;
    const auto records = run_experiment1(p, ecfg);
    FitConfig cfg;
    cfg.bootstrap_reps = 24;
    cfg.generations = 120;
    cfg.seed = 11;
    cfg.jobs = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit(records, cfg));
    }
}
BENCHMARK(BM_BootstrapRefits)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
