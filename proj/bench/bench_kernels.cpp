#include <benchmark/benchmark.h>

#include <random>

#include "masolve/kernels.hpp"
#include "masolve/problems.hpp"
#include "masolve/solver.hpp"

using namespace masolve;

namespace {

struct Fixture {
    PDEProblem problem;
    std::shared_ptr<const Grid> grid;
    std::vector<double> u, r;

    Fixture(int n) : problem(make_problem("exp2d")), grid(std::make_shared<const Grid>(build_grid(problem.domain, n))) {
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> d(-0.01, 0.01);
        u.resize(grid->size());
        r.resize(grid->size());
        for (NodeIndex k = 0; k < grid->size(); ++k) {
            const Point x = grid->point(k);
            u[k] = 0.5 * (x[0] * x[0] + x[1] * x[1]) + d(rng);
        }
    }
};

template <bool Parallel>
void BM_Residual(benchmark::State& state) {
    Fixture f(static_cast<int>(state.range(0)));
    const Scheme s(f.problem, f.grid, static_cast<int>(state.range(1)));
    for (auto _ : state) {
        const ResidualStats st = Parallel ? residual_parallel(s, f.u, f.r) : residual_serial(s, f.u, f.r);
        benchmark::DoNotOptimize(st);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(f.u.size()));
}

template <bool Parallel>
void BM_EulerUpdate(benchmark::State& state) {
    Fixture f(static_cast<int>(state.range(0)));
    std::vector<double> next(f.u.size());
    for (auto _ : state) {
        if (Parallel) {
            euler_update_parallel(f.u, f.r, 1e-4, next);
        } else {
            euler_update_serial(f.u, f.r, 1e-4, next);
        }
        benchmark::DoNotOptimize(next.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(f.u.size()));
}

void BM_SolveExp2d(benchmark::State& state) {
    const PDEProblem p = make_problem("exp2d");
    auto g = std::make_shared<const Grid>(build_grid(p.domain, static_cast<int>(state.range(0))));
    SolveParams sp;
    sp.execution = state.range(1) ? Execution::parallel : Execution::serial;
    for (auto _ : state) {
        auto result = euler_solve(p, initial_iterate(p, g), sp);
        benchmark::DoNotOptimize(result.second.iterations);
    }
}

} // namespace

BENCHMARK(BM_Residual<false>)->ArgsProduct({{32, 128, 256}, {1, 3}});
BENCHMARK(BM_Residual<true>)->ArgsProduct({{32, 128, 256}, {1, 3}});
BENCHMARK(BM_EulerUpdate<false>)->Arg(256);
BENCHMARK(BM_EulerUpdate<true>)->Arg(256);
BENCHMARK(BM_SolveExp2d)->ArgsProduct({{16}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
