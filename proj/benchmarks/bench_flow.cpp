/// Timings for the hot paths: RK4 propagation, Plucker evaluation, the side
/// lifts and the full box pipeline.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "maslov/analysis.hpp"
#include "maslov/exterior.hpp"
#include "maslov/flow.hpp"

namespace {

using namespace maslov;

Problem turing(double d, double L) {
    Problem p;
    p.L = L;
    p.D = Eigen::Vector2d(1.0, d);
    Eigen::Matrix2d a;
    a << 1.0, -2.0, 3.0, -4.0;
    p.V = Potential::constant(a);
    return p;
}

Problem random_problem(int n, double L) {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Problem p;
    p.L = L;
    p.D = Eigen::VectorXd::Ones(n);
    Eigen::MatrixXd v(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) v(i, j) = u(rng);
    p.V = Potential::constant(v);
    return p;
}

void BM_Propagate(benchmark::State& state) {
    const Problem p = random_problem(static_cast<int>(state.range(0)), 5.0);
    std::vector<double> xs;
    for (int k = 1; k <= 100; ++k) xs.push_back(p.L * k / 100.0);
    for (auto _ : state) benchmark::DoNotOptimize(propagate(p, 0.5, xs));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(p.L * p.grid.nx));
}
BENCHMARK(BM_Propagate)->Arg(1)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_PsiOfFrame(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const StandardForms f = standard_forms(n, Eigen::VectorXd::Ones(n));
    const Frame frame = Eigen::MatrixXd::Random(2 * n, n);
    for (auto _ : state) benchmark::DoNotOptimize(psi(f.omega2, frame));
}
BENCHMARK(BM_PsiOfFrame)->DenseRange(1, 5);

void BM_SideRight(benchmark::State& state) {
    const Problem p = turing(15.5, 10.0);
    for (auto _ : state) benchmark::DoNotOptimize(side_index(p, Side::Right));
}
BENCHMARK(BM_SideRight)->Unit(benchmark::kMillisecond);

void BM_BoxIndex(benchmark::State& state) {
    const Problem p = turing(15.5, 5.0);
    const BoxOptions options{.scan_interior = state.range(0) != 0};
    for (auto _ : state) benchmark::DoNotOptimize(box_index(p, options));
}
BENCHMARK(BM_BoxIndex)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->Iterations(2);

} // namespace

BENCHMARK_MAIN();
