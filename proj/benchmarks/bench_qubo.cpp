#include <benchmark/benchmark.h>

#include "corsvm/dataset.hpp"
#include "corsvm/qubo.hpp"
#include "corsvm/synthetic.hpp"

namespace {

struct Fixture {
    Eigen::MatrixXd points;
    std::vector<int> labels;
    Eigen::VectorXd weights;
    corsvm::KernelSpec kernel{corsvm::KernelKind::rbf, 0.7};

    explicit Fixture(std::size_t m) {
        const auto ds =
            corsvm::select_pair(corsvm::make_blobs(m / 2, 2, 2, 2.0, 1.0, 29), 1, 2);
        points = ds.features;
        labels = ds.labels;
        weights = Eigen::VectorXd::Ones(points.rows());
    }
};

void BM_BuildQubo(benchmark::State& state) {
    const Fixture fx(static_cast<std::size_t>(state.range(0)));
    const corsvm::EncodingSpec enc{2, 3, 1.0, corsvm::QuboWeighting::none};
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            corsvm::build_qubo(fx.points, fx.labels, fx.weights, fx.kernel, enc));
    }
}
BENCHMARK(BM_BuildQubo)->Arg(16)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_SolveAnneal(benchmark::State& state) {
    const Fixture fx(16);
    const corsvm::EncodingSpec enc{2, 3, 1.0, corsvm::QuboWeighting::none};
    const auto q = corsvm::build_qubo(fx.points, fx.labels, fx.weights, fx.kernel, enc);
    auto sched = corsvm::default_schedule(q, 3);
    sched.restarts = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(corsvm::solve_anneal(q, sched));
    }
}
BENCHMARK(BM_SolveAnneal)->Arg(4)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_SolveExhaustive(benchmark::State& state) {
    const Fixture fx(static_cast<std::size_t>(state.range(0)));
    const corsvm::EncodingSpec enc{2, 2, 1.0, corsvm::QuboWeighting::none};
    const auto q = corsvm::build_qubo(fx.points, fx.labels, fx.weights, fx.kernel, enc);
    for (auto _ : state) {
        benchmark::DoNotOptimize(corsvm::solve_exhaustive(q));
    }
}
BENCHMARK(BM_SolveExhaustive)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace
