#include <benchmark/benchmark.h>

#include "corsvm/coreset.hpp"
#include "corsvm/dataset.hpp"
#include "corsvm/jacobi.hpp"
#include "corsvm/posterior.hpp"
#include "corsvm/rng.hpp"
#include "corsvm/synthetic.hpp"

namespace {

corsvm::BinaryDataset blob_pair(std::size_t per_class, std::uint64_t seed) {
    return corsvm::select_pair(corsvm::make_blobs(per_class, 2, 2, 2.0, 1.0, seed), 1, 2);
}

void BM_LaplaceFit(benchmark::State& state) {
    const auto ds = blob_pair(static_cast<std::size_t>(state.range(0)) / 2, 11);
    const Eigen::VectorXd w = Eigen::VectorXd::Ones(ds.rows());
    const corsvm::GaussianPrior prior{1.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(corsvm::laplace_fit(ds, w, prior));
    }
}
BENCHMARK(BM_LaplaceFit)->Arg(32)->Arg(128)->Arg(512);

void BM_GaussianKl(benchmark::State& state) {
    const auto ds = blob_pair(32, 13);
    const corsvm::GaussianPrior prior{1.0};
    const auto p = corsvm::laplace_fit(ds, 0.5 * Eigen::VectorXd::Ones(ds.rows()), prior);
    const auto q = corsvm::laplace_fit(ds, Eigen::VectorXd::Ones(ds.rows()), prior);
    for (auto _ : state) {
        benchmark::DoNotOptimize(corsvm::gaussian_kl(p, q));
    }
}
BENCHMARK(BM_GaussianKl);

void BM_BuildCoreset(benchmark::State& state) {
    const auto ds = blob_pair(static_cast<std::size_t>(state.range(0)) / 2, 17);
    corsvm::CoresetConfig cfg;
    cfg.size = 4;
    cfg.weight_opt_steps = 30;
    for (auto _ : state) {
        benchmark::DoNotOptimize(corsvm::build_coreset(ds, corsvm::GaussianPrior{1.0}, cfg));
    }
}
BENCHMARK(BM_BuildCoreset)->Arg(24)->Arg(48)->Unit(benchmark::kMillisecond);

void BM_JacobiEigen(benchmark::State& state) {
    const auto n = static_cast<Eigen::Index>(state.range(0));
    corsvm::Rng rng(5);
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j) {
            const double v = rng.next_normal();
            a(i, j) = v;
            a(j, i) = v;
        }
    for (auto _ : state) {
        benchmark::DoNotOptimize(corsvm::jacobi_eigen(a));
    }
}
BENCHMARK(BM_JacobiEigen)->Arg(16)->Arg(64)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace
