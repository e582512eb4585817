#include <benchmark/benchmark.h>

#include "corsvm/dataset.hpp"
#include "corsvm/svm.hpp"
#include "corsvm/synthetic.hpp"

namespace {

void BM_TrainWeightedSvm(benchmark::State& state) {
    const auto blobs = corsvm::make_blobs(static_cast<std::size_t>(state.range(0)) / 2, 2, 2,
                                          1.5, 1.0, 7);
    const auto ds = corsvm::select_pair(blobs, 1, 2);
    const Eigen::VectorXd w = Eigen::VectorXd::Ones(ds.rows());
    const corsvm::KernelSpec rbf{corsvm::KernelKind::rbf, 0.7};
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            corsvm::train_weighted_svm(ds.features, ds.labels, w, 7.0, rbf));
    }
}
BENCHMARK(BM_TrainWeightedSvm)->Arg(32)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_GramMatrix(benchmark::State& state) {
    const auto blobs = corsvm::make_blobs(static_cast<std::size_t>(state.range(0)) / 2, 2, 2,
                                          1.5, 1.0, 9);
    const corsvm::KernelSpec rbf{corsvm::KernelKind::rbf, 0.7};
    for (auto _ : state) {
        benchmark::DoNotOptimize(corsvm::gram_matrix(rbf, blobs.features));
    }
}
BENCHMARK(BM_GramMatrix)->Arg(64)->Arg(256);

}  // namespace
