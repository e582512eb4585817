#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "corsvm/dataset.hpp"
#include "corsvm/posterior.hpp"

namespace corsvm {

/// A sparse weighted subset of a dataset together with the divergence it
/// achieves against the full-data posterior approximation.
struct CoresetSelection {
    std::vector<std::size_t> indices;  // distinct, in greedy pick order
    Eigen::VectorXd weights;           // nonnegative, aligned with indices
    double achieved_kl = 0.0;
    std::size_t source_size = 0;

    // Divergence after each greedy extension; diagnostic only, not part
    // of the serialized form.
    std::vector<double> step_kl;
};

void to_json(nlohmann::json& j, const CoresetSelection& sel);
void from_json(const nlohmann::json& j, CoresetSelection& sel);

struct CoresetConfig {
    std::size_t size = 10;           // target M
    int weight_opt_steps = 200;      // projected-gradient iteration cap
    double tol = 1e-7;               // relative objective decrease cutoff
    std::size_t candidate_pool = 0;  // 0 = score every candidate
    std::uint64_t seed = 0;
    int threads = 1;                 // 0 = hardware concurrency
};

/// Projected gradient descent on the support weights against
/// KL(weighted-fit || full-fit). Gradient by central finite differences
/// (1e-4 relative step, one-sided at the w=0 boundary), backtracking line
/// search, weights clamped at zero. The result never scores worse than
/// the warm start.
Eigen::VectorXd optimize_weights(const BinaryDataset& ds,
                                 const std::vector<std::size_t>& support,
                                 const Eigen::VectorXd& init, const GaussianPrior& prior,
                                 const CoresetConfig& cfg);

/// Greedy construction: each step scores every unselected candidate by
/// provisionally adding it at weight N/(k+1) and measuring the divergence
/// without reoptimization, picks the largest reduction (ties to the lowest
/// index), then refines the support weights from the previous optimum.
CoresetSelection build_coreset(const BinaryDataset& ds, const GaussianPrior& prior,
                               const CoresetConfig& cfg);

/// Recomputes the divergence of a stored selection from scratch.
double coreset_kl(const BinaryDataset& ds, const CoresetSelection& sel,
                  const GaussianPrior& prior);

}  // namespace corsvm
