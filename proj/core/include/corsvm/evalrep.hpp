#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "corsvm/coreset.hpp"
#include "corsvm/dataset.hpp"
#include "corsvm/qubo.hpp"
#include "corsvm/svm.hpp"

namespace corsvm {

/// One row of the experiment report: a class pair scored along both the
/// classically solved and the annealer-solved path.
struct PairResult {
    std::pair<int, int> pair{0, 0};
    std::size_t data_size = 0;
    std::size_t coreset_size = 0;
    double kl = 0.0;
    double qacc = 0.0;
    double cacc = 0.0;
    double qubo_residual = 0.0;
};

void to_json(nlohmann::json& j, const PairResult& r);
void from_json(const nlohmann::json& j, PairResult& r);

/// Everything run_experiment needs, loadable from a JSON config file.
struct ExperimentConfig {
    std::filesystem::path dataset_path;
    std::vector<std::pair<int, int>> pairs;
    int pca_dim = 2;
    double test_fraction = 0.2;

    double prior_variance = 1.0;

    double coreset_size = 20;  // >= 1 absolute, in (0,1) fraction of train
    int weight_opt_steps = 200;
    double coreset_tol = 1e-7;
    std::size_t candidate_pool = 0;

    double C = 7.0;
    KernelSpec kernel{KernelKind::rbf, 1.0};
    std::optional<double> gamma;  // empty = median heuristic on the train split

    EncodingSpec encoding;
    int sweeps = 200;
    int restarts = 32;
    std::optional<double> t_start;
    std::optional<double> t_end;
    bool exhaustive = false;  // substitute the exact solver (dim <= 26)

    std::uint64_t seed = 0;
    int threads = 1;
};

/// Parses the sectioned config document (dataset/prior/coreset/svm/qubo/
/// anneal/seed); unknown sections are ignored, missing ones default.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc);

double accuracy(const SvmModel& model, const BinaryDataset& test);

/// Shared pipeline head for one configured pair: select -> standardize ->
/// pca -> split -> coreset on train, with the kernel gamma resolved
/// (median heuristic over the train split unless pinned). Errors carry
/// the pair and stage name.
struct PairPipeline {
    std::pair<int, int> pair{0, 0};
    std::size_t data_size = 0;
    BinaryDataset train;
    BinaryDataset test;
    CoresetSelection selection;
    Eigen::MatrixXd core_points;
    std::vector<int> core_labels;
    KernelSpec kernel;
};

PairPipeline run_pair_pipeline(const ExperimentConfig& cfg, const RawDataset& ds,
                               std::size_t pair_index);

/// Annealing schedule for a built problem under this config (auto
/// temperatures from the Q entries unless pinned, per-pair seed stream).
AnnealSchedule experiment_schedule(const ExperimentConfig& cfg, const QuboProblem& problem,
                                   std::size_t pair_index);

/// Full pipeline per pair: the shared head, then the classical SVM and
/// the QUBO/anneal/decode path, both scored on the held-out test split.
/// Deterministic for a fixed config.
std::vector<PairResult> run_experiment(const ExperimentConfig& cfg, const RawDataset& ds);
std::vector<PairResult> run_experiment(const ExperimentConfig& cfg);

/// Aligned text tables (coreset block and accuracy block).
std::string render_tables(const std::vector<PairResult>& results);

/// Flat CSV with one row per pair, full precision.
std::string render_csv(const std::vector<PairResult>& results);

}  // namespace corsvm
