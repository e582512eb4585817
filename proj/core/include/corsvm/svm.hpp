#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace corsvm {

enum class KernelKind { rbf, linear };

struct KernelSpec {
    KernelKind kind = KernelKind::rbf;
    double gamma = 1.0;  // rbf only, > 0
};

void to_json(nlohmann::json& j, const KernelSpec& k);
void from_json(const nlohmann::json& j, KernelSpec& k);

/// rbf: exp(-gamma * ||x - x2||^2); linear: x . x2
double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& x2);

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const Eigen::MatrixXd& points);

/// Trained dual model. Per-point box bounds are weights[i] * C, so a
/// zero-weight point is pinned at alpha = 0 without being dropped.
struct SvmModel {
    Eigen::MatrixXd points;    // M x d
    std::vector<int> labels;   // +-1
    Eigen::VectorXd weights;   // nonnegative
    Eigen::VectorXd alphas;    // in [0, weights[i] * C]
    double bias = 0.0;
    double C = 1.0;
    KernelSpec kernel;

    Eigen::Index size() const { return points.rows(); }
    Eigen::Index dims() const { return points.cols(); }
};

void to_json(nlohmann::json& j, const SvmModel& m);
void from_json(const nlohmann::json& j, SvmModel& m);

struct TrainOptions {
    double tol = 1e-6;
    int max_iter = 10000;
    // Called after every pairwise update with (iteration, alphas).
    std::function<void(int, const Eigen::VectorXd&)> trace;
};

/// Solves the weighted dual by SMO on the maximal KKT-violating pair,
/// with per-point boxes [0, weights[i]*C] and the balance constraint
/// sum(alpha_i * y_i) = 0 maintained exactly by the pairwise updates.
SvmModel train_weighted_svm(const Eigen::MatrixXd& points, const std::vector<int>& labels,
                            const Eigen::VectorXd& weights, double C, const KernelSpec& spec,
                            const TrainOptions& opts = {});

/// Weighted average of margins over in-box support vectors; falls back to
/// the plain support-vector average when every alpha sits on a bound, and
/// to 0 when there is no support at all.
double compute_bias(const SvmModel& model);

struct Decision {
    double value;
    int label;  // -1, 0, +1 (0 only on an exact boundary hit)
};

Decision decide(const SvmModel& model, const Eigen::VectorXd& x);

/// 0.5 * sum_ij a_i a_j y_i y_j k(x_i, x_j) - sum_i a_i  (minimization form)
double dual_objective(const Eigen::VectorXd& alphas, const std::vector<int>& labels,
                      const Eigen::VectorXd& weights, const Eigen::MatrixXd& points,
                      const KernelSpec& spec);

/// 1 / median of pairwise squared distances; 1.0 when degenerate.
double median_heuristic_gamma(const Eigen::MatrixXd& points);

}  // namespace corsvm
