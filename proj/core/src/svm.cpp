#include "corsvm/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "corsvm/errors.hpp"
#include "corsvm/json_util.hpp"

namespace corsvm {

namespace {

constexpr double kTau = 1e-12;  // curvature floor for degenerate pairs

void validate_kernel(const KernelSpec& spec) {
    if (spec.kind == KernelKind::rbf && !(spec.gamma > 0.0))
        throw Error("kernel: rbf gamma must be positive");
}

void validate_training_inputs(const Eigen::MatrixXd& points, const std::vector<int>& labels,
                              const Eigen::VectorXd& weights, double C) {
    const auto m = points.rows();
    if (m < 2) throw SizeError("train_weighted_svm: need at least 2 points");
    if (static_cast<Eigen::Index>(labels.size()) != m || weights.size() != m)
        throw DimensionError("train_weighted_svm: labels/weights length mismatch");
    if (!(C > 0.0)) throw Error("train_weighted_svm: C must be positive");
    bool pos = false;
    bool neg = false;
    for (const int y : labels) {
        if (y == +1)
            pos = true;
        else if (y == -1)
            neg = true;
        else
            throw Error("train_weighted_svm: labels must be +1 or -1");
    }
    if (!pos || !neg) throw Error("train_weighted_svm: both classes must be present");
    for (Eigen::Index i = 0; i < weights.size(); ++i)
        if (weights(i) < 0.0) throw Error("train_weighted_svm: weights must be nonnegative");
}

}  // namespace

void to_json(nlohmann::json& j, const KernelSpec& k) {
    j = nlohmann::json{{"kind", k.kind == KernelKind::rbf ? "rbf" : "linear"},
                       {"gamma", k.gamma}};
}

void from_json(const nlohmann::json& j, KernelSpec& k) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "rbf")
        k.kind = KernelKind::rbf;
    else if (kind == "linear")
        k.kind = KernelKind::linear;
    else
        throw ParseError("KernelSpec: unknown kind '" + kind + "'");
    k.gamma = j.value("gamma", 1.0);
}

void to_json(nlohmann::json& j, const SvmModel& m) {
    std::vector<int> labels = m.labels;
    j = nlohmann::json{{"points", matrix_to_json(m.points)}, {"labels", labels},
                       {"weights", vector_to_json(m.weights)},
                       {"alphas", vector_to_json(m.alphas)},
                       {"bias", m.bias},
                       {"C", m.C},
                       {"kernel", m.kernel}};
}

void from_json(const nlohmann::json& j, SvmModel& m) {
    m.points = matrix_from_json(j.at("points"));
    m.labels = j.at("labels").get<std::vector<int>>();
    m.weights = vector_from_json(j.at("weights"));
    m.alphas = vector_from_json(j.at("alphas"));
    m.bias = j.at("bias").get<double>();
    m.C = j.at("C").get<double>();
    m.kernel = j.at("kernel").get<KernelSpec>();
    const Eigen::Index n = m.points.rows();
    if (static_cast<Eigen::Index>(m.labels.size()) != n || m.weights.size() != n ||
        m.alphas.size() != n)
        throw ParseError("SvmModel: field length mismatch");
}

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& x2) {
    validate_kernel(spec);
    if (x.size() != x2.size()) throw DimensionError("kernel_eval: dimension mismatch");
    if (spec.kind == KernelKind::linear) return x.dot(x2);
    return std::exp(-spec.gamma * (x - x2).squaredNorm());
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const Eigen::MatrixXd& points) {
    validate_kernel(spec);
    const Eigen::Index m = points.rows();
    if (spec.kind == KernelKind::linear) return points * points.transpose();

    Eigen::MatrixXd g(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        g(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < m; ++j) {
            const double v =
                std::exp(-spec.gamma * (points.row(i) - points.row(j)).squaredNorm());
            g(i, j) = v;
            g(j, i) = v;
        }
    }
    return g;
}

SvmModel train_weighted_svm(const Eigen::MatrixXd& points, const std::vector<int>& labels,
                            const Eigen::VectorXd& weights, double C, const KernelSpec& spec,
                            const TrainOptions& opts) {
    validate_training_inputs(points, labels, weights, C);
    validate_kernel(spec);
    const Eigen::Index m = points.rows();

    const Eigen::MatrixXd gram = gram_matrix(spec, points);
    Eigen::VectorXd box(m);
    for (Eigen::Index i = 0; i < m; ++i) box(i) = weights(i) * C;

    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(m);
    // Gradient of the minimization objective: G_i = sum_j a_j y_i y_j K_ij - 1.
    Eigen::VectorXd grad = Eigen::VectorXd::Constant(m, -1.0);

    double violation = std::numeric_limits<double>::infinity();
    bool converged = false;

    for (int iter = 0; iter < opts.max_iter; ++iter) {
        // Maximal violating pair over the index sets that may move up/down.
        double up_best = -std::numeric_limits<double>::infinity();
        double low_best = std::numeric_limits<double>::infinity();
        Eigen::Index i = -1;
        Eigen::Index j = -1;
        for (Eigen::Index k = 0; k < m; ++k) {
            const double y = static_cast<double>(labels[static_cast<std::size_t>(k)]);
            const double score = -y * grad(k);
            const bool can_up = (y > 0.0) ? (alpha(k) < box(k)) : (alpha(k) > 0.0);
            const bool can_low = (y > 0.0) ? (alpha(k) > 0.0) : (alpha(k) < box(k));
            if (can_up && score > up_best) {
                up_best = score;
                i = k;
            }
            if (can_low && score < low_best) {
                low_best = score;
                j = k;
            }
        }
        violation = (i >= 0 && j >= 0) ? up_best - low_best : 0.0;
        if (violation <= opts.tol) {
            converged = true;
            break;
        }

        const double yi = static_cast<double>(labels[static_cast<std::size_t>(i)]);
        const double yj = static_cast<double>(labels[static_cast<std::size_t>(j)]);
        const double old_ai = alpha(i);
        const double old_aj = alpha(j);

        if (yi != yj) {
            const double quad = std::max(gram(i, i) + gram(j, j) - 2.0 * gram(i, j), kTau);
            const double delta = (-grad(i) - grad(j)) / quad;
            const double diff = old_ai - old_aj;
            alpha(i) += delta;
            alpha(j) += delta;
            if (diff > 0.0) {
                if (alpha(j) < 0.0) {
                    alpha(j) = 0.0;
                    alpha(i) = diff;
                }
            } else {
                if (alpha(i) < 0.0) {
                    alpha(i) = 0.0;
                    alpha(j) = -diff;
                }
            }
            if (diff > box(i) - box(j)) {
                if (alpha(i) > box(i)) {
                    alpha(i) = box(i);
                    alpha(j) = box(i) - diff;
                }
            } else {
                if (alpha(j) > box(j)) {
                    alpha(j) = box(j);
                    alpha(i) = box(j) + diff;
                }
            }
        } else {
            const double quad = std::max(gram(i, i) + gram(j, j) - 2.0 * gram(i, j), kTau);
            const double delta = (grad(i) - grad(j)) / quad;
            const double sum = old_ai + old_aj;
            alpha(i) -= delta;
            alpha(j) += delta;
            if (sum > box(i)) {
                if (alpha(i) > box(i)) {
                    alpha(i) = box(i);
                    alpha(j) = sum - box(i);
                }
            } else {
                if (alpha(j) < 0.0) {
                    alpha(j) = 0.0;
                    alpha(i) = sum;
                }
            }
            if (sum > box(j)) {
                if (alpha(j) > box(j)) {
                    alpha(j) = box(j);
                    alpha(i) = sum - box(j);
                }
            } else {
                if (alpha(i) < 0.0) {
                    alpha(i) = 0.0;
                    alpha(j) = sum;
                }
            }
        }

        const double dai = alpha(i) - old_ai;
        const double daj = alpha(j) - old_aj;
        for (Eigen::Index k = 0; k < m; ++k) {
            const double yk = static_cast<double>(labels[static_cast<std::size_t>(k)]);
            grad(k) += yk * (yi * gram(i, k) * dai + yj * gram(j, k) * daj);
        }

        if (opts.trace) opts.trace(iter, alpha);
    }

    if (!converged)
        throw ConvergenceError("train_weighted_svm: no convergence after " +
                                   std::to_string(opts.max_iter) +
                                   " iterations (violation " + std::to_string(violation) + ")",
                               violation);

    SvmModel model;
    model.points = points;
    model.labels = labels;
    model.weights = weights;
    model.alphas = std::move(alpha);
    model.C = C;
    model.kernel = spec;
    model.bias = compute_bias(model);
    return model;
}

double compute_bias(const SvmModel& model) {
    const Eigen::Index m = model.size();
    if (static_cast<Eigen::Index>(model.labels.size()) != m || model.alphas.size() != m ||
        model.weights.size() != m)
        throw DimensionError("compute_bias: inconsistent model fields");

    const Eigen::MatrixXd gram = gram_matrix(model.kernel, model.points);
    Eigen::VectorXd margin(m);  // sum_j a_j y_j k(x_j, x_i)
    for (Eigen::Index i = 0; i < m; ++i) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < m; ++j)
            s += model.alphas(j) * static_cast<double>(model.labels[static_cast<std::size_t>(j)]) *
                 gram(j, i);
        margin(i) = s;
    }

    double num = 0.0;
    double den = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double ci = model.weights(i) * model.C;
        const double coeff = model.alphas(i) * (ci - model.alphas(i));
        num += coeff * (static_cast<double>(model.labels[static_cast<std::size_t>(i)]) - margin(i));
        den += coeff;
    }
    if (den >= 1e-12) return num / den;

    // Every alpha is at a bound: average the support-vector residuals.
    double sum = 0.0;
    int count = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (model.alphas(i) > 1e-8) {
            sum += static_cast<double>(model.labels[static_cast<std::size_t>(i)]) - margin(i);
            ++count;
        }
    }
    return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

Decision decide(const SvmModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.dims()) throw DimensionError("decide: feature dimension mismatch");
    double value = model.bias;
    for (Eigen::Index i = 0; i < model.size(); ++i) {
        if (model.alphas(i) == 0.0) continue;
        value += model.alphas(i) * static_cast<double>(model.labels[static_cast<std::size_t>(i)]) *
                 kernel_eval(model.kernel, model.points.row(i).transpose(), x);
    }
    const int label = (value > 0.0) ? +1 : (value < 0.0 ? -1 : 0);
    return Decision{value, label};
}

double dual_objective(const Eigen::VectorXd& alphas, const std::vector<int>& labels,
                      const Eigen::VectorXd& weights, const Eigen::MatrixXd& points,
                      const KernelSpec& spec) {
    const Eigen::Index m = points.rows();
    if (alphas.size() != m || static_cast<Eigen::Index>(labels.size()) != m ||
        weights.size() != m)
        throw DimensionError("dual_objective: length mismatch");
    const Eigen::MatrixXd gram = gram_matrix(spec, points);
    Eigen::VectorXd signed_alpha(m);
    for (Eigen::Index i = 0; i < m; ++i)
        signed_alpha(i) = alphas(i) * static_cast<double>(labels[static_cast<std::size_t>(i)]);
    return 0.5 * signed_alpha.dot(gram * signed_alpha) - alphas.sum();
}

double median_heuristic_gamma(const Eigen::MatrixXd& points) {
    const Eigen::Index m = points.rows();
    if (m < 2) return 1.0;
    std::vector<double> d2;
    d2.reserve(static_cast<std::size_t>(m * (m - 1) / 2));
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = i + 1; j < m; ++j)
            d2.push_back((points.row(i) - points.row(j)).squaredNorm());
    std::sort(d2.begin(), d2.end());
    const std::size_t n = d2.size();
    const double median =
        (n % 2 == 1) ? d2[n / 2] : 0.5 * (d2[n / 2 - 1] + d2[n / 2]);
    if (!(median > 0.0)) return 1.0;
    return 1.0 / median;
}

}  // namespace corsvm
