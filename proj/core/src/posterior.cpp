#include "corsvm/posterior.hpp"

#include <cmath>
#include <string>

#include "corsvm/errors.hpp"
#include "corsvm/json_util.hpp"

namespace corsvm {

namespace {

constexpr int kMaxNewtonIters = 100;
constexpr double kGradTol = 1e-8;
constexpr double kArmijo = 1e-4;

// log(1 + exp(-m)) without overflow.
double softplus_neg(double m) {
    if (m >= 0.0) return std::log1p(std::exp(-m));
    return -m + std::log1p(std::exp(m));
}

// 1 / (1 + exp(m)), the derivative magnitude of softplus_neg.
double sigmoid_neg(double m) {
    if (m >= 0.0) {
        const double e = std::exp(-m);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(m));
}

void check_inputs(const BinaryDataset& ds, const Eigen::VectorXd& weights,
                  const GaussianPrior& prior, const Eigen::VectorXd& theta) {
    if (weights.size() != ds.rows())
        throw DimensionError("posterior: weights length " + std::to_string(weights.size()) +
                             " does not match " + std::to_string(ds.rows()) + " rows");
    if (theta.size() != ds.dims() + 1)
        throw DimensionError("posterior: theta length must be d+1");
    if (!(prior.variance > 0.0)) throw Error("posterior: prior variance must be positive");
}

// Margins y_i * (w . x_i + intercept) for all rows.
Eigen::VectorXd margins(const BinaryDataset& ds, const Eigen::VectorXd& theta) {
    const Eigen::Index d = ds.dims();
    Eigen::VectorXd m = ds.features * theta.head(d);
    m.array() += theta(d);
    for (Eigen::Index i = 0; i < m.size(); ++i)
        m(i) *= static_cast<double>(ds.labels[static_cast<std::size_t>(i)]);
    return m;
}

}  // namespace

void to_json(nlohmann::json& j, const GaussianApprox& g) {
    nlohmann::json cov = nlohmann::json::array();
    for (Eigen::Index r = 0; r < g.covariance.rows(); ++r)
        for (Eigen::Index c = 0; c < g.covariance.cols(); ++c) cov.push_back(g.covariance(r, c));
    j = nlohmann::json{{"mean", vector_to_json(g.mean)}, {"covariance", std::move(cov)}};
}

void from_json(const nlohmann::json& j, GaussianApprox& g) {
    g.mean = vector_from_json(j.at("mean"));
    const auto& cov = j.at("covariance");
    const Eigen::Index p = g.mean.size();
    if (!cov.is_array() || static_cast<Eigen::Index>(cov.size()) != p * p)
        throw ParseError("GaussianApprox: covariance must hold dim*dim row-major entries");
    g.covariance.resize(p, p);
    for (Eigen::Index r = 0; r < p; ++r)
        for (Eigen::Index c = 0; c < p; ++c)
            g.covariance(r, c) = cov[static_cast<std::size_t>(r * p + c)].get<double>();
}

double log_potential(const Eigen::VectorXd& theta, const Eigen::VectorXd& x, int y) {
    if (theta.size() != x.size() + 1)
        throw DimensionError("log_potential: theta length must be x length + 1");
    const double margin =
        static_cast<double>(y) * (theta.head(x.size()).dot(x) + theta(x.size()));
    return -softplus_neg(margin);
}

double negative_log_joint(const BinaryDataset& ds, const Eigen::VectorXd& weights,
                          const GaussianPrior& prior, const Eigen::VectorXd& theta) {
    check_inputs(ds, weights, prior, theta);
    const Eigen::VectorXd m = margins(ds, theta);
    double value = theta.squaredNorm() / (2.0 * prior.variance);
    for (Eigen::Index i = 0; i < m.size(); ++i) value += weights(i) * softplus_neg(m(i));
    return value;
}

Eigen::VectorXd negative_log_joint_gradient(const BinaryDataset& ds,
                                            const Eigen::VectorXd& weights,
                                            const GaussianPrior& prior,
                                            const Eigen::VectorXd& theta) {
    check_inputs(ds, weights, prior, theta);
    const Eigen::Index d = ds.dims();
    const Eigen::VectorXd m = margins(ds, theta);

    Eigen::VectorXd grad = theta / prior.variance;
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        const double coeff = -weights(i) * static_cast<double>(ds.labels[static_cast<std::size_t>(i)]) *
                             sigmoid_neg(m(i));
        grad.head(d) += coeff * ds.features.row(i).transpose();
        grad(d) += coeff;
    }
    return grad;
}

Eigen::MatrixXd negative_log_joint_hessian(const BinaryDataset& ds,
                                           const Eigen::VectorXd& weights,
                                           const GaussianPrior& prior,
                                           const Eigen::VectorXd& theta) {
    check_inputs(ds, weights, prior, theta);
    const Eigen::Index d = ds.dims();
    const Eigen::Index p = d + 1;
    const Eigen::VectorXd m = margins(ds, theta);

    Eigen::MatrixXd hess = Eigen::MatrixXd::Identity(p, p) / prior.variance;
    Eigen::VectorXd xt(p);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        const double s = sigmoid_neg(m(i));
        const double curvature = weights(i) * s * (1.0 - s);
        if (curvature == 0.0) continue;
        xt.head(d) = ds.features.row(i).transpose();
        xt(d) = 1.0;
        hess.noalias() += curvature * xt * xt.transpose();
    }
    return hess;
}

GaussianApprox laplace_fit(const BinaryDataset& ds, const Eigen::VectorXd& weights,
                           const GaussianPrior& prior) {
    const Eigen::Index p = ds.dims() + 1;
    check_inputs(ds, weights, prior, Eigen::VectorXd::Zero(p));
    for (Eigen::Index i = 0; i < weights.size(); ++i)
        if (weights(i) < 0.0) throw Error("laplace_fit: weights must be nonnegative");

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
    double value = negative_log_joint(ds, weights, prior, theta);
    double grad_norm = 0.0;
    bool converged = false;

    for (int iter = 0; iter < kMaxNewtonIters; ++iter) {
        const Eigen::VectorXd grad = negative_log_joint_gradient(ds, weights, prior, theta);
        grad_norm = grad.norm();
        if (grad_norm <= kGradTol) {
            converged = true;
            break;
        }
        const Eigen::MatrixXd hess = negative_log_joint_hessian(ds, weights, prior, theta);
        const Eigen::LLT<Eigen::MatrixXd> llt(hess);
        if (llt.info() != Eigen::Success)
            throw ConvergenceError("laplace_fit: Hessian factorization failed", grad_norm);
        const Eigen::VectorXd step = llt.solve(-grad);
        const double slope = grad.dot(step);

        // The sufficient-decrease test carries an absolute slack at the
        // rounding floor of the objective, otherwise the search stalls
        // once the true decrease drops below double precision.
        const double noise = 1e-14 * (1.0 + std::abs(value));
        double t = 1.0;
        bool moved = false;
        while (t >= 1e-14) {
            const Eigen::VectorXd candidate = theta + t * step;
            const double cand_value = negative_log_joint(ds, weights, prior, candidate);
            if (cand_value <= value + kArmijo * t * slope + noise) {
                theta = candidate;
                value = cand_value;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if (!moved) break;  // step stalled at numerical floor
    }

    if (!converged) {
        grad_norm = negative_log_joint_gradient(ds, weights, prior, theta).norm();
        if (grad_norm > kGradTol)
            throw ConvergenceError("laplace_fit: no convergence after " +
                                       std::to_string(kMaxNewtonIters) +
                                       " iterations (gradient norm " +
                                       std::to_string(grad_norm) + ")",
                                   grad_norm);
    }

    const Eigen::MatrixXd hess = negative_log_joint_hessian(ds, weights, prior, theta);
    const Eigen::LLT<Eigen::MatrixXd> llt(hess);
    if (llt.info() != Eigen::Success)
        throw ConvergenceError("laplace_fit: Hessian not positive definite at mode", grad_norm);
    Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(p, p));
    cov = 0.5 * (cov + cov.transpose()).eval();

    return GaussianApprox{std::move(theta), std::move(cov)};
}

double gaussian_kl(const GaussianApprox& p, const GaussianApprox& q) {
    const Eigen::Index n = p.dim();
    if (n < 1) throw DimensionError("gaussian_kl: empty distribution");
    if (q.dim() != n || p.covariance.rows() != n || p.covariance.cols() != n ||
        q.covariance.rows() != n || q.covariance.cols() != n)
        throw DimensionError("gaussian_kl: dimension mismatch");
    if ((p.covariance - p.covariance.transpose()).cwiseAbs().maxCoeff() > 1e-10 ||
        (q.covariance - q.covariance.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        throw Error("gaussian_kl: covariance not symmetric");

    const Eigen::LLT<Eigen::MatrixXd> llt_p(p.covariance);
    const Eigen::LLT<Eigen::MatrixXd> llt_q(q.covariance);
    if (llt_p.info() != Eigen::Success || llt_q.info() != Eigen::Success)
        throw Error("gaussian_kl: covariance not positive definite");

    const auto log_det = [n](const Eigen::LLT<Eigen::MatrixXd>& llt) {
        double s = 0.0;
        const Eigen::MatrixXd l = llt.matrixL();
        for (Eigen::Index i = 0; i < n; ++i) s += std::log(l(i, i));
        return 2.0 * s;
    };

    const double trace = llt_q.solve(p.covariance).trace();
    const Eigen::VectorXd diff = q.mean - p.mean;
    const double quad = diff.dot(llt_q.solve(diff));
    const double kl =
        0.5 * (trace + quad - static_cast<double>(n) + log_det(llt_q) - log_det(llt_p));
    return kl;
}

}  // namespace corsvm
