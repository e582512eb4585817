#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "corsvm/dataset.hpp"

namespace corsvm {

/// Zero-mean isotropic Gaussian prior with covariance variance * I over
/// the d+1 model parameters (feature weights plus intercept).
struct GaussianPrior {
    double variance = 1.0;
};

/// Gaussian posterior approximation: mode and inverse curvature.
struct GaussianApprox {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;

    Eigen::Index dim() const { return mean.size(); }
};

void to_json(nlohmann::json& j, const GaussianApprox& g);
void from_json(const nlohmann::json& j, GaussianApprox& g);

/// Logistic log-likelihood of one labeled point:
///   -log(1 + exp(-y * (theta_{0..d-1} . x + theta_d)))
/// computed without overflow for any margin. theta has length x.size()+1,
/// the intercept last.
double log_potential(const Eigen::VectorXd& theta, const Eigen::VectorXd& x, int y);

// Negative log joint of the weighted model (prior + weighted potentials),
// with analytic gradient and Hessian. Exposed so derivative checks and
// search oracles can evaluate the exact objective the fit minimizes.
double negative_log_joint(const BinaryDataset& ds, const Eigen::VectorXd& weights,
                          const GaussianPrior& prior, const Eigen::VectorXd& theta);
Eigen::VectorXd negative_log_joint_gradient(const BinaryDataset& ds,
                                            const Eigen::VectorXd& weights,
                                            const GaussianPrior& prior,
                                            const Eigen::VectorXd& theta);
Eigen::MatrixXd negative_log_joint_hessian(const BinaryDataset& ds,
                                           const Eigen::VectorXd& weights,
                                           const GaussianPrior& prior,
                                           const Eigen::VectorXd& theta);

/// Laplace approximation of the weighted posterior: Newton iteration to
/// the mode (gradient norm <= 1e-8, at most 100 steps, backtracking line
/// search), covariance = inverse Hessian at the mode. The prior keeps the
/// Hessian positive definite for any nonnegative weights.
GaussianApprox laplace_fit(const BinaryDataset& ds, const Eigen::VectorXd& weights,
                           const GaussianPrior& prior);

/// KL(p || q) between Gaussians in closed form:
///   0.5 * [tr(Sq^-1 Sp) + (mq-mp)' Sq^-1 (mq-mp) - dim + ln det Sq - ln det Sp]
double gaussian_kl(const GaussianApprox& p, const GaussianApprox& q);

}  // namespace corsvm
