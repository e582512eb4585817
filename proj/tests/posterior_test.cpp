#include <doctest.h>

#include <cmath>
#include <vector>

#include "corsvm/errors.hpp"
#include "corsvm/posterior.hpp"
#include "corsvm/rng.hpp"
#include "corsvm/synthetic.hpp"
#include "test_helpers.hpp"

using namespace corsvm;

namespace {

// Independent mode locator: nested grid refinement of the exact objective
// over theta in [-10, 10]^2, three zoom levels.
Eigen::VectorXd grid_search_mode(const BinaryDataset& ds, const Eigen::VectorXd& weights,
                                 const GaussianPrior& prior) {
    double lo0 = -10.0, hi0 = 10.0, lo1 = -10.0, hi1 = 10.0;
    Eigen::VectorXd best(2);
    for (int level = 0; level < 3; ++level) {
        const int steps = 200;
        double best_value = std::numeric_limits<double>::infinity();
        Eigen::VectorXd theta(2);
        for (int i = 0; i <= steps; ++i) {
            theta(0) = lo0 + (hi0 - lo0) * i / steps;
            for (int j = 0; j <= steps; ++j) {
                theta(1) = lo1 + (hi1 - lo1) * j / steps;
                const double v = negative_log_joint(ds, weights, prior, theta);
                if (v < best_value) {
                    best_value = v;
                    best = theta;
                }
            }
        }
        const double span0 = 2.0 * (hi0 - lo0) / steps;
        const double span1 = 2.0 * (hi1 - lo1) / steps;
        lo0 = best(0) - span0;
        hi0 = best(0) + span0;
        lo1 = best(1) - span1;
        hi1 = best(1) + span1;
    }
    return best;
}

// Numerically integrated KL between the exact (unnormalized) weighted
// posteriors of a 1-feature problem, over a generous box.
double quadrature_kl(const BinaryDataset& ds, const Eigen::VectorXd& w_p,
                     const Eigen::VectorXd& w_q, const GaussianPrior& prior,
                     const GaussianApprox& box_hint_p, const GaussianApprox& box_hint_q) {
    const int steps = 400;
    double lo0 = 1e300, hi0 = -1e300, lo1 = 1e300, hi1 = -1e300;
    for (const auto* g : {&box_hint_p, &box_hint_q}) {
        const double s0 = 10.0 * std::sqrt(g->covariance(0, 0));
        const double s1 = 10.0 * std::sqrt(g->covariance(1, 1));
        lo0 = std::min(lo0, g->mean(0) - s0);
        hi0 = std::max(hi0, g->mean(0) + s0);
        lo1 = std::min(lo1, g->mean(1) - s1);
        hi1 = std::max(hi1, g->mean(1) + s1);
    }
    const double d0 = (hi0 - lo0) / steps;
    const double d1 = (hi1 - lo1) / steps;

    std::vector<double> log_p, log_q;
    log_p.reserve((steps + 1) * (steps + 1));
    log_q.reserve((steps + 1) * (steps + 1));
    Eigen::VectorXd theta(2);
    for (int i = 0; i <= steps; ++i) {
        theta(0) = lo0 + i * d0;
        for (int j = 0; j <= steps; ++j) {
            theta(1) = lo1 + j * d1;
            log_p.push_back(-negative_log_joint(ds, w_p, prior, theta));
            log_q.push_back(-negative_log_joint(ds, w_q, prior, theta));
        }
    }
    const auto log_norm = [&](const std::vector<double>& lg) {
        const double mx = *std::max_element(lg.begin(), lg.end());
        double s = 0.0;
        for (const double v : lg) s += std::exp(v - mx);
        return mx + std::log(s) + std::log(d0 * d1);
    };
    const double zp = log_norm(log_p);
    const double zq = log_norm(log_q);

    double kl = 0.0;
    for (std::size_t k = 0; k < log_p.size(); ++k) {
        const double p = std::exp(log_p[k] - zp);
        kl += p * ((log_p[k] - zp) - (log_q[k] - zq));
    }
    return kl * d0 * d1;
}

}  // namespace

TEST_CASE("log_potential values and saturation") {
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(3);
    Eigen::VectorXd x(2);
    x << 0.7, -0.3;
    // Zero margin gives -ln 2 for either label.
    CHECK(log_potential(theta, x, +1) == doctest::Approx(-std::log(2.0)).epsilon(1e-14));
    CHECK(log_potential(theta, x, -1) == doctest::Approx(-std::log(2.0)).epsilon(1e-14));

    Eigen::VectorXd big(2);
    big << 50.0, 0.0;
    Eigen::VectorXd one_x(1);
    one_x << 1.0;
    const double saturated = log_potential(big, one_x, +1);
    CHECK(saturated == doctest::Approx(-1.9287498479639178e-22).epsilon(1e-12));
    const double swamped = log_potential(big, one_x, -1);
    CHECK(swamped == doctest::Approx(-50.0).epsilon(1e-12));

    CHECK_THROWS_AS(log_potential(theta, one_x, +1), DimensionError);
}

TEST_CASE("laplace_fit with zero weights returns the prior") {
    const auto ds = testutil::binary_dataset({{1.0}, {-2.0}}, {+1, -1});
    const GaussianPrior prior{2.5};
    const GaussianApprox g = laplace_fit(ds, Eigen::VectorXd::Zero(2), prior);
    CHECK(g.mean.cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((g.covariance - 2.5 * Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("a single observation pulls the mode along its signed direction") {
    const auto ds = testutil::binary_dataset({{2.0}}, {+1});
    const GaussianPrior prior{1.0};
    const GaussianApprox off = laplace_fit(ds, Eigen::VectorXd::Zero(1), prior);
    CHECK(off.mean.cwiseAbs().maxCoeff() <= 1e-12);

    const GaussianApprox on = laplace_fit(ds, Eigen::VectorXd::Ones(1), prior);
    Eigen::VectorXd direction(2);
    direction << 2.0, 1.0;  // y * (x, 1)
    CHECK(on.mean.dot(direction) > 0.0);
}

TEST_CASE("laplace mode matches the grid-search oracle") {
    const auto ds = testutil::binary_dataset({{0.5}, {-1.0}}, {+1, -1});
    Eigen::VectorXd weights(2);
    weights << 1.0, 2.0;
    const GaussianPrior prior{1.0};

    const Eigen::VectorXd oracle = grid_search_mode(ds, weights, prior);
    const GaussianApprox fit = laplace_fit(ds, weights, prior);
    CHECK((fit.mean - oracle).cwiseAbs().maxCoeff() <= 1e-4);
}

TEST_CASE("newton gradient condition holds at the mode") {
    const RawDataset blobs = make_blobs(10, 2, 2, 2.0, 1.0, 3);
    const BinaryDataset ds = select_pair(blobs, 1, 2);
    const Eigen::VectorXd w = testutil::random_weights(static_cast<std::size_t>(ds.rows()), 5);
    const GaussianPrior prior{1.0};
    const GaussianApprox fit = laplace_fit(ds, w, prior);
    CHECK(negative_log_joint_gradient(ds, w, prior, fit.mean).norm() <= 1e-8);
}

TEST_CASE("analytic derivatives match finite differences") {
    const RawDataset blobs = make_blobs(10, 2, 2, 1.5, 1.0, 7);
    const BinaryDataset ds = select_pair(blobs, 1, 2);
    const Eigen::VectorXd w = testutil::random_weights(static_cast<std::size_t>(ds.rows()), 19);
    const GaussianPrior prior{1.0};
    const double h = 1e-5;
    Rng rng(99);

    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd theta(3);
        for (int i = 0; i < 3; ++i) theta(i) = 1.5 * rng.next_normal();

        const Eigen::VectorXd grad = negative_log_joint_gradient(ds, w, prior, theta);
        Eigen::VectorXd fd_grad(3);
        for (int i = 0; i < 3; ++i) {
            Eigen::VectorXd up = theta, dn = theta;
            up(i) += h;
            dn(i) -= h;
            fd_grad(i) = (negative_log_joint(ds, w, prior, up) -
                          negative_log_joint(ds, w, prior, dn)) /
                         (2.0 * h);
        }
        CHECK((grad - fd_grad).norm() / std::max(grad.norm(), 1e-12) <= 1e-4);

        const Eigen::MatrixXd hess = negative_log_joint_hessian(ds, w, prior, theta);
        Eigen::MatrixXd fd_hess(3, 3);
        for (int i = 0; i < 3; ++i) {
            Eigen::VectorXd up = theta, dn = theta;
            up(i) += h;
            dn(i) -= h;
            fd_hess.col(i) = (negative_log_joint_gradient(ds, w, prior, up) -
                              negative_log_joint_gradient(ds, w, prior, dn)) /
                             (2.0 * h);
        }
        CHECK((hess - fd_hess).norm() / std::max(hess.norm(), 1e-12) <= 1e-3);
    }
}

TEST_CASE("doubling weights equals duplicating points") {
    const auto base = testutil::binary_dataset({{0.4}, {-0.9}, {1.7}}, {+1, -1, +1});
    Eigen::VectorXd w(3);
    w << 0.7, 1.3, 0.2;

    BinaryDataset doubled;
    doubled.features.resize(6, 1);
    doubled.labels.resize(6);
    for (int i = 0; i < 3; ++i) {
        doubled.features(2 * i, 0) = base.features(i, 0);
        doubled.features(2 * i + 1, 0) = base.features(i, 0);
        doubled.labels[static_cast<std::size_t>(2 * i)] = base.labels[static_cast<std::size_t>(i)];
        doubled.labels[static_cast<std::size_t>(2 * i + 1)] =
            base.labels[static_cast<std::size_t>(i)];
    }
    doubled.pair = base.pair;
    Eigen::VectorXd w_dup(6);
    for (int i = 0; i < 3; ++i) {
        w_dup(2 * i) = w(i);
        w_dup(2 * i + 1) = w(i);
    }

    const GaussianPrior prior{1.0};
    const GaussianApprox a = laplace_fit(base, 2.0 * w, prior);
    const GaussianApprox b = laplace_fit(doubled, w_dup, prior);
    CHECK((a.mean - b.mean).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((a.covariance - b.covariance).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("gaussian_kl closed-form values") {
    GaussianApprox std_normal{Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1)};
    GaussianApprox shifted{Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Identity(1, 1)};
    CHECK(std::abs(gaussian_kl(std_normal, shifted) - 0.5) <= 1e-12);

    GaussianApprox wide{Eigen::VectorXd::Zero(1), 2.0 * Eigen::MatrixXd::Identity(1, 1)};
    CHECK(std::abs(gaussian_kl(wide, std_normal) - 0.5 * (1.0 - std::log(2.0))) <= 1e-12);
}

TEST_CASE("gaussian_kl is zero at identical inputs and nonnegative elsewhere") {
    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + static_cast<int>(rng.next_index(4));
        Eigen::MatrixXd a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = rng.next_normal();
        Eigen::MatrixXd cov_p = a * a.transpose() + Eigen::MatrixXd::Identity(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = rng.next_normal();
        Eigen::MatrixXd cov_q = a * a.transpose() + Eigen::MatrixXd::Identity(n, n);
        Eigen::VectorXd mu_p(n), mu_q(n);
        for (int i = 0; i < n; ++i) {
            mu_p(i) = rng.next_normal();
            mu_q(i) = rng.next_normal();
        }
        const GaussianApprox p{mu_p, cov_p};
        const GaussianApprox q{mu_q, cov_q};
        CHECK(gaussian_kl(p, q) >= -1e-12);
        CHECK(std::abs(gaussian_kl(p, p)) <= 1e-12);
    }
}

TEST_CASE("gaussian_kl rejects bad input") {
    GaussianApprox p{Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2)};
    GaussianApprox q{Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3)};
    CHECK_THROWS_AS(gaussian_kl(p, q), DimensionError);

    Eigen::MatrixXd indefinite(2, 2);
    indefinite << 1.0, 2.0, 2.0, 1.0;
    GaussianApprox bad{Eigen::VectorXd::Zero(2), indefinite};
    CHECK_THROWS_AS(gaussian_kl(bad, p), Error);
}

TEST_CASE("laplace KL tracks the numerically integrated KL") {
    const auto ds =
        testutil::binary_dataset({{0.8}, {-0.5}, {1.4}, {-1.1}}, {+1, -1, +1, -1});
    Eigen::VectorXd w_sparse(4);
    w_sparse << 2.0, 0.0, 0.0, 2.0;
    const Eigen::VectorXd w_full = Eigen::VectorXd::Ones(4);
    const GaussianPrior prior{1.0};

    const GaussianApprox fit_p = laplace_fit(ds, w_sparse, prior);
    const GaussianApprox fit_q = laplace_fit(ds, w_full, prior);
    const double approx_kl = gaussian_kl(fit_p, fit_q);
    const double exact_kl = quadrature_kl(ds, w_sparse, w_full, prior, fit_p, fit_q);
    CHECK(std::abs(approx_kl - exact_kl) <= 0.05);
}

TEST_CASE("GaussianApprox serializes row-major") {
    GaussianApprox g;
    g.mean.resize(2);
    g.mean << 0.25, -1.5;
    g.covariance.resize(2, 2);
    g.covariance << 2.0, 0.5, 0.5, 1.0;

    const nlohmann::json j = g;
    CHECK(j.at("covariance").size() == 4);
    CHECK(j.at("covariance")[1].get<double>() == 0.5);

    const GaussianApprox back = j.get<GaussianApprox>();
    CHECK(back.mean == g.mean);
    CHECK(back.covariance == g.covariance);
}
