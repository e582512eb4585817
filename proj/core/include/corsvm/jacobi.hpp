#pragma once

#include <Eigen/Dense>

namespace corsvm {

/// Eigendecomposition of a symmetric matrix.
/// values are sorted non-increasing; column i of vectors belongs to
/// values[i]; equal eigenvalues keep their original diagonal order.
struct SymmetricEigen {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};

/// Cyclic Jacobi rotations. Deterministic: fixed sweep order, stable
/// ordering of the results. Off-diagonal mass is reduced below
/// tol * ||A||_F (or machine floor) before returning.
SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& sym, double tol = 1e-14,
                            int max_sweeps = 64);

}  // namespace corsvm
