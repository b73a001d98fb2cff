#pragma once

#include <Eigen/Dense>

#include "sbmor/system.hpp"

namespace sbmor {

struct StabilityReport {
    double spectral_abscissa; ///< max real part of the closure spectrum
    bool stable;              ///< spectral_abscissa < -tol
    double margin;            ///< -spectral_abscissa
};

struct StabilityOptions {
    double tol = 1e-9;
    /// Above this state dimension the abscissa is estimated by restarted
    /// Arnoldi on the matrix-free closure operator instead of a dense Schur
    /// decomposition of the n^2 x n^2 matrix.
    Eigen::Index dense_limit = 20;
    int arnoldi_subspace = 160;
    int arnoldi_restarts = 4;
};

/// Dense n^2 x n^2 closure (second-moment generator) in the column-stacking
/// vec convention, vec(AXB) = (B^T (x) A) vec(X):
///
///   L = A(x)I + I(x)A + sum_k N_k(x)N_k + sum_ij H_i(x)H_j k_ij.
///
/// L vec(X) = vec(A X + X A^T + sum_k N_k X N_k^T + sum_ij H_i X H_j^T k_ij).
/// Since K is symmetric, summing H_j(x)H_i k_ij instead gives the same L.
Eigen::MatrixXd closure_matrix(const BilinearStochasticSystem& sys);

/// Matrix-free action of the closure on a symmetric (or general) X:
/// A X + X A^T + sum_k N_k X N_k^T + sum_ij H_i X H_j^T k_ij.
Eigen::MatrixXd apply_closure(const BilinearStochasticSystem& sys,
                              const Eigen::MatrixXd& X);

/// Adjoint action: A^T X + X A + sum_k N_k^T X N_k + sum_ij H_i^T X H_j k_ij.
/// The drift can be overridden (used by the Riccati Newton steps).
Eigen::MatrixXd apply_closure_adjoint(const BilinearStochasticSystem& sys,
                                      const Eigen::MatrixXd& X);
Eigen::MatrixXd apply_closure_adjoint(const Eigen::MatrixXd& drift,
                                      const BilinearStochasticSystem& sys,
                                      const Eigen::MatrixXd& X);

/// Max real part of the closure spectrum. Exact (dense Schur) for
/// n <= dense_limit, restarted Arnoldi above; the Arnoldi estimate is
/// tolerance-stable rather than bit-exact across subspace choices.
double mean_square_abscissa(const BilinearStochasticSystem& sys,
                            const StabilityOptions& opts = {});

StabilityReport is_mean_square_stable(const BilinearStochasticSystem& sys,
                                      const StabilityOptions& opts = {});

/// Kronecker product helper (column-stacking convention throughout).
Eigen::MatrixXd kron(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

} // namespace sbmor
