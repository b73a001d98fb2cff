#pragma once

#include <vector>

#include <Eigen/Dense>

#include "sbmor/stability.hpp"
#include "sbmor/system.hpp"

namespace sbmor {

struct LyapunovOptions {
    double stability_tol = 1e-9;
    /// Refuse the dense n^2 x n^2 Kronecker solve above this state
    /// dimension (cost grows as n^6).
    Eigen::Index dimension_cap = 100;
    double rcond_floor = 1e-14;
    StabilityOptions stability{};
};

/// Unique solution X of
///   A^T X + X A + sum_k N_k^T X N_k + sum_ij H_i^T X H_j k_ij = -RHS,
/// obtained from the n^2 x n^2 linear system L^T vec(X) = -vec(RHS)
/// (adjoint closure, column-stacking) and symmetrized. Requires the
/// mean-square stability condition; X is PSD whenever RHS is PSD.
Eigen::MatrixXd
solve_generalized_lyapunov(const Eigen::MatrixXd& A,
                           const std::vector<Eigen::MatrixXd>& N,
                           const std::vector<Eigen::MatrixXd>& H,
                           const Eigen::MatrixXd& K, const Eigen::MatrixXd& RHS,
                           const LyapunovOptions& opts = {});

Eigen::MatrixXd solve_generalized_lyapunov(const BilinearStochasticSystem& sys,
                                           const Eigen::MatrixXd& RHS,
                                           const LyapunovOptions& opts = {});

struct ObservabilityResult {
    Eigen::MatrixXd Q;
    bool positive_definite = false; ///< Cholesky with zero shift succeeded
    double residual = 0.0;          ///< relative equation residual
};

/// Observability Gramian: generalized Lyapunov solve with RHS = C^T C.
ObservabilityResult observability_gramian(const BilinearStochasticSystem& sys,
                                          const LyapunovOptions& opts = {});

struct ReachabilityOptions {
    /// Relative to the size of the equation's terms.
    double newton_tol = 1e-11;
    /// A stalled line search still counts as converged below this.
    double stall_accept_tol = 1e-9;
    int max_newton_iters = 30;
    /// Regularizer added to B B^T for the linear-case start; negative
    /// means 1e-6 * ||B B^T||_F.
    double seed_shift = -1.0;
    double min_step = 1e-10;  ///< damping underflow threshold
    int max_bisections = 24;  ///< continuation step refinements
    LyapunovOptions lyapunov{};
};

struct ReachabilityResult {
    Eigen::MatrixXd P; ///< reachability Gramian, X^{-1}
    Eigen::MatrixXd X; ///< SPD solution of the Riccati-type equation
    int newton_iterations = 0;       ///< final Newton run (full coupling)
    int total_newton_iterations = 0; ///< including continuation stages
    int continuation_steps = 0;
    double residual = 0.0; ///< relative ||R(X)||_F at acceptance
    std::vector<double> residual_trace; ///< final Newton run
};

/// SPD solution X of the Riccati-type equation
///   A^T X + X A + sum_k N_k^T X N_k + sum_ij H_i^T X H_j k_ij + X B B^T X = 0
/// (the reachability relation with equality), and P = X^{-1}.
///
/// The trivial root X = 0 always solves the equation, so the solver must
/// start inside the basin of the SPD root. With no coupling that root is
/// the inverse of the plain Lyapunov Gramian, which is computed exactly;
/// the coupling is then switched on by continuation (the closure stays
/// stable for every intermediate scale), running damped Newton-Kleinman
/// steps (shifted-drift generalized Lyapunov solves with a
/// residual-decrease line search) from the previous root each time.
ReachabilityResult
reachability_gramian(const BilinearStochasticSystem& sys,
                     const ReachabilityOptions& opts = {});

/// Relative residual of the generalized Lyapunov equation, evaluated by
/// direct matrix arithmetic: ||adjoint-closure(X) + RHS||_F scaled by
/// ||RHS||_F + ||X||_F ||A||_F.
double lyapunov_residual(const BilinearStochasticSystem& sys,
                         const Eigen::MatrixXd& X, const Eigen::MatrixXd& RHS);

/// Relative residual ||R(X)||_F / scale of the Riccati-type equation,
/// evaluated directly from the definition.
double riccati_residual(const BilinearStochasticSystem& sys,
                        const Eigen::MatrixXd& X);

/// lambda_min of sum_ij A_i^T A_j k_ij (PSD whenever K is PSD).
double psd_closure_check(const std::vector<Eigen::MatrixXd>& A_list,
                         const Eigen::MatrixXd& K);

struct GramianPair {
    Eigen::MatrixXd P;
    Eigen::MatrixXd X;
    Eigen::MatrixXd Q;
    double residual_Q = 0.0;
    double residual_X = 0.0;
    int newton_iterations = 0;
};

/// Both Gramians plus their directly evaluated equation residuals.
GramianPair compute_gramians(const BilinearStochasticSystem& sys,
                             const ReachabilityOptions& reach_opts = {},
                             const LyapunovOptions& lyap_opts = {});

} // namespace sbmor
