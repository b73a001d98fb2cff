#pragma once

#include <vector>

#include <Eigen/Dense>

#include "sbmor/balancing.hpp"

namespace sbmor {

/// Reduced-order model obtained by singular perturbation approximation:
/// the truncated block's differential is set to zero (dropping its
/// diffusion and bilinear terms), the algebraic constraint is solved and
/// substituted. The result carries a feedthrough D and control-quadratic /
/// noise-feedthrough corrections E_k, F_i, so it is no longer bilinear:
///
///   dx_r = [A x_r + B u + sum_k (N_k x_r + E_k u) u_k] dt
///          + sum_i (H_i x_r + F_i u) dM_i,
///   y_r  = C x_r + D u.
struct ReducedModel {
    Eigen::Index r = 0;
    Eigen::MatrixXd A; ///< r x r
    Eigen::MatrixXd B; ///< r x m
    Eigen::MatrixXd C; ///< p x r
    Eigen::MatrixXd D; ///< p x m
    std::vector<Eigen::MatrixXd> E; ///< m matrices, r x m
    std::vector<Eigen::MatrixXd> F; ///< v matrices, r x m
    std::vector<Eigen::MatrixXd> H; ///< v matrices, r x r
    std::vector<Eigen::MatrixXd> N; ///< m matrices, r x r
    Eigen::MatrixXd K; ///< v x v, inherited noise covariance

    Eigen::Index input_dim() const { return B.cols(); }
    Eigen::Index output_dim() const { return C.rows(); }
    Eigen::Index noise_dim() const { return K.rows(); }
};

struct ReductionOptions {
    double condition_limit = 1e12; ///< refuse solves beyond this estimate
    double grouping_rel_tol = 1e-8;
};

/// SPA reduction at a group boundary r (r = n returns the balanced system
/// itself with zero D, E, F). The solved constraint gives
///   A_bar = A11 - A12 A22^{-1} A21,   B_bar = B1 - A12 A22^{-1} B2,
///   C_bar = C1 - C2 A22^{-1} A21,     D_bar = -C2 A22^{-1} B2,
///   E_k   = -N_{k,12} A22^{-1} B2,    F_i   = -H_{i,12} A22^{-1} B2,
///   H_i   = H_{i,11} - H_{i,12} A22^{-1} A21,
///   N_k   = N_{k,11} - N_{k,12} A22^{-1} A21,
/// all realized as factored linear solves against A22.
ReducedModel spa_reduce(const BalancedRealization& balanced, Eigen::Index r,
                        const ReductionOptions& opts = {});

/// Three-way partition used to compare two reduced models whose orders
/// differ by one Hankel group: block 1 is kept by both, block 2 only by
/// the larger model, block 3 by neither.
struct NeighborForm {
    Eigen::Index r_small = 0;
    Eigen::Index r_big = 0;

    // finer-partition blocks of the balanced coefficients
    Eigen::MatrixXd A_blocks[3][3];
    Eigen::MatrixXd B_blocks[3];  ///< B1, B2, B3
    Eigen::MatrixXd C_blocks[3];  ///< C1, C2, C3
    std::vector<Eigen::MatrixXd> N_slab1; ///< per input: [N11 N12 N13]
    std::vector<Eigen::MatrixXd> H_slab1; ///< per channel: [H11 H12 H13]

    /// larger model's coefficient slabs (rows 1..2 of the finer partition)
    Eigen::MatrixXd A_hat; ///< r_big x n
    Eigen::MatrixXd B_hat; ///< r_big x m
    std::vector<Eigen::MatrixXd> N_hat;
    std::vector<Eigen::MatrixXd> H_hat;

    /// smaller model's coefficient slabs (row 1 only)
    Eigen::MatrixXd A_hat_r; ///< r_small x n
    std::vector<Eigen::MatrixXd> N_hat_r;
    std::vector<Eigen::MatrixXd> H_hat_r;

    /// affine constraint map (x_r, u) |-> (h1, h2):
    /// h = h_state * x_r + h_input * u, from the 2x2 block inverse
    Eigen::MatrixXd h_state; ///< (n - r_small) x r_small
    Eigen::MatrixXd h_input; ///< (n - r_small) x m
    double block_rcond = 0.0; ///< reciprocal condition estimate of the block
};

/// Assemble the finer partition at two consecutive group boundaries.
NeighborForm assemble_neighbor_form(const BalancedRealization& balanced,
                                    Eigen::Index r_small, Eigen::Index r_big,
                                    const ReductionOptions& opts = {});

/// Eliminates (h1, h2) from the smaller neighbor model and compares the
/// resulting coefficients against spa_reduce at the same order; returns
/// the maximum Frobenius deviation over all matrix slots.
double neighbor_equivalence_check(const BalancedRealization& balanced,
                                  Eigen::Index r,
                                  const ReductionOptions& opts = {});

/// SPA models at every group boundary from r_final up to the largest
/// boundary below n, ascending: the stepwise chain whose per-step error
/// bounds telescope into the total bound.
std::vector<ReducedModel> spa_chain(const BalancedRealization& balanced,
                                    Eigen::Index r_final,
                                    const ReductionOptions& opts = {});

} // namespace sbmor
