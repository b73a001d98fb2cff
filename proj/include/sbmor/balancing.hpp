#pragma once

#include <vector>

#include <Eigen/Dense>

#include "sbmor/system.hpp"

namespace sbmor {

/// State-space realization in balanced coordinates: both Gramians equal
/// diag(sigma), the Hankel singular values.
struct BalancedRealization {
    BilinearStochasticSystem system; ///< transformed coefficients
    Eigen::VectorXd sigma;           ///< descending positive HSVs
    Eigen::MatrixXd S;               ///< balancing transformation
    Eigen::MatrixXd S_inv;
};

struct HsvGroup {
    double value = 0.0;   ///< group mean
    Eigen::Index count = 0;
    double spread = 0.0;  ///< max in-group |sigma_i - value| / sigma_1
};

/// Distinct HSV values after tolerance merging, with multiplicities and
/// the admissible reduction orders (group boundaries).
struct HsvGrouping {
    std::vector<HsvGroup> groups;        ///< descending by value
    std::vector<Eigen::Index> cut_indices; ///< proper boundaries, excludes n
    bool is_cut(Eigen::Index r) const;
    /// Index of the first group strictly after the kept block of size r.
    std::size_t first_truncated_group(Eigen::Index r) const;
};

struct BalanceOptions {
    double sigma_floor_rel = 1e-12; ///< refuse sigma_n below this * sigma_1
    double cholesky_jitter_rel = 1e-12;
};

/// Balancing transformation from Cholesky factors P = Lp Lp^T, Q = Lq Lq^T
/// and the SVD U Sigma V^T = Lq^T Lp:
///   S = Sigma^{-1/2} U^T Lq^T,  S^{-1} = Lp V Sigma^{-1/2}.
/// Coefficients map as (S A S^{-1}, S B, C S^{-1}, S H_i S^{-1}, S N_k S^{-1}).
/// Singular-vector signs are fixed so the first nonzero entry of each left
/// vector is positive, making S deterministic.
BalancedRealization balance(const BilinearStochasticSystem& sys,
                            const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q,
                            const BalanceOptions& opts = {});

/// Merge adjacent HSVs with |sigma_i - sigma_{i+1}| <= rel_tol * sigma_1.
HsvGrouping group_hsvs(const Eigen::VectorXd& sigma, double rel_tol);

/// The 2x2 block partition of the balanced coefficients at order r.
struct PartitionedSystem {
    Eigen::Index r = 0;
    Eigen::MatrixXd A11, A12, A21, A22;
    Eigen::MatrixXd B1, B2;
    Eigen::MatrixXd C1, C2;
    std::vector<Eigen::MatrixXd> N11, N12, N21, N22;
    std::vector<Eigen::MatrixXd> H11, H12, H21, H22;
    Eigen::VectorXd sigma1, sigma2;
};

/// Requires r to be a group boundary: a repeated HSV must never be split
/// across the kept/truncated blocks.
PartitionedSystem partition(const BalancedRealization& balanced,
                            Eigen::Index r, double grouping_rel_tol = 1e-8);

} // namespace sbmor
