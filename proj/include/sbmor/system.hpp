#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sbmor {

/// Stochastic control system with bilinear drift and linear noise coupling:
///
///   dx = [A x + B u + sum_k N_k x u_k] dt + sum_i H_i x(t-) dM_i,
///   y  = C x,
///
/// where M is a mean-zero square-integrable Levy process with
/// E[M(t) M(t)^T] = K t.
struct BilinearStochasticSystem {
    Eigen::MatrixXd A; ///< n x n drift
    Eigen::MatrixXd B; ///< n x m input map
    Eigen::MatrixXd C; ///< p x n output map
    std::vector<Eigen::MatrixXd> N; ///< m bilinear coupling matrices, n x n
    std::vector<Eigen::MatrixXd> H; ///< v noise coupling matrices, n x n
    Eigen::MatrixXd K; ///< v x v noise covariance (per unit time)

    Eigen::Index state_dim() const { return A.rows(); }
    Eigen::Index input_dim() const { return B.cols(); }
    Eigen::Index output_dim() const { return C.rows(); }
    Eigen::Index noise_dim() const { return K.rows(); }
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
    std::string joined() const;
};

/// Report-style check of every type invariant: dimension consistency,
/// K symmetric PSD, finite entries. Never throws.
ValidationReport validate(const BilinearStochasticSystem& sys);

/// Throws InvalidSystemError listing all violations if the system is invalid.
void require_valid(const BilinearStochasticSystem& sys);

} // namespace sbmor
