#pragma once

// Test-only brute-force reference for the Riccati-type Gramian equation:
// generic damped Newton on the n(n+1)/2 symmetric parameters with a
// central finite-difference Jacobian. Shares no solver code with the
// library implementation.

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "sbmor/system.hpp"

namespace sbmor::test {

inline Eigen::MatrixXd riccati_residual_matrix(
    const BilinearStochasticSystem& sys, const Eigen::MatrixXd& X) {
    const Eigen::MatrixXd G = sys.B * sys.B.transpose();
    Eigen::MatrixXd R = sys.A.transpose() * X + X * sys.A + X * G * X;
    for (const auto& Nk : sys.N) R += Nk.transpose() * X * Nk;
    for (Eigen::Index i = 0; i < sys.noise_dim(); ++i)
        for (Eigen::Index j = 0; j < sys.noise_dim(); ++j)
            R += sys.K(i, j) * sys.H[static_cast<std::size_t>(i)].transpose() *
                 X * sys.H[static_cast<std::size_t>(j)];
    return R;
}

namespace detail {

inline Eigen::VectorXd pack(const Eigen::MatrixXd& S) {
    const Eigen::Index n = S.rows();
    Eigen::VectorXd out(n * (n + 1) / 2);
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) out(idx++) = S(i, j);
    return out;
}

inline Eigen::MatrixXd unpack(const Eigen::VectorXd& v, Eigen::Index n) {
    Eigen::MatrixXd S(n, n);
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) {
            S(i, j) = v(idx);
            S(j, i) = v(idx);
            ++idx;
        }
    return S;
}

// straightforward start value: inverse of the drift-only Gramian,
// assembled with a locally written Kronecker solve
inline Eigen::MatrixXd oracle_start(const BilinearStochasticSystem& sys) {
    const Eigen::Index n = sys.state_dim();
    Eigen::MatrixXd kron_sum = Eigen::MatrixXd::Zero(n * n, n * n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index k = 0; k < n; ++k) {
                kron_sum(i * n + k, j * n + k) += sys.A(i, j); // A (x) I
                kron_sum(k * n + i, k * n + j) += sys.A(i, j); // I (x) A
            }
    const Eigen::MatrixXd G =
        sys.B * sys.B.transpose() +
        (1e-9 * sys.B.squaredNorm()) * Eigen::MatrixXd::Identity(n, n);
    const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(G.data(), n * n);
    const Eigen::VectorXd p = kron_sum.fullPivLu().solve(rhs);
    Eigen::MatrixXd P = Eigen::Map<const Eigen::MatrixXd>(p.data(), n, n);
    P = 0.5 * (P + P.transpose());
    return P.fullPivLu().inverse();
}

} // namespace detail

inline Eigen::MatrixXd riccati_brute_force(const BilinearStochasticSystem& sys,
                                           double tol = 1e-12,
                                           int max_iters = 200) {
    const Eigen::Index n = sys.state_dim();
    const Eigen::Index dof = n * (n + 1) / 2;

    const auto residual_vec = [&](const Eigen::VectorXd& params) {
        return detail::pack(
            riccati_residual_matrix(sys, detail::unpack(params, n)));
    };

    Eigen::VectorXd params = detail::pack(detail::oracle_start(sys));
    double res_norm = residual_vec(params).norm();

    for (int iter = 0; iter < max_iters; ++iter) {
        const Eigen::MatrixXd X = detail::unpack(params, n);
        if (res_norm <= tol * std::max(1.0, X.norm())) return X;

        const double fd = 1e-6 * std::max(1.0, params.cwiseAbs().maxCoeff());
        Eigen::MatrixXd jacobian(dof, dof);
        for (Eigen::Index c = 0; c < dof; ++c) {
            Eigen::VectorXd hi = params, lo = params;
            hi(c) += fd;
            lo(c) -= fd;
            jacobian.col(c) = (residual_vec(hi) - residual_vec(lo)) / (2.0 * fd);
        }

        const Eigen::VectorXd step =
            jacobian.fullPivLu().solve(-residual_vec(params));
        double theta = 1.0;
        bool accepted = false;
        while (theta > 1e-12) {
            const Eigen::VectorXd trial = params + theta * step;
            const double trial_norm = residual_vec(trial).norm();
            if (trial_norm < res_norm) {
                params = trial;
                res_norm = trial_norm;
                accepted = true;
                break;
            }
            theta *= 0.5;
        }
        if (!accepted)
            throw std::runtime_error("oracle line search stalled");
    }
    throw std::runtime_error("oracle did not converge");
}

} // namespace sbmor::test
