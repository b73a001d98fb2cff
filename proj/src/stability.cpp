#include "sbmor/stability.hpp"

#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>

#include "sbmor/errors.hpp"
#include "sbmor/rng.hpp"

namespace sbmor {

Eigen::MatrixXd kron(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    Eigen::MatrixXd out(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) =
                A(i, j) * B;
    return out;
}

Eigen::MatrixXd closure_matrix(const BilinearStochasticSystem& sys) {
    const Eigen::Index n = sys.state_dim();
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd L = kron(sys.A, id) + kron(id, sys.A);
    for (const auto& Nk : sys.N) L += kron(Nk, Nk);
    const Eigen::Index v = sys.noise_dim();
    for (Eigen::Index i = 0; i < v; ++i)
        for (Eigen::Index j = 0; j < v; ++j)
            if (sys.K(i, j) != 0.0)
                L += sys.K(i, j) * kron(sys.H[static_cast<std::size_t>(i)],
                                        sys.H[static_cast<std::size_t>(j)]);
    return L;
}

Eigen::MatrixXd apply_closure(const BilinearStochasticSystem& sys,
                              const Eigen::MatrixXd& X) {
    Eigen::MatrixXd Y = sys.A * X + X * sys.A.transpose();
    for (const auto& Nk : sys.N) Y += Nk * X * Nk.transpose();
    const Eigen::Index v = sys.noise_dim();
    for (Eigen::Index i = 0; i < v; ++i)
        for (Eigen::Index j = 0; j < v; ++j)
            if (sys.K(i, j) != 0.0)
                Y += sys.K(i, j) * sys.H[static_cast<std::size_t>(i)] * X *
                     sys.H[static_cast<std::size_t>(j)].transpose();
    return Y;
}

Eigen::MatrixXd apply_closure_adjoint(const Eigen::MatrixXd& drift,
                                      const BilinearStochasticSystem& sys,
                                      const Eigen::MatrixXd& X) {
    Eigen::MatrixXd Y = drift.transpose() * X + X * drift;
    for (const auto& Nk : sys.N) Y += Nk.transpose() * X * Nk;
    const Eigen::Index v = sys.noise_dim();
    for (Eigen::Index i = 0; i < v; ++i)
        for (Eigen::Index j = 0; j < v; ++j)
            if (sys.K(i, j) != 0.0)
                Y += sys.K(i, j) * sys.H[static_cast<std::size_t>(i)].transpose() *
                     X * sys.H[static_cast<std::size_t>(j)];
    return Y;
}

Eigen::MatrixXd apply_closure_adjoint(const BilinearStochasticSystem& sys,
                                      const Eigen::MatrixXd& X) {
    return apply_closure_adjoint(sys.A, sys, X);
}

namespace {

double dense_abscissa(const BilinearStochasticSystem& sys) {
    const Eigen::MatrixXd L = closure_matrix(sys);
    if (!L.allFinite())
        throw SolverError("closure operator has non-finite entries");
    Eigen::EigenSolver<Eigen::MatrixXd> eig(L, /*computeEigenvectors=*/false);
    if (eig.info() != Eigen::Success)
        throw SolverError("eigenvalue solver failed on the closure operator");
    return eig.eigenvalues().real().maxCoeff();
}

/// Restarted Arnoldi estimate of the rightmost eigenvalue of the
/// matrix-free closure. The rightmost point of the spectrum is a
/// Perron-type eigenvalue of a resolvent-positive operator, which the
/// Krylov space captures quickly from a start vector inside the PSD cone.
double arnoldi_abscissa(const BilinearStochasticSystem& sys,
                        const StabilityOptions& opts) {
    const Eigen::Index n = sys.state_dim();
    const Eigen::Index dim = n * n;
    const int m = static_cast<int>(
        std::min<Eigen::Index>(dim, opts.arnoldi_subspace));

    const auto apply = [&](const Eigen::VectorXd& v) {
        const Eigen::MatrixXd X =
            Eigen::Map<const Eigen::MatrixXd>(v.data(), n, n);
        const Eigen::MatrixXd Y = apply_closure(sys, X);
        return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(Y.data(), dim));
    };

    // deterministic start: identity plus a small seeded symmetric bump
    CounterRng rng(0x5eedu);
    Eigen::MatrixXd X0 = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double r = rng.normal(static_cast<std::uint64_t>(i),
                                        static_cast<std::uint64_t>(j), 0);
            X0(i, j) += 0.05 * r;
            X0(j, i) = X0(i, j);
        }
    Eigen::VectorXd start = Eigen::Map<const Eigen::VectorXd>(X0.data(), dim);
    start.normalize();

    double best = -std::numeric_limits<double>::infinity();
    for (int restart = 0; restart < opts.arnoldi_restarts; ++restart) {
        Eigen::MatrixXd V(dim, m + 1);
        Eigen::MatrixXd Hm = Eigen::MatrixXd::Zero(m + 1, m);
        V.col(0) = start;
        int k = m;
        for (int j = 0; j < m; ++j) {
            Eigen::VectorXd w = apply(V.col(j));
            for (int i = 0; i <= j; ++i) { // modified Gram-Schmidt, one reorth pass
                const double h = V.col(i).dot(w);
                Hm(i, j) += h;
                w -= h * V.col(i);
            }
            for (int i = 0; i <= j; ++i) {
                const double h = V.col(i).dot(w);
                Hm(i, j) += h;
                w -= h * V.col(i);
            }
            const double norm = w.norm();
            Hm(j + 1, j) = norm;
            if (norm < 1e-12) { k = j + 1; break; } // invariant subspace
            V.col(j + 1) = w / norm;
        }

        Eigen::EigenSolver<Eigen::MatrixXd> eig(Hm.topLeftCorner(k, k));
        if (eig.info() != Eigen::Success)
            throw SolverError("Arnoldi Hessenberg eigensolve failed");
        Eigen::Index rightmost = 0;
        eig.eigenvalues().real().maxCoeff(&rightmost);
        const double estimate = eig.eigenvalues()(rightmost).real();

        if (k < m) return estimate; // exact invariant subspace
        const bool converged =
            std::abs(estimate - best) <= 1e-11 * std::max(1.0, std::abs(estimate));
        best = std::max(best, estimate);
        if (converged) break;

        // restart from the rightmost Ritz vector
        const Eigen::VectorXcd ritz =
            V.leftCols(k) * eig.eigenvectors().col(rightmost);
        Eigen::VectorXd next = ritz.real();
        if (next.norm() < 1e-14) next = ritz.imag();
        if (next.norm() < 1e-14) break;
        start = next.normalized();
    }
    return best;
}

} // namespace

double mean_square_abscissa(const BilinearStochasticSystem& sys,
                            const StabilityOptions& opts) {
    if (sys.state_dim() <= opts.dense_limit) return dense_abscissa(sys);
    return arnoldi_abscissa(sys, opts);
}

StabilityReport is_mean_square_stable(const BilinearStochasticSystem& sys,
                                      const StabilityOptions& opts) {
    require_valid(sys);
    if (opts.tol < 0.0) throw std::invalid_argument("stability tol must be >= 0");
    const double abscissa = mean_square_abscissa(sys, opts);
    return StabilityReport{abscissa, abscissa < -opts.tol, -abscissa};
}

} // namespace sbmor
