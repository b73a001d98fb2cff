#include "sbmor/generate.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "sbmor/errors.hpp"
#include "sbmor/gramians.hpp"
#include "sbmor/rng.hpp"
#include "sbmor/stability.hpp"

namespace sbmor {

namespace {

Eigen::MatrixXd sample_matrix(const CounterRng& rng, std::uint64_t block,
                              Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            M(i, j) = rng.normal(block, static_cast<std::uint64_t>(i),
                                 static_cast<std::uint64_t>(j));
    return M;
}

void apply_scale(BilinearStochasticSystem& sys,
                 const std::vector<Eigen::MatrixXd>& rawN,
                 const std::vector<Eigen::MatrixXd>& rawH, double rho) {
    sys.N.clear();
    sys.H.clear();
    for (const auto& M : rawN) sys.N.push_back(rho * M);
    for (const auto& M : rawH) sys.H.push_back(rho * M);
}

/// Upper cap on the coupling scale below which the Riccati-type Gramian
/// equality keeps an SPD root. The root branch folds when the coupling
/// perturbation at the coupling-free root X_lin becomes comparable to the
/// separation of the shifted drift A + B B^T X_lin, so the cap keeps the
/// first-order correction well below ||X_lin||.
double existence_scale_cap(const BilinearStochasticSystem& sys,
                           const std::vector<Eigen::MatrixXd>& rawN,
                           const std::vector<Eigen::MatrixXd>& rawH) {
    const Eigen::Index n = sys.state_dim();
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd G = sys.B * sys.B.transpose();

    const Eigen::MatrixXd kron_sum = kron(sys.A, id) + kron(id, sys.A);
    const Eigen::MatrixXd rhs = G + (1e-6 * G.norm()) * id;
    const Eigen::VectorXd p = kron_sum.partialPivLu().solve(
        -Eigen::Map<const Eigen::VectorXd>(rhs.data(), n * n));
    Eigen::MatrixXd P_lin = Eigen::Map<const Eigen::MatrixXd>(p.data(), n, n);
    P_lin = 0.5 * (P_lin + P_lin.transpose());
    const Eigen::MatrixXd X_lin = P_lin.partialPivLu().inverse();

    Eigen::EigenSolver<Eigen::MatrixXd> eig(sys.A + G * X_lin, false);
    const Eigen::VectorXd re = eig.eigenvalues().real();
    double sep = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j)
            sep = std::min(sep, std::abs(re(i) + re(j)));

    Eigen::MatrixXd coupling = Eigen::MatrixXd::Zero(n, n);
    for (const auto& Nk : rawN) coupling += Nk.transpose() * X_lin * Nk;
    for (std::size_t i = 0; i < rawH.size(); ++i)
        for (std::size_t j = 0; j < rawH.size(); ++j)
            coupling += sys.K(static_cast<Eigen::Index>(i),
                              static_cast<Eigen::Index>(j)) *
                        rawH[i].transpose() * X_lin * rawH[j];
    const double strength = coupling.norm();
    if (strength == 0.0) return 1.0;
    return std::sqrt(0.05 * sep * X_lin.norm() / strength);
}

} // namespace

BilinearStochasticSystem
generate_test_system(Eigen::Index n, Eigen::Index m, Eigen::Index p,
                     Eigen::Index v, std::uint64_t seed,
                     double stability_margin, const GeneratorOptions& opts) {
    if (n < 1 || m < 1 || p < 1 || v < 1)
        throw std::invalid_argument("generator dimensions must be >= 1");
    if (stability_margin <= 0.0)
        throw std::invalid_argument("stability_margin must be positive");

    CounterRng rng(seed);
    BilinearStochasticSystem sys;
    sys.B = sample_matrix(rng, 1, n, m);
    sys.C = sample_matrix(rng, 2, p, n);

    const Eigen::MatrixXd A0 = sample_matrix(rng, 0, n, n);
    // Shift by the numerical range bound so the drift part of the closure
    // sits left of -1 - margin before any coupling is added.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sym(
        0.5 * (A0 + A0.transpose()));
    const double alpha =
        sym.eigenvalues().maxCoeff() + 0.5 + 0.5 * stability_margin;
    sys.A = A0 - alpha * Eigen::MatrixXd::Identity(n, n);

    std::vector<Eigen::MatrixXd> rawN, rawH;
    for (Eigen::Index k = 0; k < m; ++k)
        rawN.push_back(opts.zero_bilinear
                           ? Eigen::MatrixXd::Zero(n, n).eval()
                           : sample_matrix(rng, 10 + static_cast<std::uint64_t>(k), n, n));
    for (Eigen::Index i = 0; i < v; ++i)
        rawH.push_back(sample_matrix(rng, 100 + static_cast<std::uint64_t>(i), n, n));
    sys.K = Eigen::MatrixXd::Identity(v, v);

    // Mean-square stability is not enough for the Gramian solves the test
    // systems exist for: the Riccati-type equality loses its SPD root under
    // strong coupling, so the scale starts below the fold estimate.
    double rho = std::min(1.0, existence_scale_cap(sys, rawN, rawH));

    int halvings = 0;
    for (; halvings <= opts.max_halvings; ++halvings) {
        apply_scale(sys, rawN, rawH, rho);
        if (mean_square_abscissa(sys) <= -stability_margin) break;
        rho *= 0.5;
    }
    if (halvings > opts.max_halvings) {
        std::ostringstream msg;
        msg << "generator failed to stabilize after " << opts.max_halvings
            << " halvings; final abscissa " << mean_square_abscissa(sys);
        throw SolverError(msg.str());
    }

    // fail-fast verification; the proxy cap usually lands inside the
    // existence regime on the first try
    ReachabilityOptions verify;
    verify.max_newton_iters = 12;
    verify.max_bisections = 0;
    for (; halvings <= opts.max_halvings; ++halvings) {
        try {
            reachability_gramian(sys, verify);
            return sys;
        } catch (const SolverError&) {
            rho *= 0.5;
            apply_scale(sys, rawN, rawH, rho);
        }
    }
    throw SolverError("generator could not reach the Gramian existence regime");
}

} // namespace sbmor
