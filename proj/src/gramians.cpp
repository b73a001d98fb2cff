#include "sbmor/gramians.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "sbmor/errors.hpp"

namespace sbmor {

namespace {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& X) {
    return 0.5 * (X + X.transpose());
}

void check_dimension_cap(Eigen::Index n, const LyapunovOptions& opts) {
    if (n > opts.dimension_cap) {
        std::ostringstream msg;
        msg << "dimension exceeds solver cap: n = " << n << " > "
            << opts.dimension_cap << " (dense Kronecker solve is O(n^6))";
        throw DimensionCapError(msg.str());
    }
}

/// Adjoint closure matrix L^T for a given drift, sharing N, H, K with sys.
Eigen::MatrixXd adjoint_closure_matrix(const Eigen::MatrixXd& drift,
                                       const BilinearStochasticSystem& sys) {
    const Eigen::Index n = drift.rows();
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd Lt =
        kron(drift.transpose(), id) + kron(id, drift.transpose());
    for (const auto& Nk : sys.N)
        Lt += kron(Nk.transpose(), Nk.transpose());
    const Eigen::Index v = sys.noise_dim();
    for (Eigen::Index i = 0; i < v; ++i)
        for (Eigen::Index j = 0; j < v; ++j)
            if (sys.K(i, j) != 0.0)
                Lt += sys.K(i, j) *
                      kron(sys.H[static_cast<std::size_t>(i)].transpose(),
                           sys.H[static_cast<std::size_t>(j)].transpose());
    return Lt;
}

/// Inner solve of L^T vec(X) = -vec(RHS) for an arbitrary symmetric RHS
/// and drift. No stability gate: Newton steps use shifted drifts whose
/// closure is anti-stable near the SPD root, and only invertibility of
/// the linear system matters there.
Eigen::MatrixXd kron_solve(const Eigen::MatrixXd& drift,
                           const BilinearStochasticSystem& sys,
                           const Eigen::MatrixXd& RHS,
                           const LyapunovOptions& opts) {
    const Eigen::Index n = drift.rows();
    const Eigen::MatrixXd Lt = adjoint_closure_matrix(drift, sys);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(Lt);
    const double rcond = lu.rcond();
    if (!(rcond > opts.rcond_floor)) {
        std::ostringstream msg;
        msg << "generalized Lyapunov system is numerically singular "
            << "(reciprocal condition estimate " << rcond << ")";
        throw SolverError(msg.str());
    }
    const Eigen::VectorXd rhs_vec =
        -Eigen::Map<const Eigen::VectorXd>(RHS.data(), n * n);
    const Eigen::VectorXd x = lu.solve(rhs_vec);
    return symmetrize(Eigen::Map<const Eigen::MatrixXd>(x.data(), n, n));
}

void check_symmetric_psd_rhs(const Eigen::MatrixXd& RHS) {
    if (RHS.rows() != RHS.cols())
        throw std::invalid_argument("RHS must be square");
    const double scale = std::max(1.0, RHS.norm());
    if ((RHS - RHS.transpose()).norm() > 1e-10 * scale)
        throw std::invalid_argument("RHS must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrize(RHS));
    if (eig.eigenvalues().minCoeff() < -1e-10 * scale)
        throw std::invalid_argument("RHS must be positive semidefinite");
}

} // namespace

Eigen::MatrixXd solve_generalized_lyapunov(const BilinearStochasticSystem& sys,
                                           const Eigen::MatrixXd& RHS,
                                           const LyapunovOptions& opts) {
    require_valid(sys);
    check_dimension_cap(sys.state_dim(), opts);
    if (RHS.rows() != sys.state_dim() || RHS.cols() != sys.state_dim())
        throw std::invalid_argument("RHS dimension differs from state dimension");
    check_symmetric_psd_rhs(RHS);

    StabilityOptions stab = opts.stability;
    stab.tol = opts.stability_tol;
    const StabilityReport report = is_mean_square_stable(sys, stab);
    if (!report.stable) {
        std::ostringstream msg;
        msg << "refusing to solve: system not mean-square stable "
            << "(spectral abscissa " << report.spectral_abscissa << ")";
        throw UnstableSystemError(msg.str());
    }
    return kron_solve(sys.A, sys, RHS, opts);
}

Eigen::MatrixXd
solve_generalized_lyapunov(const Eigen::MatrixXd& A,
                           const std::vector<Eigen::MatrixXd>& N,
                           const std::vector<Eigen::MatrixXd>& H,
                           const Eigen::MatrixXd& K, const Eigen::MatrixXd& RHS,
                           const LyapunovOptions& opts) {
    BilinearStochasticSystem sys;
    sys.A = A;
    sys.B = Eigen::MatrixXd::Zero(A.rows(), static_cast<Eigen::Index>(N.size()));
    sys.C = Eigen::MatrixXd::Zero(0, A.rows());
    sys.N = N;
    sys.H = H;
    sys.K = K;
    return solve_generalized_lyapunov(sys, RHS, opts);
}

ObservabilityResult observability_gramian(const BilinearStochasticSystem& sys,
                                          const LyapunovOptions& opts) {
    ObservabilityResult result;
    const Eigen::MatrixXd rhs = sys.C.transpose() * sys.C;
    result.Q = solve_generalized_lyapunov(sys, rhs, opts);
    Eigen::LLT<Eigen::MatrixXd> llt(result.Q);
    result.positive_definite = llt.info() == Eigen::Success;
    result.residual = lyapunov_residual(sys, result.Q, rhs);
    return result;
}

double lyapunov_residual(const BilinearStochasticSystem& sys,
                         const Eigen::MatrixXd& X, const Eigen::MatrixXd& RHS) {
    const double res = (apply_closure_adjoint(sys, X) + RHS).norm();
    const double scale =
        std::max(1e-300, RHS.norm() + X.norm() * sys.A.norm());
    return res / scale;
}

namespace {

Eigen::MatrixXd riccati_operator(const BilinearStochasticSystem& sys,
                                 const Eigen::MatrixXd& G,
                                 const Eigen::MatrixXd& X) {
    return apply_closure_adjoint(sys, X) + X * G * X;
}

double riccati_scale(const BilinearStochasticSystem& sys,
                     const Eigen::MatrixXd& G, const Eigen::MatrixXd& X) {
    double scale = 2.0 * sys.A.norm() * X.norm() + X.norm() * G.norm() * X.norm();
    for (const auto& Nk : sys.N) scale += Nk.norm() * Nk.norm() * X.norm();
    const Eigen::Index v = sys.noise_dim();
    for (Eigen::Index i = 0; i < v; ++i)
        for (Eigen::Index j = 0; j < v; ++j)
            scale += std::abs(sys.K(i, j)) *
                     sys.H[static_cast<std::size_t>(i)].norm() *
                     sys.H[static_cast<std::size_t>(j)].norm() * X.norm();
    return std::max(1e-300, scale);
}

BilinearStochasticSystem scaled_coupling(const BilinearStochasticSystem& sys,
                                         double tau) {
    BilinearStochasticSystem scaled = sys;
    for (auto& Nk : scaled.N) Nk *= tau;
    for (auto& Hi : scaled.H) Hi *= tau;
    return scaled;
}

/// Coupling part of the adjoint closure: sum_k N_k^T Y N_k
/// + sum_ij H_i^T Y H_j k_ij.
Eigen::MatrixXd coupling_adjoint(const BilinearStochasticSystem& sys,
                                 const Eigen::MatrixXd& Y) {
    const Eigen::Index n = Y.rows();
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
    for (const auto& Nk : sys.N) W += Nk.transpose() * Y * Nk;
    const Eigen::Index v = sys.noise_dim();
    for (Eigen::Index i = 0; i < v; ++i)
        for (Eigen::Index j = 0; j < v; ++j)
            if (sys.K(i, j) != 0.0)
                W += sys.K(i, j) * sys.H[static_cast<std::size_t>(i)].transpose() *
                     Y * sys.H[static_cast<std::size_t>(j)];
    return W;
}

struct NewtonOutcome {
    Eigen::MatrixXd P;
    bool converged = false;
    int iterations = 0;
    std::vector<double> residual_trace;
    std::string failure;
};

/// Damped Newton for the Gramian-side form of the Riccati-type equation,
///   F(P) = A P + P A^T + P Pi(P^{-1}) P + B B^T = 0,
/// which is congruent to the X-equation via X = P^{-1} but numerically far
/// better behaved: at stiff Gramians the shifted drift A + B B^T X of the
/// X-side iteration is a highly non-normal similarity of -A^T whose
/// Lyapunov operator is near-singular in floating point, while the P-side
/// derivative stays as well conditioned as A itself. Each step solves one
/// n^2 x n^2 linearization and a line search halves the step until
/// ||F||_F decreases with P staying positive definite.
NewtonOutcome newton_gramian_side(const BilinearStochasticSystem& sys,
                                  const Eigen::MatrixXd& G,
                                  const Eigen::MatrixXd& P0,
                                  const ReachabilityOptions& opts) {
    const Eigen::Index n = P0.rows();
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    NewtonOutcome outcome;
    Eigen::MatrixXd P = P0;

    struct Evaluation {
        Eigen::MatrixXd Y; // P^{-1}
        Eigen::MatrixXd W; // Pi(P^{-1})
        Eigen::MatrixXd F;
        double res = 0.0;
        double scale = 0.0;
        bool ok = false;
    };
    const auto evaluate = [&](const Eigen::MatrixXd& cand) {
        Evaluation ev;
        Eigen::LLT<Eigen::MatrixXd> llt(cand);
        if (llt.info() != Eigen::Success) return ev;
        ev.Y = symmetrize(llt.solve(id));
        ev.W = coupling_adjoint(sys, ev.Y);
        const Eigen::MatrixXd sandwich = cand * ev.W * cand;
        ev.F = symmetrize(sys.A * cand + cand * sys.A.transpose() + sandwich + G);
        ev.res = ev.F.norm();
        ev.scale = std::max(1e-300, 2.0 * sys.A.norm() * cand.norm() +
                                        sandwich.norm() + G.norm());
        ev.ok = true;
        return ev;
    };

    Evaluation ev = evaluate(P);
    if (!ev.ok) {
        outcome.failure = "start value not positive definite";
        return outcome;
    }
    outcome.residual_trace.push_back(ev.res);

    while (outcome.iterations < opts.max_newton_iters) {
        if (ev.res <= opts.newton_tol * ev.scale) {
            outcome.converged = true;
            break;
        }
        ++outcome.iterations;

        // derivative: (A + P W) D + D (A + P W)^T - P Pi(Y D Y) P, where
        // the last term collapses to sums of M D M^T with M = P (.)^T Y
        const Eigen::MatrixXd shifted = sys.A + P * ev.W;
        Eigen::MatrixXd deriv = kron(id, shifted) + kron(shifted, id);
        for (const auto& Nk : sys.N) {
            const Eigen::MatrixXd M = P * Nk.transpose() * ev.Y;
            deriv -= kron(M, M);
        }
        const Eigen::Index v = sys.noise_dim();
        std::vector<Eigen::MatrixXd> MH;
        MH.reserve(static_cast<std::size_t>(v));
        for (Eigen::Index i = 0; i < v; ++i)
            MH.push_back(P * sys.H[static_cast<std::size_t>(i)].transpose() * ev.Y);
        for (Eigen::Index i = 0; i < v; ++i)
            for (Eigen::Index j = 0; j < v; ++j)
                if (sys.K(i, j) != 0.0)
                    deriv -= sys.K(i, j) *
                             kron(MH[static_cast<std::size_t>(j)],
                                  MH[static_cast<std::size_t>(i)]);

        Eigen::PartialPivLU<Eigen::MatrixXd> lu(deriv);
        if (!(lu.rcond() > opts.lyapunov.rcond_floor)) {
            outcome.failure = "Newton linearization numerically singular";
            break;
        }
        const Eigen::VectorXd rhs =
            -Eigen::Map<const Eigen::VectorXd>(ev.F.data(), n * n);
        const Eigen::VectorXd d = lu.solve(rhs);
        const Eigen::MatrixXd step =
            symmetrize(Eigen::Map<const Eigen::MatrixXd>(d.data(), n, n));

        double theta = 1.0;
        bool accepted = false;
        while (theta >= opts.min_step) {
            const Evaluation trial = evaluate(symmetrize(P + theta * step));
            if (trial.ok && trial.res < ev.res) {
                P = symmetrize(P + theta * step);
                ev = trial;
                accepted = true;
                break;
            }
            theta *= 0.5;
        }
        outcome.residual_trace.push_back(ev.res);
        if (!accepted) {
            // bottomed out on evaluation noise
            if (ev.res <= opts.stall_accept_tol * ev.scale)
                outcome.converged = true;
            else
                outcome.failure = "line search stalled (step underflow)";
            break;
        }
    }

    if (!outcome.converged) {
        if (outcome.failure.empty())
            outcome.failure = "iteration budget exhausted";
        return outcome;
    }
    outcome.P = P;
    return outcome;
}

} // namespace

double riccati_residual(const BilinearStochasticSystem& sys,
                        const Eigen::MatrixXd& X) {
    const Eigen::MatrixXd G = sys.B * sys.B.transpose();
    return riccati_operator(sys, G, X).norm() / riccati_scale(sys, G, X);
}

ReachabilityResult reachability_gramian(const BilinearStochasticSystem& sys,
                                        const ReachabilityOptions& opts) {
    require_valid(sys);
    check_dimension_cap(sys.state_dim(), opts.lyapunov);
    if (sys.B.norm() == 0.0)
        throw std::invalid_argument("reachability Gramian requires B != 0");

    StabilityOptions stab = opts.lyapunov.stability;
    stab.tol = opts.lyapunov.stability_tol;
    const StabilityReport report = is_mean_square_stable(sys, stab);
    if (!report.stable) {
        std::ostringstream msg;
        msg << "refusing to solve: system not mean-square stable "
            << "(spectral abscissa " << report.spectral_abscissa << ")";
        throw UnstableSystemError(msg.str());
    }

    const Eigen::Index n = sys.state_dim();
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd G = sys.B * sys.B.transpose();
    const double eps = opts.seed_shift >= 0.0 ? opts.seed_shift : 1e-6 * G.norm();

    // coupling-free start: the plain Lyapunov Gramian (the regularizer
    // keeps it SPD even for rank-deficient B B^T)
    Eigen::MatrixXd P;
    {
        const Eigen::MatrixXd kron_sum = kron(sys.A, id) + kron(id, sys.A);
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(kron_sum);
        if (!(lu.rcond() > opts.lyapunov.rcond_floor))
            throw SolverError("drift Lyapunov operator numerically singular");
        const Eigen::MatrixXd rhs = G + eps * id;
        const Eigen::VectorXd p = lu.solve(
            -Eigen::Map<const Eigen::VectorXd>(rhs.data(), n * n));
        P = symmetrize(Eigen::Map<const Eigen::MatrixXd>(p.data(), n, n));
    }

    ReachabilityResult result;
    const bool has_coupling = [&] {
        for (const auto& Nk : sys.N)
            if (Nk.norm() > 0.0) return true;
        for (const auto& Hi : sys.H)
            if (Hi.norm() > 0.0) return true;
        return false;
    }();

    // continuation in the coupling scale, bisecting on failure; with no
    // coupling a single Newton run polishes away the seed regularizer
    double tau_done = 0.0;
    double target = 1.0;
    int bisections = 0;
    bool done = false;
    while (!done) {
        const BilinearStochasticSystem stage =
            (has_coupling && target < 1.0) ? scaled_coupling(sys, target) : sys;
        const NewtonOutcome outcome = newton_gramian_side(stage, G, P, opts);
        result.total_newton_iterations += outcome.iterations;
        if (outcome.converged) {
            P = outcome.P;
            result.newton_iterations = outcome.iterations;
            result.residual_trace = outcome.residual_trace;
            if (target >= 1.0) {
                done = true;
            } else {
                tau_done = target;
                ++result.continuation_steps;
                target = 1.0;
            }
        } else {
            if (!has_coupling || ++bisections > opts.max_bisections) {
                std::ostringstream msg;
                msg << "reachability Gramian solve failed at coupling scale "
                    << target << ": " << outcome.failure;
                if (!outcome.residual_trace.empty())
                    msg << " (last residual " << outcome.residual_trace.back()
                        << ")";
                throw SolverError(msg.str());
            }
            target = 0.5 * (tau_done + target);
        }
    }

    result.P = P;
    Eigen::LLT<Eigen::MatrixXd> llt(P);
    if (llt.info() != Eigen::Success)
        throw SolverError("accepted Gramian not positive definite");
    result.X = symmetrize(llt.solve(id));
    result.residual = riccati_residual(sys, result.X);
    if ((result.P * result.X - id).norm() >
        1e-8 * static_cast<double>(n) *
            std::max(1.0, result.X.norm() * P.norm()))
        throw SolverError("P * X deviates from identity beyond tolerance");
    return result;
}

double psd_closure_check(const std::vector<Eigen::MatrixXd>& A_list,
                         const Eigen::MatrixXd& K) {
    if (static_cast<Eigen::Index>(A_list.size()) != K.rows() ||
        K.rows() != K.cols())
        throw std::invalid_argument("need one matrix per row of square K");
    if (A_list.empty()) return 0.0;
    const Eigen::Index d = A_list.front().cols();
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t i = 0; i < A_list.size(); ++i)
        for (std::size_t j = 0; j < A_list.size(); ++j) {
            const double kij = K(static_cast<Eigen::Index>(i),
                                 static_cast<Eigen::Index>(j));
            if (kij != 0.0)
                M += kij * A_list[i].transpose() * A_list[j];
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (M + M.transpose()));
    return eig.eigenvalues().minCoeff();
}

GramianPair compute_gramians(const BilinearStochasticSystem& sys,
                             const ReachabilityOptions& reach_opts,
                             const LyapunovOptions& lyap_opts) {
    GramianPair pair;
    const ReachabilityResult reach = reachability_gramian(sys, reach_opts);
    pair.P = reach.P;
    pair.X = reach.X;
    pair.newton_iterations = reach.newton_iterations;
    pair.residual_X = reach.residual;

    const ObservabilityResult obs = observability_gramian(sys, lyap_opts);
    if (!obs.positive_definite)
        throw SolverError("observability Gramian not positive definite; "
                          "balancing would be ill-posed");
    pair.Q = obs.Q;
    pair.residual_Q = obs.residual;
    return pair;
}

} // namespace sbmor
