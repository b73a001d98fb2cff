#include "sbmor/balancing.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "sbmor/errors.hpp"

namespace sbmor {

namespace {

Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& M, const char* name,
                                const BalanceOptions& opts) {
    const Eigen::MatrixXd sym = 0.5 * (M + M.transpose());
    Eigen::LLT<Eigen::MatrixXd> llt(sym);
    if (llt.info() == Eigen::Success)
        return llt.matrixL();
    const double jitter =
        opts.cholesky_jitter_rel * sym.trace() / static_cast<double>(sym.rows());
    llt.compute(sym + jitter * Eigen::MatrixXd::Identity(sym.rows(), sym.cols()));
    if (llt.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << name << " is not positive definite (Cholesky failed even with "
            << "jitter " << jitter << ")";
        throw SolverError(msg.str());
    }
    return llt.matrixL();
}

} // namespace

BalancedRealization balance(const BilinearStochasticSystem& sys,
                            const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q,
                            const BalanceOptions& opts) {
    require_valid(sys);
    const Eigen::Index n = sys.state_dim();
    if (P.rows() != n || P.cols() != n || Q.rows() != n || Q.cols() != n)
        throw std::invalid_argument("Gramian dimensions differ from state dimension");

    const Eigen::MatrixXd Lp = cholesky_factor(P, "reachability Gramian", opts);
    const Eigen::MatrixXd Lq = cholesky_factor(Q, "observability Gramian", opts);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Lq.transpose() * Lp,
                                          Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::MatrixXd U = svd.matrixU();
    Eigen::MatrixXd V = svd.matrixV();
    const Eigen::VectorXd sigma = svd.singularValues();

    if (sigma(n - 1) < opts.sigma_floor_rel * sigma(0)) {
        std::ostringstream msg;
        msg << "Hankel value " << n << " (" << sigma(n - 1)
            << ") is below the floor " << opts.sigma_floor_rel * sigma(0)
            << "; realization is numerically non-minimal";
        throw SolverError(msg.str());
    }

    // deterministic sign convention: first nonzero entry of each left
    // singular vector positive
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            if (U(i, j) != 0.0) {
                if (U(i, j) < 0.0) {
                    U.col(j) = -U.col(j);
                    V.col(j) = -V.col(j);
                }
                break;
            }
        }
    }

    const Eigen::ArrayXd inv_sqrt = sigma.array().sqrt().inverse();
    BalancedRealization out;
    out.sigma = sigma;
    out.S = inv_sqrt.matrix().asDiagonal() * U.transpose() * Lq.transpose();
    out.S_inv = Lp * V * inv_sqrt.matrix().asDiagonal();

    out.system.A = out.S * sys.A * out.S_inv;
    out.system.B = out.S * sys.B;
    out.system.C = sys.C * out.S_inv;
    out.system.K = sys.K;
    out.system.N.reserve(sys.N.size());
    for (const auto& Nk : sys.N) out.system.N.push_back(out.S * Nk * out.S_inv);
    out.system.H.reserve(sys.H.size());
    for (const auto& Hi : sys.H) out.system.H.push_back(out.S * Hi * out.S_inv);
    return out;
}

bool HsvGrouping::is_cut(Eigen::Index r) const {
    return std::find(cut_indices.begin(), cut_indices.end(), r) !=
           cut_indices.end();
}

std::size_t HsvGrouping::first_truncated_group(Eigen::Index r) const {
    Eigen::Index acc = 0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (acc == r) return g;
        acc += groups[g].count;
    }
    return groups.size(); // r == n: nothing truncated
}

HsvGrouping group_hsvs(const Eigen::VectorXd& sigma, double rel_tol) {
    if (sigma.size() == 0)
        throw std::invalid_argument("empty HSV vector");
    if (rel_tol < 0.0)
        throw std::invalid_argument("grouping tolerance must be >= 0");
    for (Eigen::Index i = 0; i + 1 < sigma.size(); ++i)
        if (sigma(i) < sigma(i + 1))
            throw std::invalid_argument("HSVs must be non-increasing");
    if (sigma.minCoeff() <= 0.0)
        throw std::invalid_argument("HSVs must be positive");

    const double gap = rel_tol * sigma(0);
    HsvGrouping grouping;
    Eigen::Index start = 0;
    for (Eigen::Index i = 1; i <= sigma.size(); ++i) {
        if (i == sigma.size() || sigma(i - 1) - sigma(i) > gap) {
            HsvGroup group;
            group.count = i - start;
            group.value = sigma.segment(start, group.count).mean();
            for (Eigen::Index j = start; j < i; ++j)
                group.spread = std::max(
                    group.spread, std::abs(sigma(j) - group.value) / sigma(0));
            grouping.groups.push_back(group);
            if (i < sigma.size()) grouping.cut_indices.push_back(i);
            start = i;
        }
    }
    return grouping;
}

PartitionedSystem partition(const BalancedRealization& balanced,
                            Eigen::Index r, double grouping_rel_tol) {
    const Eigen::Index n = balanced.sigma.size();
    if (r < 1 || r >= n)
        throw ReductionOrderError("reduction order must satisfy 1 <= r < n");
    const HsvGrouping grouping = group_hsvs(balanced.sigma, grouping_rel_tol);
    if (!grouping.is_cut(r)) {
        std::ostringstream msg;
        msg << "order " << r << " splits a repeated Hankel value; admissible "
            << "orders:";
        for (const auto c : grouping.cut_indices) msg << " " << c;
        throw ReductionOrderError(msg.str());
    }

    const Eigen::Index s = n - r;
    const auto& sys = balanced.system;
    PartitionedSystem part;
    part.r = r;
    part.A11 = sys.A.topLeftCorner(r, r);
    part.A12 = sys.A.topRightCorner(r, s);
    part.A21 = sys.A.bottomLeftCorner(s, r);
    part.A22 = sys.A.bottomRightCorner(s, s);
    part.B1 = sys.B.topRows(r);
    part.B2 = sys.B.bottomRows(s);
    part.C1 = sys.C.leftCols(r);
    part.C2 = sys.C.rightCols(s);
    for (const auto& Nk : sys.N) {
        part.N11.push_back(Nk.topLeftCorner(r, r));
        part.N12.push_back(Nk.topRightCorner(r, s));
        part.N21.push_back(Nk.bottomLeftCorner(s, r));
        part.N22.push_back(Nk.bottomRightCorner(s, s));
    }
    for (const auto& Hi : sys.H) {
        part.H11.push_back(Hi.topLeftCorner(r, r));
        part.H12.push_back(Hi.topRightCorner(r, s));
        part.H21.push_back(Hi.bottomLeftCorner(s, r));
        part.H22.push_back(Hi.bottomRightCorner(s, s));
    }
    part.sigma1 = balanced.sigma.head(r);
    part.sigma2 = balanced.sigma.tail(s);
    return part;
}

} // namespace sbmor
