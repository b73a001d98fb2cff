#include "sbmor/reduction.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/LU>

#include "sbmor/errors.hpp"

namespace sbmor {

namespace {

Eigen::PartialPivLU<Eigen::MatrixXd>
factor_with_condition_check(const Eigen::MatrixXd& block, const char* name,
                            const ReductionOptions& opts, double* rcond_out) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(block);
    const double rcond = lu.rcond();
    if (rcond_out) *rcond_out = rcond;
    if (!(rcond > 1.0 / opts.condition_limit)) {
        std::ostringstream msg;
        msg << name << " is singular or ill-conditioned (condition estimate "
            << (rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity())
            << " exceeds limit " << opts.condition_limit << ")";
        throw SolverError(msg.str());
    }
    return lu;
}

ReducedModel full_order_model(const BalancedRealization& balanced) {
    const auto& sys = balanced.system;
    const Eigen::Index n = sys.state_dim();
    const Eigen::Index m = sys.input_dim();
    const Eigen::Index p = sys.output_dim();
    const Eigen::Index v = sys.noise_dim();
    ReducedModel rom;
    rom.r = n;
    rom.A = sys.A;
    rom.B = sys.B;
    rom.C = sys.C;
    rom.D = Eigen::MatrixXd::Zero(p, m);
    rom.N = sys.N;
    rom.H = sys.H;
    rom.K = sys.K;
    for (Eigen::Index k = 0; k < m; ++k)
        rom.E.push_back(Eigen::MatrixXd::Zero(n, m));
    for (Eigen::Index i = 0; i < v; ++i)
        rom.F.push_back(Eigen::MatrixXd::Zero(n, m));
    return rom;
}

} // namespace

ReducedModel spa_reduce(const BalancedRealization& balanced, Eigen::Index r,
                        const ReductionOptions& opts) {
    const Eigen::Index n = balanced.sigma.size();
    if (r == n) return full_order_model(balanced);

    const PartitionedSystem part = partition(balanced, r, opts.grouping_rel_tol);
    const auto lu = factor_with_condition_check(part.A22, "A22", opts, nullptr);
    const Eigen::MatrixXd A22inv_A21 = lu.solve(part.A21);
    const Eigen::MatrixXd A22inv_B2 = lu.solve(part.B2);

    ReducedModel rom;
    rom.r = r;
    rom.A = part.A11 - part.A12 * A22inv_A21;
    rom.B = part.B1 - part.A12 * A22inv_B2;
    rom.C = part.C1 - part.C2 * A22inv_A21;
    rom.D = -part.C2 * A22inv_B2;
    rom.K = balanced.system.K;
    for (std::size_t k = 0; k < part.N11.size(); ++k) {
        rom.N.push_back(part.N11[k] - part.N12[k] * A22inv_A21);
        rom.E.push_back(-part.N12[k] * A22inv_B2);
    }
    for (std::size_t i = 0; i < part.H11.size(); ++i) {
        rom.H.push_back(part.H11[i] - part.H12[i] * A22inv_A21);
        rom.F.push_back(-part.H12[i] * A22inv_B2);
    }

    if (!rom.A.allFinite() || !rom.B.allFinite() || !rom.C.allFinite() ||
        !rom.D.allFinite())
        throw SolverError("SPA produced non-finite coefficients");
    return rom;
}

NeighborForm assemble_neighbor_form(const BalancedRealization& balanced,
                                    Eigen::Index r_small, Eigen::Index r_big,
                                    const ReductionOptions& opts) {
    const Eigen::Index n = balanced.sigma.size();
    if (!(r_small >= 1 && r_small < r_big && r_big <= n))
        throw ReductionOrderError("need 1 <= r_small < r_big <= n");
    const HsvGrouping grouping =
        group_hsvs(balanced.sigma, opts.grouping_rel_tol);
    if (!grouping.is_cut(r_small) || !(r_big == n || grouping.is_cut(r_big)))
        throw ReductionOrderError("neighbor orders must be group boundaries");

    const auto& sys = balanced.system;
    const Eigen::Index sizes[3] = {r_small, r_big - r_small, n - r_big};
    const Eigen::Index offs[3] = {0, r_small, r_big};

    NeighborForm form;
    form.r_small = r_small;
    form.r_big = r_big;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j)
            form.A_blocks[i][j] =
                sys.A.block(offs[i], offs[j], sizes[i], sizes[j]);
        form.B_blocks[i] = sys.B.middleRows(offs[i], sizes[i]);
        form.C_blocks[i] = sys.C.middleCols(offs[i], sizes[i]);
    }
    for (const auto& Nk : sys.N)
        form.N_slab1.push_back(Nk.topRows(r_small));
    for (const auto& Hi : sys.H)
        form.H_slab1.push_back(Hi.topRows(r_small));

    form.A_hat = sys.A.topRows(r_big);
    form.B_hat = sys.B.topRows(r_big);
    for (const auto& Nk : sys.N) form.N_hat.push_back(Nk.topRows(r_big));
    for (const auto& Hi : sys.H) form.H_hat.push_back(Hi.topRows(r_big));

    form.A_hat_r = sys.A.topRows(r_small);
    for (const auto& Nk : sys.N) form.N_hat_r.push_back(Nk.topRows(r_small));
    for (const auto& Hi : sys.H) form.H_hat_r.push_back(Hi.topRows(r_small));

    // constraint map h = W^{-1} (A_{23,1} x_r + B_{23} u) with
    // W the trailing 2x2 block matrix of the finer partition
    const Eigen::Index tail = n - r_small;
    Eigen::MatrixXd W(tail, tail);
    W << form.A_blocks[1][1], form.A_blocks[1][2], form.A_blocks[2][1],
        form.A_blocks[2][2];
    const auto lu = factor_with_condition_check(
        W, "trailing 2x2 block matrix", opts, &form.block_rcond);

    Eigen::MatrixXd tail_state(tail, r_small);
    tail_state << form.A_blocks[1][0], form.A_blocks[2][0];
    Eigen::MatrixXd tail_input(tail, sys.input_dim());
    tail_input << form.B_blocks[1], form.B_blocks[2];
    form.h_state = lu.solve(tail_state);
    form.h_input = lu.solve(tail_input);
    return form;
}

double neighbor_equivalence_check(const BalancedRealization& balanced,
                                  Eigen::Index r,
                                  const ReductionOptions& opts) {
    const Eigen::Index n = balanced.sigma.size();
    if (r == n) return 0.0; // nothing eliminated

    const HsvGrouping grouping =
        group_hsvs(balanced.sigma, opts.grouping_rel_tol);
    if (!grouping.is_cut(r))
        throw ReductionOrderError("order is not a group boundary");
    Eigen::Index r_big = n;
    for (const auto cut : grouping.cut_indices)
        if (cut > r) { r_big = cut; break; }

    const NeighborForm form = assemble_neighbor_form(balanced, r, r_big, opts);
    const ReducedModel direct = spa_reduce(balanced, r, opts);

    // substitute (-h1, -h2) = -h_state x_r - h_input u into the smaller
    // neighbor model's slabs
    const auto eliminate = [&](const Eigen::MatrixXd& slab,
                               Eigen::MatrixXd& state_part,
                               Eigen::MatrixXd& input_part) {
        const Eigen::MatrixXd lead = slab.leftCols(form.r_small);
        const Eigen::MatrixXd tail = slab.rightCols(n - form.r_small);
        state_part = lead - tail * form.h_state;
        input_part = -tail * form.h_input;
    };

    double deviation = 0.0;
    Eigen::MatrixXd state_part, input_part;

    eliminate(form.A_hat_r, state_part, input_part);
    deviation = std::max(deviation, (state_part - direct.A).norm());
    // the smaller neighbor model keeps B1 u as a separate drift term
    deviation =
        std::max(deviation, (form.B_blocks[0] + input_part - direct.B).norm());

    Eigen::MatrixXd C_full(balanced.system.C.rows(), n);
    C_full << form.C_blocks[0], form.C_blocks[1], form.C_blocks[2];
    eliminate(C_full, state_part, input_part);
    deviation = std::max(deviation, (state_part - direct.C).norm());
    deviation = std::max(deviation, (input_part - direct.D).norm());

    for (std::size_t k = 0; k < form.N_hat_r.size(); ++k) {
        eliminate(form.N_hat_r[k], state_part, input_part);
        deviation = std::max(deviation, (state_part - direct.N[k]).norm());
        deviation = std::max(deviation, (input_part - direct.E[k]).norm());
    }
    for (std::size_t i = 0; i < form.H_hat_r.size(); ++i) {
        eliminate(form.H_hat_r[i], state_part, input_part);
        deviation = std::max(deviation, (state_part - direct.H[i]).norm());
        deviation = std::max(deviation, (input_part - direct.F[i]).norm());
    }
    return deviation;
}

std::vector<ReducedModel> spa_chain(const BalancedRealization& balanced,
                                    Eigen::Index r_final,
                                    const ReductionOptions& opts) {
    const HsvGrouping grouping =
        group_hsvs(balanced.sigma, opts.grouping_rel_tol);
    if (!grouping.is_cut(r_final))
        throw ReductionOrderError("r_final is not a group boundary");
    std::vector<ReducedModel> chain;
    for (const auto cut : grouping.cut_indices)
        if (cut >= r_final) chain.push_back(spa_reduce(balanced, cut, opts));
    return chain;
}

} // namespace sbmor
