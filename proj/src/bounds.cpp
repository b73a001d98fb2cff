#include "sbmor/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "sbmor/errors.hpp"
#include "sbmor/reduction.hpp"

namespace sbmor {

std::vector<bool> u0_mask(const BilinearStochasticSystem& sys,
                          double zero_tol) {
    const double scale = sys.A.norm();
    std::vector<bool> mask;
    mask.reserve(sys.N.size());
    for (const auto& Nk : sys.N)
        mask.push_back(Nk.norm() > zero_tol * scale);
    return mask;
}

ErrorBound error_bound(const std::vector<double>& truncated_distinct_hsvs,
                       double u_norm, double u0_norm) {
    if (u_norm < 0.0 || u0_norm < 0.0)
        throw std::invalid_argument("control norms must be >= 0");
    const double factor = std::exp(0.5 * u0_norm * u0_norm);
    ErrorBound bound;
    bound.per_step.reserve(truncated_distinct_hsvs.size());
    for (const double value : truncated_distinct_hsvs) {
        if (value < 0.0)
            throw std::invalid_argument("HSVs must be >= 0");
        bound.per_step.push_back(2.0 * value * u_norm * factor);
    }
    for (const double step : bound.per_step) bound.total += step;
    return bound;
}

std::string to_string(Verdict verdict) {
    switch (verdict) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
    }
    return "INCONCLUSIVE";
}

namespace {

Verdict classify(const ErrorEstimate& mc, double bound,
                 const VerifyOptions& opts) {
    if (mc.n_paths < 2) return Verdict::Inconclusive;
    const double se_root = mc.root_std_error();
    if (se_root > opts.inconclusive_ratio * std::max(mc.root, bound) &&
        mc.root > opts.pass_abs_tol)
        return Verdict::Inconclusive;
    return mc.root - 3.0 * se_root <= bound + opts.pass_abs_tol
               ? Verdict::Pass
               : Verdict::Fail;
}

std::string describe_control(const ControlSignal& u) {
    std::ostringstream out;
    out.precision(17);
    switch (u.kind()) {
    case ControlSignal::Kind::Zero:
        out << "zero(m=" << u.dim() << ")";
        break;
    case ControlSignal::Kind::Constant:
        out << "constant(";
        for (Eigen::Index k = 0; k < u.amplitude().size(); ++k)
            out << (k ? "," : "") << u.amplitude()(k);
        out << ")";
        break;
    case ControlSignal::Kind::Sinusoid:
        out << "sinusoid(f=" << u.frequency() << ";";
        for (Eigen::Index k = 0; k < u.amplitude().size(); ++k)
            out << (k ? "," : "") << u.amplitude()(k);
        out << ")";
        break;
    case ControlSignal::Kind::Table:
        out << "table(" << u.table_times().size() << " rows)";
        break;
    }
    return out.str();
}

} // namespace

BoundReport verify_bound(const BalancedRealization& balanced, Eigen::Index r,
                         const ControlSignal& control,
                         const LevyProcessSpec& noise,
                         const VerifyOptions& opts) {
    const Eigen::Index n = balanced.sigma.size();
    const HsvGrouping grouping =
        group_hsvs(balanced.sigma, opts.grouping_rel_tol);
    if (r != n && !grouping.is_cut(r)) {
        std::ostringstream msg;
        msg << "order " << r << " splits a repeated Hankel value; admissible:";
        for (const auto c : grouping.cut_indices) msg << " " << c;
        msg << " " << n;
        throw ReductionOrderError(msg.str());
    }
    noise.validate_against(balanced.system.K);
    if (control.dim() != balanced.system.input_dim())
        throw std::invalid_argument("control dimension mismatch");

    BoundReport report;
    report.full_order = n;
    report.reduced_order = r;
    report.hsvs.assign(balanced.sigma.data(), balanced.sigma.data() + n);
    report.mask = u0_mask(balanced.system, opts.zero_tol);
    report.seed = opts.sim.seed;
    report.horizon = opts.sim.horizon;
    report.dt = opts.sim.dt;
    report.n_paths = opts.sim.n_paths;
    report.control_description = describe_control(control);

    const double T = opts.sim.horizon;
    report.u_norm = control_l2_norm(control, T, opts.sim.dt);
    report.u0_norm = masked_control_l2_norm(control, report.mask, T, opts.sim.dt);
    report.exp_factor = std::exp(0.5 * report.u0_norm * report.u0_norm);

    const std::size_t g0 = grouping.first_truncated_group(r);
    for (std::size_t g = g0; g < grouping.groups.size(); ++g) {
        report.truncated_values.push_back(grouping.groups[g].value);
        report.truncated_multiplicities.push_back(grouping.groups[g].count);
        if (grouping.groups[g].spread > opts.merge_flag_rel)
            report.merged_near_ties = true;
    }
    const ErrorBound bound =
        error_bound(report.truncated_values, report.u_norm, report.u0_norm);
    report.total_bound = bound.total;

    // models: index 0 the balanced full system, then the SPA chain at every
    // group boundary >= r, ascending
    std::vector<Eigen::Index> chain_orders;
    for (const auto cut : grouping.cut_indices)
        if (cut >= r) chain_orders.push_back(cut);
    if (r == n) chain_orders.push_back(n);

    std::vector<ModelStepper> models;
    models.push_back(ModelStepper::from_system(balanced.system));
    for (const auto order : chain_orders)
        models.push_back(
            ModelStepper::from_rom(spa_reduce(balanced, order, opts.reduction)));

    // pair 0: full vs the target order; then the stepwise chain from the
    // full model downward
    std::vector<std::pair<int, int>> pairs;
    pairs.emplace_back(0, 1);
    const int top = static_cast<int>(chain_orders.size());
    if (r != n) {
        pairs.emplace_back(0, top); // removes the smallest distinct HSV
        for (int i = top; i > 1; --i) pairs.emplace_back(i, i - 1);
    }

    const std::vector<ErrorEstimate> estimates =
        coupled_output_errors(models, pairs, control, noise, opts.sim);
    report.mc = estimates[0];

    if (r != n) {
        // chain pairs map onto the truncated groups from the smallest
        // distinct value (last group) back to group g0
        const std::size_t n_steps = report.truncated_values.size();
        for (std::size_t s = 0; s < n_steps; ++s) {
            const std::size_t g = grouping.groups.size() - 1 - s;
            BoundStep step;
            step.removed_value = grouping.groups[g].value;
            step.multiplicity = grouping.groups[g].count;
            step.order_from =
                (s == 0) ? n : chain_orders[chain_orders.size() - s];
            step.order_to = chain_orders[chain_orders.size() - 1 - s];
            step.bound = bound.per_step[g - g0];
            step.mc = estimates[1 + s];
            step.pass = classify(step.mc, step.bound, opts) != Verdict::Fail;
            report.steps.push_back(step);
        }
    }

    report.verdict = classify(report.mc, report.total_bound, opts);
    if (report.verdict == Verdict::Pass)
        for (const auto& step : report.steps)
            if (!step.pass) report.verdict = Verdict::Fail;
    report.slack = report.total_bound - report.mc.root;
    return report;
}

BoundReport verify_bound(const BilinearStochasticSystem& sys, Eigen::Index r,
                         const ControlSignal& control,
                         const LevyProcessSpec& noise,
                         const VerifyOptions& opts) {
    require_valid(sys);
    const GramianPair gramians =
        compute_gramians(sys, opts.reachability, opts.lyapunov);
    const BalancedRealization balanced = balance(sys, gramians.P, gramians.Q);
    return verify_bound(balanced, r, control, noise, opts);
}

std::string BoundReport::to_json(int indent) const {
    nlohmann::ordered_json j;
    j["full_order"] = full_order;
    j["reduced_order"] = reduced_order;
    j["hsvs"] = hsvs;
    j["truncated_values"] = truncated_values;
    j["truncated_multiplicities"] = truncated_multiplicities;
    j["u0_mask"] = mask;
    j["u_norm"] = u_norm;
    j["u0_norm"] = u0_norm;
    j["exp_factor"] = exp_factor;
    j["total_bound"] = total_bound;
    j["mc"] = {{"mean_sq", mc.mc_mean_sq},
               {"std_error", mc.std_error},
               {"root", mc.root},
               {"root_std_error", mc.root_std_error()},
               {"n_paths", mc.n_paths}};
    j["slack"] = slack;
    j["verdict"] = to_string(verdict);
    j["merged_near_ties"] = merged_near_ties;
    nlohmann::ordered_json steps_json = nlohmann::ordered_json::array();
    for (const auto& step : steps) {
        nlohmann::ordered_json s;
        s["removed_value"] = step.removed_value;
        s["multiplicity"] = step.multiplicity;
        s["order_from"] = step.order_from;
        s["order_to"] = step.order_to;
        s["bound"] = step.bound;
        s["mc_root"] = step.mc.root;
        s["mc_root_std_error"] = step.mc.root_std_error();
        s["pass"] = step.pass;
        steps_json.push_back(s);
    }
    j["steps"] = steps_json;
    j["sim"] = {{"horizon", horizon},
                {"dt", dt},
                {"n_paths", n_paths},
                {"seed", seed}};
    j["control"] = control_description;
    return j.dump(indent);
}

} // namespace sbmor
