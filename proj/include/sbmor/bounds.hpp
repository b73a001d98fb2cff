#pragma once

#include <string>
#include <vector>

#include "sbmor/balancing.hpp"
#include "sbmor/gramians.hpp"
#include "sbmor/simulate.hpp"
#include "sbmor/system.hpp"

namespace sbmor {

/// mask_k = true iff ||N_k||_F > zero_tol * ||A||_F. Components with a
/// structurally zero bilinear coupling drop out of the exponential factor.
std::vector<bool> u0_mask(const BilinearStochasticSystem& sys,
                          double zero_tol = 1e-14);

struct ErrorBound {
    double total = 0.0;
    std::vector<double> per_step; ///< one per distinct truncated HSV
};

/// Theoretical L2 output-error bound
///   per_step_i = 2 sigma_i ||u|| exp(0.5 ||u0||^2),   total = sum_i,
/// over the distinct truncated HSVs (each distinct value counts once
/// regardless of multiplicity). With no bilinear coupling the exponential
/// factor is exactly one.
ErrorBound error_bound(const std::vector<double>& truncated_distinct_hsvs,
                       double u_norm, double u0_norm);

enum class Verdict { Pass, Fail, Inconclusive };
std::string to_string(Verdict verdict);

struct BoundStep {
    double removed_value = 0.0; ///< distinct HSV removed in this step
    Eigen::Index multiplicity = 0;
    Eigen::Index order_from = 0;
    Eigen::Index order_to = 0;
    double bound = 0.0;
    ErrorEstimate mc;
    bool pass = false;
};

struct BoundReport {
    Eigen::Index full_order = 0;
    Eigen::Index reduced_order = 0;
    std::vector<double> truncated_values; ///< distinct, descending
    std::vector<Eigen::Index> truncated_multiplicities;
    std::vector<double> hsvs;
    std::vector<bool> mask; ///< u0 mask per input
    double u_norm = 0.0;
    double u0_norm = 0.0;
    double exp_factor = 1.0;
    double total_bound = 0.0;
    std::vector<BoundStep> steps; ///< ordered from the full model downward
    ErrorEstimate mc;             ///< full model vs final reduced model
    Verdict verdict = Verdict::Inconclusive;
    double slack = 0.0; ///< total_bound - mc.root
    bool merged_near_ties = false; ///< any group merge radius > 1e-10 relative
    std::uint64_t seed = 0;
    double horizon = 0.0;
    double dt = 0.0;
    int n_paths = 0;
    std::string control_description;

    std::string to_json(int indent = 2) const; ///< deterministic field order
};

struct VerifyOptions {
    SimConfig sim;
    double grouping_rel_tol = 1e-8;
    double zero_tol = 1e-14;
    /// One-sided 3-sigma rule: PASS iff root - 3 se_root <= bound + this
    /// absolute slack (covers the exact r = n case where both sides are
    /// zero up to rounding).
    double pass_abs_tol = 1e-9;
    /// Declare the comparison powerless when se_root exceeds this fraction
    /// of max(root, bound).
    double inconclusive_ratio = 0.5;
    double merge_flag_rel = 1e-10;
    ReachabilityOptions reachability{};
    LyapunovOptions lyapunov{};
    ReductionOptions reduction{};
};

/// Full pipeline: Gramians -> balancing -> SPA at r -> coupled Monte
/// Carlo -> bound comparison, including one row per stepwise reduction
/// (neighboring model pairs share the noise stream with the full model).
BoundReport verify_bound(const BilinearStochasticSystem& sys, Eigen::Index r,
                         const ControlSignal& control,
                         const LevyProcessSpec& noise,
                         const VerifyOptions& opts);

/// Same pipeline on an already balanced realization (saves the Gramian
/// solve when the caller has one).
BoundReport verify_bound(const BalancedRealization& balanced, Eigen::Index r,
                         const ControlSignal& control,
                         const LevyProcessSpec& noise,
                         const VerifyOptions& opts);

} // namespace sbmor
