#pragma once

#include <cstdint>

#include "sbmor/system.hpp"

namespace sbmor {

struct GeneratorOptions {
    /// Zero out the bilinear coupling (linear stochastic special case).
    bool zero_bilinear = false;
    /// Maximum number of noise-scale halvings before giving up.
    int max_halvings = 60;
};

/// Deterministic-in-seed random stable test system. Dense standard-normal
/// A0, B, C, N_k, H_i; the drift is shifted to A = A0 - alpha I and the
/// coupling matrices are rescaled by a common factor rho, halved until the
/// closure abscissa is at most -stability_margin.
BilinearStochasticSystem
generate_test_system(Eigen::Index n, Eigen::Index m, Eigen::Index p,
                     Eigen::Index v, std::uint64_t seed,
                     double stability_margin,
                     const GeneratorOptions& opts = {});

} // namespace sbmor
