#pragma once

#include <stdexcept>
#include <string>

namespace sbmor {

/// Input data violates a type invariant (dimensions, PSD-ness, finiteness).
struct InvalidSystemError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The mean-square stability condition does not hold.
struct UnstableSystemError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A numerical solver failed (singular system, non-convergence, lost PD-ness).
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Requested reduction order is not a Hankel-group boundary or out of range.
struct ReductionOrderError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// State dimension exceeds the dense Kronecker solver cap.
struct DimensionCapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// File / parse problems on manifests, matrices, CSV tables.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A simulated path left the finite range (blow-up).
struct SimulationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace sbmor
