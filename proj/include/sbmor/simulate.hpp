#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sbmor/control.hpp"
#include "sbmor/reduction.hpp"
#include "sbmor/rng.hpp"
#include "sbmor/system.hpp"

namespace sbmor {

/// Driving noise: Wiener part with covariance K_w plus an optional
/// mean-zero compound Poisson part; the total covariance per unit time is
/// K_w + rate * size_scale^2 * loading loading^T and must match the
/// system's K.
struct LevyProcessSpec {
    Eigen::MatrixXd wiener_covariance;

    struct Jump {
        double rate = 0.0; ///< expected jumps per unit time
        enum class SizeKind { TwoPoint, CenteredNormal } kind = SizeKind::TwoPoint;
        double size_scale = 1.0; ///< +-a for two-point, std dev for normal
        Eigen::MatrixXd loading; ///< v x q channel loading
    };
    std::optional<Jump> jump;

    static LevyProcessSpec pure_wiener(const Eigen::MatrixXd& K);
    /// Split K into (1 - share) Wiener + share compound-Poisson covariance.
    static LevyProcessSpec wiener_plus_jumps(const Eigen::MatrixXd& K,
                                             double jump_share, double rate,
                                             Jump::SizeKind kind);

    Eigen::Index noise_dim() const { return wiener_covariance.rows(); }
    Eigen::MatrixXd total_covariance() const;
    /// Throws if K_w is not PSD or the jump covariance exceeds K.
    void validate_against(const Eigen::MatrixXd& K) const;
};

struct SimConfig {
    double horizon = 1.0;
    double dt = 1e-3;
    int n_paths = 1;
    std::uint64_t seed = 0;

    /// Number of Euler-Maruyama steps; requires horizon/dt integral
    /// within rounding.
    Eigen::Index steps() const;
};

/// Per-path, per-step noise increments, [path][step][channel] row-major.
struct IncrementTensor {
    int n_paths = 0;
    Eigen::Index steps = 0;
    Eigen::Index v = 0;
    std::vector<double> data;

    double at(int path, Eigen::Index step, Eigen::Index channel) const {
        return data[static_cast<std::size_t>(
            (static_cast<Eigen::Index>(path) * steps + step) * v + channel)];
    }
    std::uint64_t checksum() const; ///< FNV-1a over the raw bytes
};

/// Draws the increment of one (path, step) cell straight from the counter
/// stream; sample_increments and the streaming simulators share this path,
/// so their numbers are bitwise identical.
class IncrementSampler {
  public:
    IncrementSampler(const LevyProcessSpec& spec, double dt,
                     std::uint64_t seed);
    void sample(std::uint64_t path, std::uint64_t step,
                Eigen::VectorXd& out) const;
    Eigen::Index noise_dim() const { return v_; }

  private:
    CounterRng rng_;
    Eigen::Index v_ = 0;
    double sqrt_dt_ = 0.0;
    Eigen::MatrixXd wiener_factor_; // lower Cholesky-like factor of K_w
    std::optional<LevyProcessSpec::Jump> jump_;
    double jump_intensity_ = 0.0; // rate * dt
};

IncrementTensor sample_increments(const LevyProcessSpec& spec, double dt,
                                  Eigen::Index steps, int n_paths,
                                  std::uint64_t seed);

struct TrajectoryBatch {
    Eigen::VectorXd time;
    std::vector<Eigen::MatrixXd> outputs; ///< per path, (steps+1) x p
    std::vector<Eigen::MatrixXd> states;  ///< optional, (steps+1) x n
};

struct ErrorEstimate {
    double mc_mean_sq = 0.0; ///< estimate of E ||y - y_r||^2_{L2}
    double std_error = 0.0;  ///< standard error of the mean-square estimate
    double root = 0.0;       ///< sqrt(mc_mean_sq)
    int n_paths = 0;

    /// Delta-method standard error on the root scale.
    double root_std_error() const {
        return root > 0.0 ? std_error / (2.0 * root) : 0.0;
    }
};

/// One Euler-Maruyama model in the common form
///   dx = [A x + B u + sum_k (N_k x + E_k u) u_k] dt
///        + sum_i (H_i x + F_i u) dM_i,   y = C x + D u,
/// covering both the full system (D = E = F = 0) and the SPA model.
/// State-dependent terms are evaluated at the pre-step state, realizing
/// the left limit x(t-).
class ModelStepper {
  public:
    static ModelStepper from_system(const BilinearStochasticSystem& sys);
    static ModelStepper from_rom(const ReducedModel& rom);

    Eigen::Index state_dim() const { return A_.rows(); }
    Eigen::Index output_dim() const { return C_.rows(); }
    Eigen::Index input_dim() const { return B_.cols(); }
    Eigen::Index noise_dim() const { return static_cast<Eigen::Index>(H_.size()); }

    void step(Eigen::VectorXd& x, const Eigen::VectorXd& u, double dt,
              const Eigen::VectorXd& dM) const;
    Eigen::VectorXd output(const Eigen::VectorXd& x,
                           const Eigen::VectorXd& u) const;

  private:
    Eigen::MatrixXd A_, B_, C_, D_;
    std::vector<Eigen::MatrixXd> N_, E_, H_, F_;
};

TrajectoryBatch simulate_full(const BilinearStochasticSystem& sys,
                              const ControlSignal& u,
                              const IncrementTensor& increments,
                              const SimConfig& sim,
                              const Eigen::VectorXd& x0 = {},
                              bool keep_states = false);

/// Same increments tensor as the paired full simulation couples the noise
/// pathwise.
TrajectoryBatch simulate_rom(const ReducedModel& rom, const ControlSignal& u,
                             const IncrementTensor& increments,
                             const SimConfig& sim,
                             const Eigen::VectorXd& x0 = {},
                             bool keep_states = false);

/// Trapezoid-rule L2 error between two output batches on matched grids.
ErrorEstimate l2_output_error(const TrajectoryBatch& y,
                              const TrajectoryBatch& y_r);

/// Steps every model along the same control and the same counter-based
/// noise stream, accumulating the per-path L2 output error for each
/// requested (i, j) model pair without storing trajectories. Paths are
/// accumulated in path order with compensated summation, so estimates are
/// reproducible to the last bit.
std::vector<ErrorEstimate>
coupled_output_errors(const std::vector<ModelStepper>& models,
                      const std::vector<std::pair<int, int>>& pairs,
                      const ControlSignal& u, const LevyProcessSpec& noise,
                      const SimConfig& sim);

/// Integrates the matrix second-moment flow
///   Pi' = A Pi + Pi A^T + sum_ij H_i Pi H_j^T k_ij,  Pi(0) = x0 x0^T,
/// by RK4 and compares trace(Pi) against the Monte-Carlo estimate of
/// E||x||^2 under zero control; returns
///   max_t |deviation| / (3 std_error + abs_tol).
double second_moment_ode_check(const BilinearStochasticSystem& sys,
                               const Eigen::VectorXd& x0, double T, double dt,
                               int n_paths, std::uint64_t seed,
                               double abs_tol = 1e-4);

/// One CSV file per path: header t,y1..yp, one row per grid point.
void write_trajectory_csv(const TrajectoryBatch& batch,
                          const std::string& path_prefix);

/// Compact binary block: magic "SBTB", u32 version, u64 n_paths, u64
/// n_samples, u64 p, then little-endian 64-bit floats row-major
/// [path][sample][component].
void write_trajectory_binary(const TrajectoryBatch& batch,
                             const std::string& filename);
TrajectoryBatch read_trajectory_binary(const std::string& filename);

} // namespace sbmor
