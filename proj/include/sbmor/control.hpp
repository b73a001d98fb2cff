#pragma once

#include <vector>

#include <Eigen/Dense>

namespace sbmor {

/// Deterministic, square-integrable control signal on [0, T].
class ControlSignal {
  public:
    enum class Kind { Zero, Constant, Sinusoid, Table };

    static ControlSignal zero(Eigen::Index m, double horizon);
    static ControlSignal constant(const Eigen::VectorXd& amplitude,
                                  double horizon);
    /// u(t) = amplitude * sin(2 pi frequency t).
    static ControlSignal sinusoid(const Eigen::VectorXd& amplitude,
                                  double frequency, double horizon);
    /// Piecewise-constant: u(t) = values.row(i) for t in [times[i],
    /// times[i+1]); the last row extends to the horizon.
    static ControlSignal table(std::vector<double> times,
                               Eigen::MatrixXd values, double horizon);

    Kind kind() const { return kind_; }
    Eigen::Index dim() const { return dim_; }
    double horizon() const { return horizon_; }
    double frequency() const { return frequency_; }
    const Eigen::VectorXd& amplitude() const { return amplitude_; }
    const std::vector<double>& table_times() const { return times_; }
    const Eigen::MatrixXd& table_values() const { return values_; }

    Eigen::VectorXd value(double t) const;

  private:
    Kind kind_ = Kind::Zero;
    Eigen::Index dim_ = 0;
    double horizon_ = 0.0;
    Eigen::VectorXd amplitude_;
    double frequency_ = 0.0;
    std::vector<double> times_;
    Eigen::MatrixXd values_; // one row per table segment

    friend struct ControlAccess;
};

/// L2 norm of u on [0, T]: composite trapezoid on a uniform grid of spacing
/// quadrature_dt (error O(dt^2) for smooth signals). Piecewise-constant
/// tables are integrated segment-exactly.
double control_l2_norm(const ControlSignal& u, double T, double quadrature_dt);

/// Same quadrature with components zeroed where mask[k] == false.
double masked_control_l2_norm(const ControlSignal& u,
                              const std::vector<bool>& mask, double T,
                              double quadrature_dt);

} // namespace sbmor
