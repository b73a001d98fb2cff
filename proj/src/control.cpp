#include "sbmor/control.hpp"

#include <algorithm>
#include <cmath>

#include "sbmor/errors.hpp"

namespace sbmor {

namespace {
constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
}

ControlSignal ControlSignal::zero(Eigen::Index m, double horizon) {
    ControlSignal u;
    u.kind_ = Kind::Zero;
    u.dim_ = m;
    u.horizon_ = horizon;
    return u;
}

ControlSignal ControlSignal::constant(const Eigen::VectorXd& amplitude,
                                      double horizon) {
    ControlSignal u;
    u.kind_ = Kind::Constant;
    u.dim_ = amplitude.size();
    u.amplitude_ = amplitude;
    u.horizon_ = horizon;
    return u;
}

ControlSignal ControlSignal::sinusoid(const Eigen::VectorXd& amplitude,
                                      double frequency, double horizon) {
    ControlSignal u;
    u.kind_ = Kind::Sinusoid;
    u.dim_ = amplitude.size();
    u.amplitude_ = amplitude;
    u.frequency_ = frequency;
    u.horizon_ = horizon;
    return u;
}

ControlSignal ControlSignal::table(std::vector<double> times,
                                   Eigen::MatrixXd values, double horizon) {
    if (times.empty() || static_cast<Eigen::Index>(times.size()) != values.rows())
        throw IoError("control table: need one sample row per time point");
    if (!std::is_sorted(times.begin(), times.end()))
        throw IoError("control table: times must be ascending");
    ControlSignal u;
    u.kind_ = Kind::Table;
    u.dim_ = values.cols();
    u.times_ = std::move(times);
    u.values_ = std::move(values);
    u.horizon_ = horizon;
    return u;
}

Eigen::VectorXd ControlSignal::value(double t) const {
    switch (kind_) {
    case Kind::Zero:
        return Eigen::VectorXd::Zero(dim_);
    case Kind::Constant:
        return amplitude_;
    case Kind::Sinusoid:
        return amplitude_ * std::sin(kTwoPi * frequency_ * t);
    case Kind::Table: {
        // right-continuous step function; clamp before the first breakpoint
        auto it = std::upper_bound(times_.begin(), times_.end(), t);
        const auto idx =
            it == times_.begin() ? 0 : static_cast<Eigen::Index>(it - times_.begin()) - 1;
        return values_.row(idx).transpose();
    }
    }
    return Eigen::VectorXd::Zero(dim_);
}

namespace {

double table_l2_sq(const ControlSignal& u, double T) {
    const auto& times = u.table_times();
    const auto& values = u.table_values();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        const double lo = std::min(std::max(times[static_cast<std::size_t>(i)], 0.0), T);
        const double hi =
            (i + 1 < values.rows())
                ? std::min(std::max(times[static_cast<std::size_t>(i) + 1], 0.0), T)
                : T;
        if (hi > lo) acc += values.row(i).squaredNorm() * (hi - lo);
    }
    return acc;
}

} // namespace

double control_l2_norm(const ControlSignal& u, double T, double quadrature_dt) {
    if (quadrature_dt <= 0.0)
        throw std::invalid_argument("quadrature_dt must be positive");
    if (T <= 0.0) return 0.0;
    if (u.kind() == ControlSignal::Kind::Zero) return 0.0;
    if (u.kind() == ControlSignal::Kind::Table)
        return std::sqrt(table_l2_sq(u, T));

    const auto steps = static_cast<std::size_t>(std::ceil(T / quadrature_dt));
    const double dt = T / static_cast<double>(steps);
    double acc = 0.5 * (u.value(0.0).squaredNorm() + u.value(T).squaredNorm());
    for (std::size_t j = 1; j < steps; ++j)
        acc += u.value(static_cast<double>(j) * dt).squaredNorm();
    return std::sqrt(acc * dt);
}

double masked_control_l2_norm(const ControlSignal& u,
                              const std::vector<bool>& mask, double T,
                              double quadrature_dt) {
    if (quadrature_dt <= 0.0)
        throw std::invalid_argument("quadrature_dt must be positive");
    if (static_cast<Eigen::Index>(mask.size()) != u.dim())
        throw std::invalid_argument("mask length differs from control dimension");
    if (T <= 0.0) return 0.0;

    const auto masked_sq = [&](double t) {
        const Eigen::VectorXd v = u.value(t);
        double s = 0.0;
        for (Eigen::Index k = 0; k < v.size(); ++k)
            if (mask[static_cast<std::size_t>(k)]) s += v[k] * v[k];
        return s;
    };

    if (u.kind() == ControlSignal::Kind::Table) {
        const auto& times = u.table_times();
        const auto& values = u.table_values();
        double acc = 0.0;
        for (Eigen::Index i = 0; i < values.rows(); ++i) {
            const double lo = std::min(std::max(times[static_cast<std::size_t>(i)], 0.0), T);
            const double hi =
                (i + 1 < values.rows())
                    ? std::min(std::max(times[static_cast<std::size_t>(i) + 1], 0.0), T)
                    : T;
            if (hi <= lo) continue;
            double s = 0.0;
            for (Eigen::Index k = 0; k < values.cols(); ++k)
                if (mask[static_cast<std::size_t>(k)]) s += values(i, k) * values(i, k);
            acc += s * (hi - lo);
        }
        return std::sqrt(acc);
    }

    const auto steps = static_cast<std::size_t>(std::ceil(T / quadrature_dt));
    const double dt = T / static_cast<double>(steps);
    double acc = 0.5 * (masked_sq(0.0) + masked_sq(T));
    for (std::size_t j = 1; j < steps; ++j)
        acc += masked_sq(static_cast<double>(j) * dt);
    return std::sqrt(acc * dt);
}

} // namespace sbmor
