#include "sbmor/simulate.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "sbmor/errors.hpp"
#include "sbmor/stability.hpp"

namespace sbmor {

namespace {

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& M, const char* name) {
    if (M.size() == 0) return Eigen::MatrixXd(M.rows(), M.cols());
    const Eigen::MatrixXd sym = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    const double floor = -1e-12 * std::max(1.0, sym.norm());
    if (eig.eigenvalues().minCoeff() < floor)
        throw InvalidSystemError(std::string(name) + " is not PSD");
    const Eigen::ArrayXd clipped = eig.eigenvalues().array().max(0.0);
    return eig.eigenvectors() * clipped.sqrt().matrix().asDiagonal();
}

} // namespace

LevyProcessSpec LevyProcessSpec::pure_wiener(const Eigen::MatrixXd& K) {
    LevyProcessSpec spec;
    spec.wiener_covariance = K;
    return spec;
}

LevyProcessSpec LevyProcessSpec::wiener_plus_jumps(const Eigen::MatrixXd& K,
                                                   double jump_share,
                                                   double rate,
                                                   Jump::SizeKind kind) {
    if (!(jump_share >= 0.0 && jump_share < 1.0))
        throw std::invalid_argument("jump share must lie in [0, 1)");
    if (rate <= 0.0)
        throw std::invalid_argument("jump rate must be positive");
    LevyProcessSpec spec;
    spec.wiener_covariance = (1.0 - jump_share) * K;
    if (jump_share > 0.0) {
        Jump jump;
        jump.rate = rate;
        jump.kind = kind;
        jump.size_scale = 1.0;
        jump.loading = psd_factor(jump_share * K, "jump covariance") /
                       std::sqrt(rate);
        spec.jump = jump;
    }
    return spec;
}

Eigen::MatrixXd LevyProcessSpec::total_covariance() const {
    Eigen::MatrixXd K = wiener_covariance;
    if (jump)
        K += jump->rate * jump->size_scale * jump->size_scale *
             jump->loading * jump->loading.transpose();
    return K;
}

void LevyProcessSpec::validate_against(const Eigen::MatrixXd& K) const {
    psd_factor(wiener_covariance, "Wiener covariance"); // throws if not PSD
    const Eigen::MatrixXd jump_cov = K - wiener_covariance;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
        0.5 * (jump_cov + jump_cov.transpose()));
    if (eig.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, K.norm()))
        throw InvalidSystemError("jump covariance exceeds the system covariance");
    if ((total_covariance() - K).norm() > 1e-10 * std::max(1.0, K.norm()))
        throw InvalidSystemError(
            "noise spec covariance does not match the system covariance");
}

Eigen::Index SimConfig::steps() const {
    if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
    if (horizon <= 0.0) throw std::invalid_argument("horizon must be positive");
    if (n_paths < 1) throw std::invalid_argument("n_paths must be >= 1");
    const double ratio = horizon / dt;
    const auto rounded = static_cast<Eigen::Index>(std::llround(ratio));
    if (rounded < 1 || std::abs(ratio - static_cast<double>(rounded)) >
                           1e-9 * std::max(1.0, ratio))
        throw std::invalid_argument("horizon must be an integer multiple of dt");
    return rounded;
}

std::uint64_t IncrementTensor::checksum() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const double x : data) {
        std::uint64_t bits;
        std::memcpy(&bits, &x, sizeof bits);
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

IncrementSampler::IncrementSampler(const LevyProcessSpec& spec, double dt,
                                   std::uint64_t seed)
    : rng_(seed), v_(spec.noise_dim()), sqrt_dt_(std::sqrt(dt)),
      jump_(spec.jump) {
    if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
    wiener_factor_ = psd_factor(spec.wiener_covariance, "Wiener covariance");
    if (jump_) {
        if (jump_->rate < 0.0)
            throw std::invalid_argument("jump rate must be >= 0");
        if (jump_->loading.rows() != v_)
            throw std::invalid_argument("jump loading row count mismatch");
        jump_intensity_ = jump_->rate * dt;
        if (jump_intensity_ > 700.0)
            throw std::invalid_argument("jump intensity per step too large");
    }
}

// Slot layout per (path, step) cell: Wiener normals use pairs 0..v-1
// (slots 0..2v-1), the Poisson count uses the single slot 2v, and jump
// size draws use pairs v+1+j*q+c.
void IncrementSampler::sample(std::uint64_t path, std::uint64_t step,
                              Eigen::VectorXd& out) const {
    Eigen::VectorXd z(v_);
    for (Eigen::Index i = 0; i < v_; ++i)
        z(i) = rng_.normal(path, step, static_cast<std::uint64_t>(i));
    out = wiener_factor_ * z * sqrt_dt_;

    if (!jump_ || jump_intensity_ == 0.0) return;

    const double u = rng_.uniform(path, step, static_cast<std::uint64_t>(2 * v_));
    double pmf = std::exp(-jump_intensity_);
    double cdf = pmf;
    Eigen::Index count = 0;
    constexpr Eigen::Index kMaxJumps = 4096;
    while (u > cdf && count < kMaxJumps) {
        ++count;
        pmf *= jump_intensity_ / static_cast<double>(count);
        cdf += pmf;
    }

    const Eigen::Index q = jump_->loading.cols();
    Eigen::VectorXd xi(q);
    for (Eigen::Index j = 0; j < count; ++j) {
        for (Eigen::Index c = 0; c < q; ++c) {
            const auto pair = static_cast<std::uint64_t>(v_ + 1 + j * q + c);
            if (jump_->kind == LevyProcessSpec::Jump::SizeKind::TwoPoint) {
                const double coin = rng_.uniform(path, step, 2 * pair);
                xi(c) = coin < 0.5 ? -jump_->size_scale : jump_->size_scale;
            } else {
                xi(c) = jump_->size_scale * rng_.normal(path, step, pair);
            }
        }
        out += jump_->loading * xi;
    }
}

IncrementTensor sample_increments(const LevyProcessSpec& spec, double dt,
                                  Eigen::Index steps, int n_paths,
                                  std::uint64_t seed) {
    if (steps < 1) throw std::invalid_argument("steps must be >= 1");
    if (n_paths < 1) throw std::invalid_argument("n_paths must be >= 1");
    const IncrementSampler sampler(spec, dt, seed);
    IncrementTensor tensor;
    tensor.n_paths = n_paths;
    tensor.steps = steps;
    tensor.v = spec.noise_dim();
    tensor.data.resize(static_cast<std::size_t>(n_paths) *
                       static_cast<std::size_t>(steps) *
                       static_cast<std::size_t>(tensor.v));
    Eigen::VectorXd dM(tensor.v);
    for (int path = 0; path < n_paths; ++path)
        for (Eigen::Index step = 0; step < steps; ++step) {
            sampler.sample(static_cast<std::uint64_t>(path),
                           static_cast<std::uint64_t>(step), dM);
            for (Eigen::Index i = 0; i < tensor.v; ++i)
                tensor.data[static_cast<std::size_t>(
                    (static_cast<Eigen::Index>(path) * steps + step) * tensor.v +
                    i)] = dM(i);
        }
    return tensor;
}

ModelStepper ModelStepper::from_system(const BilinearStochasticSystem& sys) {
    require_valid(sys);
    ModelStepper stepper;
    stepper.A_ = sys.A;
    stepper.B_ = sys.B;
    stepper.C_ = sys.C;
    stepper.D_ = Eigen::MatrixXd::Zero(sys.output_dim(), sys.input_dim());
    stepper.N_ = sys.N;
    stepper.H_ = sys.H;
    for (Eigen::Index k = 0; k < sys.input_dim(); ++k)
        stepper.E_.push_back(
            Eigen::MatrixXd::Zero(sys.state_dim(), sys.input_dim()));
    for (Eigen::Index i = 0; i < sys.noise_dim(); ++i)
        stepper.F_.push_back(
            Eigen::MatrixXd::Zero(sys.state_dim(), sys.input_dim()));
    return stepper;
}

ModelStepper ModelStepper::from_rom(const ReducedModel& rom) {
    ModelStepper stepper;
    stepper.A_ = rom.A;
    stepper.B_ = rom.B;
    stepper.C_ = rom.C;
    stepper.D_ = rom.D;
    stepper.N_ = rom.N;
    stepper.E_ = rom.E;
    stepper.H_ = rom.H;
    stepper.F_ = rom.F;
    return stepper;
}

void ModelStepper::step(Eigen::VectorXd& x, const Eigen::VectorXd& u,
                        double dt, const Eigen::VectorXd& dM) const {
    Eigen::VectorXd drift = A_ * x + B_ * u;
    for (std::size_t k = 0; k < N_.size(); ++k)
        drift += (N_[k] * x + E_[k] * u) * u(static_cast<Eigen::Index>(k));
    Eigen::VectorXd next = x + drift * dt;
    for (std::size_t i = 0; i < H_.size(); ++i)
        next += (H_[i] * x + F_[i] * u) * dM(static_cast<Eigen::Index>(i));
    x.swap(next);
}

Eigen::VectorXd ModelStepper::output(const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& u) const {
    return C_ * x + D_ * u;
}

namespace {

TrajectoryBatch run_single(const ModelStepper& stepper, const ControlSignal& u,
                           const IncrementTensor& increments,
                           const SimConfig& sim, const Eigen::VectorXd& x0,
                           bool keep_states) {
    const Eigen::Index steps = sim.steps();
    if (increments.steps != steps || increments.n_paths != sim.n_paths)
        throw std::invalid_argument("increment tensor does not match SimConfig");
    if (increments.v != stepper.noise_dim())
        throw std::invalid_argument("increment tensor channel count mismatch");
    if (u.dim() != stepper.input_dim())
        throw std::invalid_argument("control dimension mismatch");

    Eigen::VectorXd start = x0;
    if (start.size() == 0) start = Eigen::VectorXd::Zero(stepper.state_dim());
    if (start.size() != stepper.state_dim())
        throw std::invalid_argument("x0 dimension mismatch");

    TrajectoryBatch batch;
    batch.time = Eigen::VectorXd::LinSpaced(steps + 1, 0.0,
                                            static_cast<double>(steps) * sim.dt);
    batch.outputs.reserve(static_cast<std::size_t>(sim.n_paths));

    Eigen::VectorXd dM(increments.v);
    for (int path = 0; path < sim.n_paths; ++path) {
        Eigen::VectorXd x = start;
        Eigen::MatrixXd ys(steps + 1, stepper.output_dim());
        Eigen::MatrixXd xs;
        if (keep_states) xs.resize(steps + 1, stepper.state_dim());
        ys.row(0) = stepper.output(x, u.value(0.0)).transpose();
        if (keep_states) xs.row(0) = x.transpose();
        for (Eigen::Index j = 0; j < steps; ++j) {
            const double t = static_cast<double>(j) * sim.dt;
            const Eigen::VectorXd uj = u.value(t);
            for (Eigen::Index i = 0; i < increments.v; ++i)
                dM(i) = increments.at(path, j, i);
            stepper.step(x, uj, sim.dt, dM);
            if (!x.allFinite()) {
                std::ostringstream msg;
                msg << "state blow-up on path " << path << " at step " << j + 1
                    << " (t = " << t + sim.dt << ")";
                throw SimulationError(msg.str());
            }
            ys.row(j + 1) =
                stepper.output(x, u.value(t + sim.dt)).transpose();
            if (keep_states) xs.row(j + 1) = x.transpose();
        }
        batch.outputs.push_back(std::move(ys));
        if (keep_states) batch.states.push_back(std::move(xs));
    }
    return batch;
}

} // namespace

TrajectoryBatch simulate_full(const BilinearStochasticSystem& sys,
                              const ControlSignal& u,
                              const IncrementTensor& increments,
                              const SimConfig& sim, const Eigen::VectorXd& x0,
                              bool keep_states) {
    return run_single(ModelStepper::from_system(sys), u, increments, sim, x0,
                      keep_states);
}

TrajectoryBatch simulate_rom(const ReducedModel& rom, const ControlSignal& u,
                             const IncrementTensor& increments,
                             const SimConfig& sim, const Eigen::VectorXd& x0,
                             bool keep_states) {
    return run_single(ModelStepper::from_rom(rom), u, increments, sim, x0,
                      keep_states);
}

namespace {

struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

ErrorEstimate estimate_from_integrals(const std::vector<double>& integrals) {
    ErrorEstimate est;
    est.n_paths = static_cast<int>(integrals.size());
    KahanSum mean_acc;
    for (const double x : integrals) mean_acc.add(x);
    est.mc_mean_sq = mean_acc.sum / static_cast<double>(est.n_paths);
    if (est.n_paths > 1) {
        KahanSum var_acc;
        for (const double x : integrals) {
            const double d = x - est.mc_mean_sq;
            var_acc.add(d * d);
        }
        const double sample_var =
            var_acc.sum / static_cast<double>(est.n_paths - 1);
        est.std_error =
            std::sqrt(sample_var / static_cast<double>(est.n_paths));
    }
    est.root = std::sqrt(std::max(0.0, est.mc_mean_sq));
    return est;
}

} // namespace

ErrorEstimate l2_output_error(const TrajectoryBatch& y,
                              const TrajectoryBatch& y_r) {
    if (y.time.size() != y_r.time.size() ||
        (y.time - y_r.time).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("time grids do not match");
    if (y.outputs.size() != y_r.outputs.size())
        throw std::invalid_argument("path counts do not match");

    const Eigen::Index samples = y.time.size();
    const double dt = samples > 1 ? y.time(1) - y.time(0) : 0.0;
    std::vector<double> integrals;
    integrals.reserve(y.outputs.size());
    for (std::size_t path = 0; path < y.outputs.size(); ++path) {
        const Eigen::MatrixXd diff = y.outputs[path] - y_r.outputs[path];
        double acc = 0.5 * (diff.row(0).squaredNorm() +
                            diff.row(samples - 1).squaredNorm());
        for (Eigen::Index j = 1; j + 1 < samples; ++j)
            acc += diff.row(j).squaredNorm();
        integrals.push_back(acc * dt);
    }
    return estimate_from_integrals(integrals);
}

std::vector<ErrorEstimate>
coupled_output_errors(const std::vector<ModelStepper>& models,
                      const std::vector<std::pair<int, int>>& pairs,
                      const ControlSignal& u, const LevyProcessSpec& noise,
                      const SimConfig& sim) {
    const Eigen::Index steps = sim.steps();
    const IncrementSampler sampler(noise, sim.dt, sim.seed);
    for (const auto& model : models)
        if (model.noise_dim() != sampler.noise_dim())
            throw std::invalid_argument("model noise dimension mismatch");

    // per-pair, per-path trapezoid accumulators
    std::vector<std::vector<double>> integrals(
        pairs.size(), std::vector<double>{});
    for (auto& v : integrals) v.reserve(static_cast<std::size_t>(sim.n_paths));

    std::vector<Eigen::VectorXd> x(models.size());
    std::vector<Eigen::VectorXd> y_now(models.size()), y_next(models.size());
    Eigen::VectorXd dM(sampler.noise_dim());

    for (int path = 0; path < sim.n_paths; ++path) {
        for (std::size_t i = 0; i < models.size(); ++i)
            x[i] = Eigen::VectorXd::Zero(models[i].state_dim());
        std::vector<KahanSum> acc(pairs.size());

        Eigen::VectorXd u_now = u.value(0.0);
        for (std::size_t i = 0; i < models.size(); ++i)
            y_now[i] = models[i].output(x[i], u_now);
        for (std::size_t q = 0; q < pairs.size(); ++q)
            acc[q].add(0.5 * (y_now[static_cast<std::size_t>(pairs[q].first)] -
                              y_now[static_cast<std::size_t>(pairs[q].second)])
                                 .squaredNorm());

        for (Eigen::Index j = 0; j < steps; ++j) {
            const double t = static_cast<double>(j) * sim.dt;
            sampler.sample(static_cast<std::uint64_t>(path),
                           static_cast<std::uint64_t>(j), dM);
            const Eigen::VectorXd uj = u.value(t);
            const Eigen::VectorXd u_next = u.value(t + sim.dt);
            for (std::size_t i = 0; i < models.size(); ++i) {
                models[i].step(x[i], uj, sim.dt, dM);
                if (!x[i].allFinite()) {
                    std::ostringstream msg;
                    msg << "state blow-up in model " << i << " on path " << path
                        << " at step " << j + 1;
                    throw SimulationError(msg.str());
                }
                y_next[i] = models[i].output(x[i], u_next);
            }
            const double weight = (j + 1 == steps) ? 0.5 : 1.0;
            for (std::size_t q = 0; q < pairs.size(); ++q)
                acc[q].add(weight *
                           (y_next[static_cast<std::size_t>(pairs[q].first)] -
                            y_next[static_cast<std::size_t>(pairs[q].second)])
                               .squaredNorm());
        }
        for (std::size_t q = 0; q < pairs.size(); ++q)
            integrals[q].push_back(acc[q].sum * sim.dt);
    }

    std::vector<ErrorEstimate> estimates;
    estimates.reserve(pairs.size());
    for (const auto& v : integrals)
        estimates.push_back(estimate_from_integrals(v));
    return estimates;
}

double second_moment_ode_check(const BilinearStochasticSystem& sys,
                               const Eigen::VectorXd& x0, double T, double dt,
                               int n_paths, std::uint64_t seed,
                               double abs_tol) {
    require_valid(sys);
    SimConfig sim;
    sim.horizon = T;
    sim.dt = dt;
    sim.n_paths = n_paths;
    sim.seed = seed;
    const Eigen::Index steps = sim.steps();

    // RK4 on the second-moment flow
    const auto flow = [&](const Eigen::MatrixXd& Pi) {
        return apply_closure(sys, Pi);
    };
    std::vector<double> trace_ode(static_cast<std::size_t>(steps) + 1);
    Eigen::MatrixXd Pi = x0 * x0.transpose();
    trace_ode[0] = Pi.trace();
    for (Eigen::Index j = 0; j < steps; ++j) {
        const Eigen::MatrixXd k1 = flow(Pi);
        const Eigen::MatrixXd k2 = flow(Pi + 0.5 * dt * k1);
        const Eigen::MatrixXd k3 = flow(Pi + 0.5 * dt * k2);
        const Eigen::MatrixXd k4 = flow(Pi + dt * k3);
        Pi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        trace_ode[static_cast<std::size_t>(j) + 1] = Pi.trace();
    }

    // streaming Monte Carlo of E||x||^2 on the same grid
    const IncrementSampler sampler(LevyProcessSpec::pure_wiener(sys.K), dt,
                                   seed);
    const ModelStepper stepper = ModelStepper::from_system(sys);
    const ControlSignal u = ControlSignal::zero(sys.input_dim(), T);
    const Eigen::VectorXd u0 = u.value(0.0);
    std::vector<KahanSum> sum(static_cast<std::size_t>(steps) + 1);
    std::vector<KahanSum> sum_sq(static_cast<std::size_t>(steps) + 1);
    Eigen::VectorXd dM(sys.noise_dim());
    for (int path = 0; path < n_paths; ++path) {
        Eigen::VectorXd x = x0;
        double s = x.squaredNorm();
        sum[0].add(s);
        sum_sq[0].add(s * s);
        for (Eigen::Index j = 0; j < steps; ++j) {
            sampler.sample(static_cast<std::uint64_t>(path),
                           static_cast<std::uint64_t>(j), dM);
            stepper.step(x, u0, dt, dM);
            if (!x.allFinite())
                throw SimulationError("state blow-up in moment check");
            s = x.squaredNorm();
            sum[static_cast<std::size_t>(j) + 1].add(s);
            sum_sq[static_cast<std::size_t>(j) + 1].add(s * s);
        }
    }

    double worst = 0.0;
    for (std::size_t j = 0; j <= static_cast<std::size_t>(steps); ++j) {
        const double mean = sum[j].sum / n_paths;
        double se = 0.0;
        if (n_paths > 1) {
            const double var =
                std::max(0.0, (sum_sq[j].sum - n_paths * mean * mean) /
                                  (n_paths - 1));
            se = std::sqrt(var / n_paths);
        }
        const double ratio =
            std::abs(trace_ode[j] - mean) / (3.0 * se + abs_tol);
        worst = std::max(worst, ratio);
    }
    return worst;
}

void write_trajectory_csv(const TrajectoryBatch& batch,
                          const std::string& path_prefix) {
    for (std::size_t path = 0; path < batch.outputs.size(); ++path) {
        const std::string name =
            path_prefix + "_path" + std::to_string(path) + ".csv";
        std::ofstream out(name);
        if (!out) throw IoError("cannot write " + name);
        out.precision(17);
        const auto& ys = batch.outputs[path];
        out << "t";
        for (Eigen::Index c = 0; c < ys.cols(); ++c) out << ",y" << c + 1;
        out << "\n";
        for (Eigen::Index j = 0; j < ys.rows(); ++j) {
            out << batch.time(j);
            for (Eigen::Index c = 0; c < ys.cols(); ++c) out << "," << ys(j, c);
            out << "\n";
        }
    }
}

void write_trajectory_binary(const TrajectoryBatch& batch,
                             const std::string& filename) {
    std::ofstream out(filename, std::ios::binary);
    if (!out) throw IoError("cannot write " + filename);
    const char magic[4] = {'S', 'B', 'T', 'B'};
    out.write(magic, 4);
    const std::uint32_t version = 1;
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    const std::uint64_t n_paths = batch.outputs.size();
    const std::uint64_t samples =
        batch.outputs.empty() ? 0 : static_cast<std::uint64_t>(batch.outputs[0].rows());
    const std::uint64_t p =
        batch.outputs.empty() ? 0 : static_cast<std::uint64_t>(batch.outputs[0].cols());
    out.write(reinterpret_cast<const char*>(&n_paths), sizeof n_paths);
    out.write(reinterpret_cast<const char*>(&samples), sizeof samples);
    out.write(reinterpret_cast<const char*>(&p), sizeof p);
    out.write(reinterpret_cast<const char*>(batch.time.data()),
              static_cast<std::streamsize>(sizeof(double) * samples));
    for (const auto& ys : batch.outputs)
        for (Eigen::Index j = 0; j < ys.rows(); ++j)
            for (Eigen::Index c = 0; c < ys.cols(); ++c) {
                const double value = ys(j, c);
                out.write(reinterpret_cast<const char*>(&value), sizeof value);
            }
}

TrajectoryBatch read_trajectory_binary(const std::string& filename) {
    std::ifstream in(filename, std::ios::binary);
    if (!in) throw IoError("cannot read " + filename);
    char magic[4];
    in.read(magic, 4);
    if (std::memcmp(magic, "SBTB", 4) != 0)
        throw IoError(filename + ": bad magic");
    std::uint32_t version = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    if (version != 1) throw IoError(filename + ": unsupported version");
    std::uint64_t n_paths = 0, samples = 0, p = 0;
    in.read(reinterpret_cast<char*>(&n_paths), sizeof n_paths);
    in.read(reinterpret_cast<char*>(&samples), sizeof samples);
    in.read(reinterpret_cast<char*>(&p), sizeof p);
    TrajectoryBatch batch;
    batch.time.resize(static_cast<Eigen::Index>(samples));
    in.read(reinterpret_cast<char*>(batch.time.data()),
            static_cast<std::streamsize>(sizeof(double) * samples));
    for (std::uint64_t path = 0; path < n_paths; ++path) {
        Eigen::MatrixXd ys(static_cast<Eigen::Index>(samples),
                           static_cast<Eigen::Index>(p));
        for (Eigen::Index j = 0; j < ys.rows(); ++j)
            for (Eigen::Index c = 0; c < ys.cols(); ++c) {
                double value = 0.0;
                in.read(reinterpret_cast<char*>(&value), sizeof value);
                ys(j, c) = value;
            }
        batch.outputs.push_back(std::move(ys));
    }
    if (!in) throw IoError(filename + ": truncated file");
    return batch;
}

} // namespace sbmor
