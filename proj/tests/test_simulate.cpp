#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sbmor/balancing.hpp"
#include "sbmor/errors.hpp"
#include "sbmor/generate.hpp"
#include "sbmor/gramians.hpp"
#include "sbmor/reduction.hpp"
#include "sbmor/simulate.hpp"
#include "test_helpers.hpp"

using namespace sbmor;

TEST_CASE("Wiener increments have the right moments") {
    LevyProcessSpec spec = LevyProcessSpec::pure_wiener(Eigen::MatrixXd::Identity(1, 1));
    const double dt = 1e-2;
    const auto tensor = sample_increments(spec, dt, 10, 100000, 99);
    double sum = 0.0, sum_sq = 0.0;
    for (const double x : tensor.data) {
        sum += x;
        sum_sq += x * x;
    }
    const auto count = static_cast<double>(tensor.data.size());
    const double mean = sum / count;
    const double var = sum_sq / count - mean * mean;
    CHECK(std::abs(mean) <= 4.0 * std::sqrt(dt / count));
    CHECK(var == doctest::Approx(dt).epsilon(0.01));
}

TEST_CASE("compound Poisson part keeps the total covariance") {
    Eigen::MatrixXd K(2, 2);
    K << 1.0, 0.3, 0.3, 0.5;
    for (const auto kind : {LevyProcessSpec::Jump::SizeKind::TwoPoint,
                            LevyProcessSpec::Jump::SizeKind::CenteredNormal}) {
        const auto spec = LevyProcessSpec::wiener_plus_jumps(K, 0.4, 5.0, kind);
        CHECK((spec.total_covariance() - K).norm() <= 1e-12);
        CHECK_NOTHROW(spec.validate_against(K));

        const double dt = 1e-2;
        const auto tensor = sample_increments(spec, dt, 10, 60000, 7);
        Eigen::MatrixXd second = Eigen::MatrixXd::Zero(2, 2);
        Eigen::Vector2d mean = Eigen::Vector2d::Zero();
        for (int path = 0; path < tensor.n_paths; ++path)
            for (Eigen::Index step = 0; step < tensor.steps; ++step) {
                Eigen::Vector2d dM(tensor.at(path, step, 0),
                                   tensor.at(path, step, 1));
                mean += dM;
                second += dM * dM.transpose();
            }
        const double count = static_cast<double>(tensor.n_paths) *
                             static_cast<double>(tensor.steps);
        mean /= count;
        second /= count;
        CHECK(mean.norm() <= 4.0 * std::sqrt(K.norm() * dt / count));
        CHECK((second - K * dt).norm() <= 0.02 * (K * dt).norm());
    }
}

TEST_CASE("zero jump rate contributes nothing") {
    const auto pure = LevyProcessSpec::pure_wiener(Eigen::MatrixXd::Identity(1, 1));
    auto with_jump = pure;
    LevyProcessSpec::Jump jump;
    jump.rate = 0.0;
    jump.loading = Eigen::MatrixXd::Zero(1, 1);
    with_jump.jump = jump;
    const auto a = sample_increments(pure, 1e-2, 50, 10, 3);
    const auto b = sample_increments(with_jump, 1e-2, 50, 10, 3);
    CHECK(a.checksum() == b.checksum());
}

TEST_CASE("jump covariance must not exceed the system covariance") {
    const Eigen::MatrixXd K = Eigen::MatrixXd::Identity(1, 1);
    LevyProcessSpec spec = LevyProcessSpec::pure_wiener(2.0 * K);
    CHECK_THROWS_AS(spec.validate_against(K), InvalidSystemError);

    auto mismatched = LevyProcessSpec::pure_wiener(0.5 * K);
    CHECK_THROWS_AS(mismatched.validate_against(K), InvalidSystemError);
}

TEST_CASE("increments are independent of generation order") {
    const auto spec = LevyProcessSpec::wiener_plus_jumps(
        Eigen::MatrixXd::Identity(2, 2), 0.3, 2.0,
        LevyProcessSpec::Jump::SizeKind::TwoPoint);
    const IncrementSampler sampler(spec, 1e-2, 42);
    const auto tensor = sample_increments(spec, 1e-2, 7, 5, 42);
    Eigen::VectorXd dM(2);
    for (int path = 4; path >= 0; --path)
        for (Eigen::Index step = 6; step >= 0; --step) {
            sampler.sample(static_cast<std::uint64_t>(path),
                           static_cast<std::uint64_t>(step), dM);
            CHECK(dM(0) == tensor.at(path, step, 0));
            CHECK(dM(1) == tensor.at(path, step, 1));
        }
}

TEST_CASE("zero input and zero state stay at zero") {
    const auto sys = test::scalar_example();
    SimConfig sim{1.0, 1e-2, 3, 5};
    const auto tensor = sample_increments(LevyProcessSpec::pure_wiener(sys.K),
                                          sim.dt, sim.steps(), sim.n_paths, sim.seed);
    const auto batch = simulate_full(sys, ControlSignal::zero(1, 1.0), tensor, sim);
    for (const auto& ys : batch.outputs) CHECK(ys.norm() == 0.0);
}

TEST_CASE("deterministic linear step response approaches the closed form") {
    auto sys = test::linear_scalar();
    SimConfig sim{1.0, 1e-4, 1, 1};
    const auto tensor = sample_increments(
        LevyProcessSpec::pure_wiener(Eigen::MatrixXd(0, 0)), sim.dt,
        sim.steps(), sim.n_paths, sim.seed);
    const auto batch = simulate_full(
        sys, ControlSignal::constant(Eigen::VectorXd::Ones(1), 1.0), tensor, sim);
    const double expected = 1.0 - std::exp(-1.0);
    CHECK(batch.outputs[0](sim.steps(), 0) ==
          doctest::Approx(expected).epsilon(1e-3));
}

TEST_CASE("state blow-up aborts loudly") {
    auto sys = test::linear_scalar();
    sys.A(0, 0) = 1000.0; // exponential growth overflows the state
    SimConfig sim{300.0, 1.0, 1, 1};
    const auto tensor = sample_increments(
        LevyProcessSpec::pure_wiener(Eigen::MatrixXd(0, 0)), sim.dt,
        sim.steps(), sim.n_paths, sim.seed);
    CHECK_THROWS_AS(
        simulate_full(sys, ControlSignal::constant(Eigen::VectorXd::Ones(1), 300.0),
                      tensor, sim),
        SimulationError);
}

TEST_CASE("full-order SPA model reproduces the balanced output pathwise") {
    const auto sys = generate_test_system(4, 2, 1, 1, 18, 0.05);
    const auto pair = compute_gramians(sys);
    const auto balanced = balance(sys, pair.P, pair.Q);
    const auto rom = spa_reduce(balanced, 4);

    SimConfig sim{1.0, 1e-2, 5, 11};
    const auto tensor = sample_increments(LevyProcessSpec::pure_wiener(sys.K),
                                          sim.dt, sim.steps(), sim.n_paths, sim.seed);
    const auto u = ControlSignal::sinusoid(Eigen::VectorXd::Ones(2), 0.7, 1.0);
    const auto y_full = simulate_full(balanced.system, u, tensor, sim);
    const auto y_rom = simulate_rom(rom, u, tensor, sim);
    for (int path = 0; path < sim.n_paths; ++path)
        CHECK((y_full.outputs[static_cast<std::size_t>(path)] -
               y_rom.outputs[static_cast<std::size_t>(path)])
                  .cwiseAbs()
                  .maxCoeff() <= 1e-10);
}

TEST_CASE("output is invariant under the balancing change of coordinates") {
    const auto sys = generate_test_system(4, 1, 1, 1, 19, 0.05);
    const auto pair = compute_gramians(sys);
    const auto balanced = balance(sys, pair.P, pair.Q);

    SimConfig sim{1.0, 1e-2, 4, 23};
    const auto tensor = sample_increments(LevyProcessSpec::pure_wiener(sys.K),
                                          sim.dt, sim.steps(), sim.n_paths, sim.seed);
    const auto u = ControlSignal::constant(Eigen::VectorXd::Ones(1), 1.0);
    const auto y_orig = simulate_full(sys, u, tensor, sim);
    const auto y_bal = simulate_full(balanced.system, u, tensor, sim);
    for (int path = 0; path < sim.n_paths; ++path)
        CHECK((y_orig.outputs[static_cast<std::size_t>(path)] -
               y_bal.outputs[static_cast<std::size_t>(path)])
                  .cwiseAbs()
                  .maxCoeff() <= 1e-9);
}

TEST_CASE("ROM time stepping is first-order consistent") {
    // deterministic SPA model: halving dt should halve the step error
    const auto sys = generate_test_system(4, 1, 1, 1, 25, 0.05,
                                          GeneratorOptions{.zero_bilinear = true});
    auto linear = sys;
    for (auto& Hi : linear.H) Hi.setZero();
    const auto pair = compute_gramians(linear);
    const auto balanced = balance(linear, pair.P, pair.Q);
    const auto grouping = group_hsvs(balanced.sigma, 1e-8);
    const auto rom = spa_reduce(balanced, grouping.cut_indices.back());

    const auto u = ControlSignal::sinusoid(Eigen::VectorXd::Ones(1), 0.5, 1.0);
    const auto run = [&](double dt) {
        SimConfig sim{1.0, dt, 1, 1};
        const auto tensor = sample_increments(
            LevyProcessSpec::pure_wiener(linear.K), sim.dt, sim.steps(), 1, 1);
        const auto batch = simulate_rom(rom, u, tensor, sim);
        return batch.outputs[0](sim.steps(), 0);
    };
    const double coarse = run(4e-3), mid = run(2e-3), fine = run(1e-3);
    const double ratio = (coarse - mid) / (mid - fine);
    CHECK(ratio == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("L2 error estimator arithmetic") {
    TrajectoryBatch a, b;
    a.time = Eigen::VectorXd::LinSpaced(11, 0.0, 1.0);
    b.time = a.time;

    SUBCASE("identical outputs give zero") {
        a.outputs = {Eigen::MatrixXd::Ones(11, 1)};
        b.outputs = {Eigen::MatrixXd::Ones(11, 1)};
        const auto est = l2_output_error(a, b);
        CHECK(est.mc_mean_sq == 0.0);
        CHECK(est.root == 0.0);
    }

    SUBCASE("constant offset integrates exactly") {
        a.outputs = {Eigen::MatrixXd::Zero(11, 1)};
        b.outputs = {Eigen::MatrixXd::Constant(11, 1, 3.0)};
        const auto est = l2_output_error(a, b);
        CHECK(est.mc_mean_sq == doctest::Approx(9.0).epsilon(1e-14));
    }

    SUBCASE("two-path mean and standard error") {
        // per-path integrals 1 and 3 via constant offsets 1 and sqrt(3)
        a.outputs = {Eigen::MatrixXd::Zero(11, 1), Eigen::MatrixXd::Zero(11, 1)};
        b.outputs = {Eigen::MatrixXd::Constant(11, 1, 1.0),
                     Eigen::MatrixXd::Constant(11, 1, std::sqrt(3.0))};
        const auto est = l2_output_error(a, b);
        CHECK(est.mc_mean_sq == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(est.std_error == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(est.root == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    }

    SUBCASE("grid mismatch is rejected") {
        b.time = Eigen::VectorXd::LinSpaced(11, 0.0, 2.0);
        a.outputs = {Eigen::MatrixXd::Zero(11, 1)};
        b.outputs = {Eigen::MatrixXd::Zero(11, 1)};
        CHECK_THROWS_AS(l2_output_error(a, b), std::invalid_argument);
    }
}

TEST_CASE("coupled runner agrees with the tensor-based simulators") {
    const auto sys = generate_test_system(3, 1, 1, 1, 27, 0.05);
    const auto pair = compute_gramians(sys);
    const auto balanced = balance(sys, pair.P, pair.Q);
    const auto grouping = group_hsvs(balanced.sigma, 1e-8);
    const auto rom = spa_reduce(balanced, grouping.cut_indices.back());

    SimConfig sim{1.0, 1e-2, 50, 31};
    const auto noise = LevyProcessSpec::pure_wiener(sys.K);
    const auto u = ControlSignal::constant(Eigen::VectorXd::Ones(1), 1.0);

    const auto tensor =
        sample_increments(noise, sim.dt, sim.steps(), sim.n_paths, sim.seed);
    const auto y_full = simulate_full(balanced.system, u, tensor, sim);
    const auto y_rom = simulate_rom(rom, u, tensor, sim);
    const auto reference = l2_output_error(y_full, y_rom);

    const std::vector<ModelStepper> models = {
        ModelStepper::from_system(balanced.system), ModelStepper::from_rom(rom)};
    const auto streamed = coupled_output_errors(models, {{0, 1}}, u, noise, sim);
    CHECK(streamed[0].mc_mean_sq ==
          doctest::Approx(reference.mc_mean_sq).epsilon(1e-12));
    CHECK(streamed[0].std_error ==
          doctest::Approx(reference.std_error).epsilon(1e-12));
}

TEST_CASE("coupled runner is bit-deterministic across runs") {
    const auto sys = generate_test_system(3, 1, 1, 1, 29, 0.05);
    const std::vector<ModelStepper> models = {ModelStepper::from_system(sys)};
    SimConfig sim{1.0, 1e-2, 40, 17};
    const auto noise = LevyProcessSpec::pure_wiener(sys.K);
    const auto u = ControlSignal::sinusoid(Eigen::VectorXd::Ones(1), 1.0, 1.0);
    const auto a = coupled_output_errors(models, {{0, 0}}, u, noise, sim);
    const auto b = coupled_output_errors(models, {{0, 0}}, u, noise, sim);
    CHECK(a[0].mc_mean_sq == b[0].mc_mean_sq);
    CHECK(a[0].std_error == b[0].std_error);
}

TEST_CASE("second moment matches the flow of the deterministic part") {
    auto sys = test::linear_scalar();
    const double ratio = second_moment_ode_check(
        sys, Eigen::VectorXd::Ones(1), 1.0, 2e-4, 1, 3);
    CHECK(ratio <= 1.0);
}

TEST_CASE("second moment of the noisy scalar stays within three sigma") {
    BilinearStochasticSystem sys = test::scalar_example();
    sys.N[0].setZero();
    const double ratio = second_moment_ode_check(
        sys, Eigen::VectorXd::Ones(1), 1.0, 1e-3, 10000, 41);
    CHECK(ratio <= 1.0);
}

TEST_CASE("unstable second moments are tracked on short horizons") {
    auto sys = test::scalar_example();
    sys.N[0].setZero();
    sys.H[0](0, 0) = 1.5; // abscissa +0.25
    const double ratio = second_moment_ode_check(
        sys, Eigen::VectorXd::Ones(1), 0.5, 1e-3, 10000, 41);
    CHECK(ratio <= 1.0);
}

TEST_CASE("stable systems decay in mean square") {
    const auto sys = generate_test_system(3, 1, 1, 1, 47, 0.2);
    const auto report = is_mean_square_stable(sys);
    const double T = std::min(20.0, 10.0 / report.margin);
    const double dt = T / 1000.0;

    const IncrementSampler sampler(LevyProcessSpec::pure_wiener(sys.K), dt, 51);
    const ModelStepper stepper = ModelStepper::from_system(sys);
    const auto u0 = Eigen::VectorXd::Zero(1);
    const int paths = 4000;
    double sum_T = 0.0, sum_sq_T = 0.0;
    const Eigen::VectorXd start = Eigen::VectorXd::Ones(3);
    Eigen::VectorXd dM(1);
    for (int path = 0; path < paths; ++path) {
        Eigen::VectorXd x = start;
        for (int j = 0; j < 1000; ++j) {
            sampler.sample(static_cast<std::uint64_t>(path),
                           static_cast<std::uint64_t>(j), dM);
            stepper.step(x, u0, dt, dM);
        }
        const double s = x.squaredNorm();
        sum_T += s;
        sum_sq_T += s * s;
    }
    const double mean_T = sum_T / paths;
    const double se_T = std::sqrt(
        std::max(0.0, (sum_sq_T / paths - mean_T * mean_T) / (paths - 1)));
    CHECK(mean_T + 3.0 * se_T < start.squaredNorm());
}

TEST_CASE("weak-order consistency when halving the step") {
    // noise-dominated instance: strong diffusion keeps the per-path spread
    // of the error integral well above the step-size sensitivity
    BalancedRealization balanced;
    balanced.system.A = Eigen::MatrixXd(2, 2);
    balanced.system.A << -2.0, 1.0, 0.0, -1.0;
    balanced.system.B = Eigen::MatrixXd(2, 1);
    balanced.system.B << 1.0, 1.0;
    balanced.system.C = Eigen::MatrixXd(1, 2);
    balanced.system.C << 1.0, 0.5;
    balanced.system.N = {Eigen::MatrixXd::Zero(2, 2)};
    Eigen::MatrixXd H(2, 2);
    H << 0.8, 0.2, 0.1, 0.8;
    balanced.system.H = {H};
    balanced.system.K = Eigen::MatrixXd::Identity(1, 1);
    balanced.sigma.resize(2);
    balanced.sigma << 2.0, 1.0;
    balanced.S = Eigen::MatrixXd::Identity(2, 2);
    balanced.S_inv = balanced.S;
    const auto rom = spa_reduce(balanced, 1);

    const auto u = ControlSignal::constant(Eigen::VectorXd::Ones(1), 1.0);
    const auto noise = LevyProcessSpec::pure_wiener(balanced.system.K);
    const std::vector<ModelStepper> models = {
        ModelStepper::from_system(balanced.system), ModelStepper::from_rom(rom)};

    const auto run = [&](double dt) {
        SimConfig sim{1.0, dt, 4000, 61};
        return coupled_output_errors(models, {{0, 1}}, u, noise, sim)[0];
    };
    const auto coarse = run(2e-3);
    const auto fine = run(1e-3);
    const double combined = std::sqrt(coarse.std_error * coarse.std_error +
                                      fine.std_error * fine.std_error);
    CHECK(std::abs(coarse.mc_mean_sq - fine.mc_mean_sq) <= 3.0 * combined);
}

TEST_CASE("trajectory binary round trip") {
    TrajectoryBatch batch;
    batch.time = Eigen::VectorXd::LinSpaced(5, 0.0, 1.0);
    batch.outputs = {Eigen::MatrixXd::Random(5, 2), Eigen::MatrixXd::Random(5, 2)};
    const std::string file = "/tmp/sbmor_test_traj.bin";
    write_trajectory_binary(batch, file);
    const auto loaded = read_trajectory_binary(file);
    REQUIRE(loaded.outputs.size() == 2);
    CHECK((loaded.time - batch.time).norm() == 0.0);
    CHECK((loaded.outputs[0] - batch.outputs[0]).norm() == 0.0);
    CHECK((loaded.outputs[1] - batch.outputs[1]).norm() == 0.0);
}
