#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "sbmor/bounds.hpp"
#include "sbmor/errors.hpp"
#include "sbmor/generate.hpp"
#include "test_helpers.hpp"

using namespace sbmor;

TEST_CASE("mask follows the bilinear structure") {
    auto sys = generate_test_system(3, 2, 1, 1, 3, 0.05);
    sys.N[1].setZero();
    const auto mask = u0_mask(sys);
    REQUIRE(mask.size() == 2);
    CHECK(mask[0]);
    CHECK_FALSE(mask[1]);

    for (auto& Nk : sys.N) Nk.setZero();
    const auto all_zero = u0_mask(sys);
    CHECK_FALSE(all_zero[0]);
    CHECK_FALSE(all_zero[1]);

    sys.N[0] = Eigen::MatrixXd::Constant(3, 3, 1e-20);
    CHECK_FALSE(u0_mask(sys, 1e-14)[0]);
}

TEST_CASE("bound formula matches the hand evaluation") {
    const auto bound = error_bound({0.5, 0.1}, 2.0, 1.0);
    CHECK(bound.total == doctest::Approx(3.9569310497).epsilon(1e-9));
    REQUIRE(bound.per_step.size() == 2);
    CHECK(bound.per_step[0] ==
          doctest::Approx(2.0 * 0.5 * 2.0 * std::exp(0.5)).epsilon(1e-12));
}

TEST_CASE("linear case drops the exponential factor exactly") {
    const auto bound = error_bound({0.3, 0.2}, 1.5, 0.0);
    CHECK(bound.total == 2.0 * (0.3 + 0.2) * 1.5);
}

TEST_CASE("zero control gives a zero bound") {
    const auto bound = error_bound({0.5}, 0.0, 0.0);
    CHECK(bound.total == 0.0);
}

TEST_CASE("per-step bounds sum to the total") {
    const auto bound = error_bound({0.9, 0.4, 0.01}, 1.3, 0.7);
    const double sum =
        std::accumulate(bound.per_step.begin(), bound.per_step.end(), 0.0);
    CHECK(std::abs(sum - bound.total) <= 1e-12 * bound.total);
}

TEST_CASE("masking only reduces the masked control norm") {
    const auto sys = generate_test_system(3, 2, 1, 1, 5, 0.05);
    const auto u = ControlSignal::constant(Eigen::Vector2d(1.0, 2.0), 1.0);
    const auto mask = u0_mask(sys);
    const double full = control_l2_norm(u, 1.0, 1e-3);
    const double masked = masked_control_l2_norm(u, mask, 1.0, 1e-3);
    CHECK(masked <= full + 1e-12);
}

namespace {

VerifyOptions fast_options(int paths, std::uint64_t seed) {
    VerifyOptions opts;
    opts.sim.horizon = 1.0;
    opts.sim.dt = 1e-3;
    opts.sim.n_paths = paths;
    opts.sim.seed = seed;
    return opts;
}

} // namespace

TEST_CASE("full-order verification passes with zero error") {
    const auto sys = generate_test_system(4, 1, 1, 1, 7, 0.05);
    const auto u = ControlSignal::constant(Eigen::VectorXd::Ones(1), 1.0);
    const auto report = verify_bound(sys, 4, u, LevyProcessSpec::pure_wiener(sys.K),
                                     fast_options(50, 1));
    CHECK(report.verdict == Verdict::Pass);
    CHECK(report.total_bound == 0.0);
    CHECK(report.mc.root <= 1e-9);
    CHECK(report.steps.empty());
}

TEST_CASE("verification passes on a small system") {
    const auto sys = generate_test_system(4, 2, 1, 1, 9, 0.05);
    const auto u = ControlSignal::sinusoid(Eigen::VectorXd::Ones(2), 0.5, 1.0);
    const auto grouping_r = 2;
    const auto report =
        verify_bound(sys, grouping_r, u, LevyProcessSpec::pure_wiener(sys.K),
                     fast_options(2000, 3));
    CHECK(report.verdict == Verdict::Pass);
    CHECK(report.mc.root <= report.total_bound);
    for (const auto& step : report.steps) CHECK(step.pass);

    // telescoping: step bounds sum to the total
    double sum = 0.0;
    for (const auto& step : report.steps) sum += step.bound;
    CHECK(std::abs(sum - report.total_bound) <= 1e-12 * report.total_bound);
}

TEST_CASE("bound is monotone in the kept order") {
    const auto sys = generate_test_system(5, 1, 1, 1, 11, 0.05);
    const auto u = ControlSignal::constant(Eigen::VectorXd::Ones(1), 1.0);
    const auto noise = LevyProcessSpec::pure_wiener(sys.K);
    double previous = std::numeric_limits<double>::infinity();
    for (Eigen::Index r : {1, 2, 3, 4}) {
        const auto report = verify_bound(sys, r, u, noise, fast_options(50, 5));
        CHECK(report.total_bound <= previous + 1e-12);
        previous = report.total_bound;
    }
}

TEST_CASE("single path verification is inconclusive") {
    const auto sys = generate_test_system(4, 1, 1, 1, 13, 0.05);
    const auto u = ControlSignal::constant(Eigen::VectorXd::Ones(1), 1.0);
    const auto report = verify_bound(
        sys, 2, u, LevyProcessSpec::pure_wiener(sys.K), fast_options(1, 7));
    CHECK(report.verdict == Verdict::Inconclusive);
}

TEST_CASE("linear systems report a unit exponential factor") {
    const auto sys = generate_test_system(4, 2, 1, 1, 15, 0.05,
                                          GeneratorOptions{.zero_bilinear = true});
    const auto u = ControlSignal::constant(Eigen::VectorXd::Ones(2), 1.0);
    const auto report = verify_bound(
        sys, 2, u, LevyProcessSpec::pure_wiener(sys.K), fast_options(500, 9));
    CHECK(report.exp_factor == 1.0);
    CHECK(report.u0_norm == 0.0);
    const double expected = 2.0 *
                            std::accumulate(report.truncated_values.begin(),
                                            report.truncated_values.end(), 0.0) *
                            report.u_norm;
    CHECK(report.total_bound == expected);
}

TEST_CASE("report JSON is byte-stable across reruns") {
    const auto sys = generate_test_system(4, 1, 1, 1, 17, 0.05);
    const auto u = ControlSignal::sinusoid(Eigen::VectorXd::Ones(1), 1.0, 1.0);
    const auto noise = LevyProcessSpec::pure_wiener(sys.K);
    const auto a = verify_bound(sys, 2, u, noise, fast_options(200, 11));
    const auto b = verify_bound(sys, 2, u, noise, fast_options(200, 11));
    CHECK(a.to_json() == b.to_json());
    CHECK(a.to_json().find("\"verdict\"") != std::string::npos);
}

TEST_CASE("mid-group order is refused") {
    BilinearStochasticSystem sys = generate_test_system(4, 1, 1, 1, 19, 0.05);
    const auto u = ControlSignal::constant(Eigen::VectorXd::Ones(1), 1.0);
    const auto pair = compute_gramians(sys);
    auto balanced = balance(sys, pair.P, pair.Q);
    balanced.sigma << 3.0, 1.0, 1.0, 0.2; // forged tie straddling r = 2
    CHECK_THROWS_AS(verify_bound(balanced, 2, u,
                                 LevyProcessSpec::pure_wiener(sys.K),
                                 fast_options(10, 13)),
                    ReductionOrderError);
}
