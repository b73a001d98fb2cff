#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "sbmor/errors.hpp"
#include "sbmor/generate.hpp"
#include "sbmor/gramians.hpp"
#include "sbmor/rng.hpp"
#include "riccati_oracle.hpp"
#include "test_helpers.hpp"

using namespace sbmor;

TEST_CASE("scalar generalized Lyapunov solve") {
    const auto sys = test::scalar_example();
    const Eigen::MatrixXd Q =
        solve_generalized_lyapunov(sys, Eigen::MatrixXd::Identity(1, 1));
    CHECK(Q(0, 0) == doctest::Approx(1.0 / 1.66).epsilon(1e-12));
}

TEST_CASE("zero right side gives the zero solution") {
    const auto sys = test::scalar_example();
    const Eigen::MatrixXd X =
        solve_generalized_lyapunov(sys, Eigen::MatrixXd::Zero(1, 1));
    CHECK(X.norm() == 0.0);
}

TEST_CASE("decoupled diagonal Lyapunov solve") {
    const auto sys = test::diag_two_state();
    const Eigen::MatrixXd X =
        solve_generalized_lyapunov(sys, Eigen::MatrixXd::Identity(2, 2));
    CHECK(X(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(X(1, 1) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(std::abs(X(0, 1)) < 1e-14);
}

TEST_CASE("solver refuses an unstable system") {
    auto sys = test::linear_scalar();
    sys.A(0, 0) = 1.0;
    CHECK_THROWS_AS(
        solve_generalized_lyapunov(sys, Eigen::MatrixXd::Identity(1, 1)),
        UnstableSystemError);
}

TEST_CASE("solver enforces the dimension cap") {
    const auto sys = generate_test_system(4, 1, 1, 1, 5, 0.05);
    LyapunovOptions opts;
    opts.dimension_cap = 3;
    CHECK_THROWS_AS(
        solve_generalized_lyapunov(sys, Eigen::MatrixXd::Identity(4, 4), opts),
        DimensionCapError);
}

TEST_CASE("observability Gramian of the scalar example") {
    const auto result = observability_gramian(test::scalar_example());
    CHECK(result.Q(0, 0) == doctest::Approx(0.602410).epsilon(1e-6));
    CHECK(result.positive_definite);
    CHECK(result.residual <= 1e-10);
}

TEST_CASE("zero output map gives a singular Gramian, flagged") {
    auto sys = test::scalar_example();
    sys.C.setZero();
    const auto result = observability_gramian(sys);
    CHECK(result.Q.norm() == 0.0);
    CHECK_FALSE(result.positive_definite);
}

TEST_CASE("decoupled observability Gramian has the closed entrywise form") {
    auto sys = test::diag_two_state(); // C = [1 1]
    const auto result = observability_gramian(sys);
    CHECK(result.Q(0, 0) == doctest::Approx(1.0 / 2.0).epsilon(1e-12));
    CHECK(result.Q(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(result.Q(1, 1) == doctest::Approx(1.0 / 4.0).epsilon(1e-12));
}

TEST_CASE("reachability Gramian of the scalar example") {
    const auto result = reachability_gramian(test::scalar_example());
    CHECK(result.X(0, 0) == doctest::Approx(1.66).epsilon(1e-12));
    CHECK(result.P(0, 0) == doctest::Approx(1.0 / 1.66).epsilon(1e-12));
    CHECK(result.newton_iterations <= 30);
}

TEST_CASE("linear scalar reachability Gramian takes the positive root") {
    const auto result = reachability_gramian(test::linear_scalar());
    CHECK(result.X(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(result.P(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("reachability requires a nonzero input map") {
    auto sys = test::scalar_example();
    sys.B.setZero();
    CHECK_THROWS_AS(reachability_gramian(sys), std::invalid_argument);
}

TEST_CASE("Newton solution matches the brute-force oracle") {
    const auto sys = generate_test_system(2, 1, 1, 1, 3, 0.05);
    const auto result = reachability_gramian(sys);
    const Eigen::MatrixXd oracle = test::riccati_brute_force(sys);
    const Eigen::MatrixXd oracle_P = oracle.inverse();
    CHECK((result.P - oracle_P).norm() <= 1e-7 * oracle_P.norm());
}

TEST_CASE("linear case reduces to the classical equations") {
    const auto sys = generate_test_system(4, 2, 1, 1, 8, 0.05,
                                          GeneratorOptions{.zero_bilinear = true});
    BilinearStochasticSystem linear = sys;
    for (auto& Hi : linear.H) Hi.setZero();

    // naive dense references built inline
    const Eigen::Index n = 4;
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd kron_sum_T =
        kron(linear.A.transpose(), id) + kron(id, linear.A.transpose());

    const Eigen::MatrixXd rhs = linear.C.transpose() * linear.C;
    const Eigen::VectorXd q_vec = kron_sum_T.partialPivLu().solve(
        -Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(rhs.data(), n * n)));
    const Eigen::MatrixXd Q_ref =
        Eigen::Map<const Eigen::MatrixXd>(q_vec.data(), n, n);
    const auto obs = observability_gramian(linear);
    CHECK((obs.Q - Q_ref).norm() <= 1e-10 * Q_ref.norm());

    const Eigen::MatrixXd G = linear.B * linear.B.transpose();
    const Eigen::MatrixXd kron_sum = kron(linear.A, id) + kron(id, linear.A);
    const Eigen::VectorXd p_vec = kron_sum.partialPivLu().solve(
        -Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(G.data(), n * n)));
    const Eigen::MatrixXd P_ref =
        Eigen::Map<const Eigen::MatrixXd>(p_vec.data(), n, n);
    const auto reach = reachability_gramian(linear);
    CHECK((reach.P - P_ref).norm() <= 1e-8 * P_ref.norm());
}

TEST_CASE("residuals stay below the contract on generated systems") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto sys = generate_test_system(5, 2, 2, 2, seed, 0.05);
        const auto pair = compute_gramians(sys);
        CHECK(pair.residual_Q <= 1e-8);
        CHECK(pair.residual_X <= 1e-8);
        CHECK((pair.P * pair.X - Eigen::MatrixXd::Identity(5, 5)).norm() <=
              1e-8 * 5);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_p(pair.P);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_q(pair.Q);
        CHECK(eig_p.eigenvalues().minCoeff() > 0.0);
        CHECK(eig_q.eigenvalues().minCoeff() > 0.0);
    }
}

TEST_CASE("covariance rescaling leaves the Gramians unchanged") {
    const auto sys = generate_test_system(3, 1, 1, 2, 4, 0.05);
    const double c = 2.7;
    BilinearStochasticSystem scaled = sys;
    scaled.K *= c;
    for (auto& Hi : scaled.H) Hi /= std::sqrt(c);

    const auto q0 = observability_gramian(sys);
    const auto q1 = observability_gramian(scaled);
    CHECK((q0.Q - q1.Q).norm() <= 1e-10 * q0.Q.norm());

    const auto x0 = reachability_gramian(sys);
    const auto x1 = reachability_gramian(scaled);
    CHECK((x0.X - x1.X).norm() <= 1e-9 * x0.X.norm());
}

TEST_CASE("Lyapunov solutions are monotone in the right side") {
    const auto sys = generate_test_system(4, 1, 1, 1, 6, 0.05);
    const Eigen::MatrixXd rhs1 = Eigen::MatrixXd::Identity(4, 4);
    const Eigen::MatrixXd rhs2 =
        rhs1 + 0.1 * Eigen::MatrixXd::Identity(4, 4);
    const Eigen::MatrixXd x1 = solve_generalized_lyapunov(sys, rhs1);
    const Eigen::MatrixXd x2 = solve_generalized_lyapunov(sys, rhs2);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(x2 - x1);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("psd closure check") {
    CHECK(psd_closure_check({Eigen::MatrixXd::Identity(1, 1)},
                            Eigen::MatrixXd::Identity(1, 1)) ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(psd_closure_check({Eigen::MatrixXd::Random(2, 2),
                             Eigen::MatrixXd::Random(2, 2)},
                            Eigen::MatrixXd::Zero(2, 2)) == 0.0);

    CounterRng rng(17);
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        std::vector<Eigen::MatrixXd> mats;
        for (std::uint64_t c = 0; c < 2; ++c) {
            Eigen::MatrixXd M(3, 3);
            for (Eigen::Index i = 0; i < 3; ++i)
                for (Eigen::Index j = 0; j < 3; ++j)
                    M(i, j) = rng.normal(trial * 7 + c,
                                         static_cast<std::uint64_t>(i),
                                         static_cast<std::uint64_t>(j));
            mats.push_back(M);
        }
        Eigen::MatrixXd K(2, 2);
        K << 2.0, 1.0, 1.0, 1.0;
        CHECK(psd_closure_check(mats, K) >= -1e-12);
    }
}
