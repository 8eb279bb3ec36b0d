#include <doctest.h>

#include <cmath>
#include <random>

#include "stochdp/error.hpp"
#include "stochdp/shock_kernels.hpp"

using namespace stochdp;

namespace {

double identity(std::span<const double> z) { return z[0]; }

InnovationLaw two_atoms(double a, double b) { return InnovationLaw::atoms({{{a}, 0.5}, {{b}, 0.5}}); }

}  // namespace

TEST_SUITE("shock_kernels") {
    TEST_CASE("constants integrate to themselves") {
        const std::vector<TransitionKernel> kernels = {
            TransitionKernel::degenerate(1),
            TransitionKernel::linear_ar(Eigen::MatrixXd::Constant(1, 1, 0.5), two_atoms(1.0, 3.0)),
            TransitionKernel::log_log_ar({0.5}, InnovationLaw::mean_shifted_lognormal(0.3, 0.5)),
            TransitionKernel::log_log_ar({0.2}, InnovationLaw::pareto({3.0})),
            TransitionKernel::piecewise_jump(),
        };
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> u(1.0, 20.0);
        for (const auto& Q : kernels) {
            for (int i = 0; i < 100; ++i) {
                const double z[1] = {u(rng)};
                CHECK(Q.conditional_expectation([](std::span<const double>) { return 4.5; }, z) ==
                      doctest::Approx(4.5).epsilon(1e-12));
                CHECK(Q.conditional_expectation([](std::span<const double>) { return 1.0; }, z) ==
                      doctest::Approx(1.0).epsilon(1e-12));
            }
        }
    }

    TEST_CASE("Dirac kernel returns the current shock") {
        const double z[1] = {3.0};
        CHECK(TransitionKernel::degenerate(1).conditional_expectation(identity, z) == 3.0);
    }

    TEST_CASE("linear AR mean by atom enumeration") {
        const auto Q = TransitionKernel::linear_ar(Eigen::MatrixXd::Constant(1, 1, 0.5), two_atoms(1.0, 3.0));
        const double z[1] = {2.0};
        CHECK(Q.conditional_expectation(identity, z) == doctest::Approx(3.0).epsilon(1e-14));
        CHECK(Q.conditional_mean(z)[0] == doctest::Approx(3.0).epsilon(1e-14));
    }

    TEST_CASE("non-finite integrand names the node") {
        const auto Q = TransitionKernel::linear_ar(Eigen::MatrixXd::Constant(1, 1, 0.5), two_atoms(1.0, 3.0));
        const double z[1] = {2.0};
        CHECK_THROWS_AS(Q.conditional_expectation([](std::span<const double> x) { return x[0] > 3.5 ? NAN : 0.0; }, z),
                        NumericalError);
    }

    TEST_CASE("conditional means in closed form") {
        const auto iid = TransitionKernel::linear_ar(
            Eigen::MatrixXd::Zero(2, 2), InnovationLaw::atoms({{{1.0, 1.0}, 0.5}, {{1.0, 3.0}, 0.5}}));
        const double z2[2] = {7.0, 9.0};
        const Shock m = iid.conditional_mean(z2);
        CHECK(m[0] == doctest::Approx(1.0));
        CHECK(m[1] == doctest::Approx(2.0));

        const auto unit = TransitionKernel::log_log_ar({1.0}, InnovationLaw::atoms({{{1.0}, 0.5}, {{1.1}, 0.5}}));
        const double z[1] = {4.0};
        CHECK(unit.conditional_mean(z)[0] == doctest::Approx(4.2).epsilon(1e-14));

        const auto flat = TransitionKernel::log_log_ar({0.0}, InnovationLaw::atoms({{{1.2}, 0.5}, {{1.6}, 0.5}}));
        CHECK(flat.conditional_mean(z)[0] == doctest::Approx(1.4).epsilon(1e-14));
        CHECK(TransitionKernel::piecewise_jump().conditional_mean(z)[0] == 0.5);
    }

    TEST_CASE("closed-form means agree with quadrature") {
        const auto Q = TransitionKernel::log_log_ar({0.5}, InnovationLaw::mean_shifted_lognormal(0.3, 0.5));
        for (double v : {1.0, 2.0, 9.0}) {
            const double z[1] = {v};
            CHECK(Q.conditional_expectation(identity, z) == doctest::Approx(Q.conditional_mean(z)[0]).epsilon(1e-3));
        }
    }

    TEST_CASE("Theta by moment oracle") {
        const auto one = InnovationLaw::point_mass({1.0});
        CHECK(moment_theta(0.3, 0.4, one).value == doctest::Approx(1.0));
        const auto w = two_atoms(1.0, 4.0);
        CHECK(moment_theta(0.0, 0.0, w).value == doctest::Approx(2.5));
        CHECK(moment_theta(0.5, 0.5, w).value == doctest::Approx(2.5));
        CHECK(moment_theta(0.5, 0.0, w).value == doctest::Approx(1.5));
    }

    TEST_CASE("divergent moments are errors") {
        CHECK_THROWS_AS(moment_theta(0.0, 0.0, InnovationLaw::pareto({0.8})), Error);
    }

    TEST_CASE("Monte-Carlo Theta matches the oracle within four standard errors") {
        const auto laws = {InnovationLaw::mean_shifted_lognormal(0.4, 0.3), InnovationLaw::pareto({4.0}),
                           InnovationLaw::rectified_lognormal({0.1}, {0.5})};
        for (const auto& w : laws) {
            const MomentEstimate exact = moment_theta(0.5, 0.3, w);
            MomentOptions mc;
            mc.method = MomentOptions::Method::monte_carlo;
            mc.seed = 42;
            const MomentEstimate estimate = moment_theta(0.5, 0.3, w, mc);
            CHECK(estimate.standard_error > 0.0);
            CHECK(std::abs(estimate.value - exact.value) <= 4.0 * estimate.standard_error);
        }
    }

    TEST_CASE("sample paths") {
        const auto still = sample_path(TransitionKernel::degenerate(1), {5.0}, 3, 1);
        REQUIRE(still.size() == 4);
        for (const auto& z : still) CHECK(z[0] == 5.0);

        const auto halving = sample_path(TransitionKernel::log_log_ar({0.5}, InnovationLaw::point_mass({1.0})),
                                         {16.0}, 3, 1);
        CHECK(halving[1][0] == doctest::Approx(4.0));
        CHECK(halving[2][0] == doctest::Approx(2.0));
        CHECK(halving[3][0] == doctest::Approx(std::sqrt(2.0)));

        const auto fixed = sample_path(
            TransitionKernel::linear_ar(Eigen::MatrixXd::Constant(1, 1, 0.9), InnovationLaw::point_mass({0.1})), {1.0},
            3, 1);
        for (const auto& z : fixed) CHECK(z[0] == doctest::Approx(1.0).epsilon(1e-14));
    }

    TEST_CASE("paths are reproducible and stay above one in the log-linear regime") {
        const auto Q = TransitionKernel::log_log_ar({0.7}, InnovationLaw::mean_shifted_lognormal(0.5, 0.7));
        const auto a = sample_path(Q, {1.0}, 500, 9);
        const auto b = sample_path(Q, {1.0}, 500, 9);
        CHECK(a == b);
        for (const auto& z : a) CHECK(z[0] >= 1.0);
    }

    TEST_CASE("regime validation") {
        CHECK_THROWS_AS(
            TransitionKernel::linear_ar(Eigen::MatrixXd::Constant(1, 1, 1.1), two_atoms(1.0, 2.0)).validate(),
            ConditionError);
        CHECK_THROWS_AS(TransitionKernel::log_log_ar({1.2}, two_atoms(1.0, 2.0)).validate(), Error);
        const auto unit = TransitionKernel::log_log_ar({1.0}, two_atoms(1.0, 1.2));
        CHECK_NOTHROW(unit.validate_discount(0.9));
        CHECK_THROWS_AS(unit.validate_discount(0.95), ConditionError);
        CHECK(power_iteration_norm(Eigen::MatrixXd::Identity(3, 3) * 0.4) == doctest::Approx(0.4).epsilon(1e-9));
    }
}
