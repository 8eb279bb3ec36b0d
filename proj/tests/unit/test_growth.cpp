#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "stochdp/error.hpp"
#include "stochdp/growth_model.hpp"
#include "toys.hpp"

using namespace stochdp;

namespace {

GrowthParams cobb_douglas(double A, double alpha, double delta_k, double delta_h) {
    GrowthParams p;
    p.A = A;
    p.alpha = alpha;
    p.delta_k = delta_k;
    p.delta_h = delta_h;
    p.sigma = 0.0;
    p.beta = 0.9;
    p.W = InnovationLaw::point_mass({1.0});
    return p;
}

}  // namespace

TEST_SUITE("growth") {
    TEST_CASE("gamma constant") {
        CHECK(gamma_const(cobb_douglas(1.0, 0.5, 1.0, 1.0)) == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(gamma_const(cobb_douglas(0.2, 0.5, 1.0, 1.0)) == doctest::Approx(0.1).epsilon(1e-15));
        const double logs = std::exp(0.3 * std::log(0.3) + 0.7 * std::log(0.7)) + 0.9;
        CHECK(gamma_const(cobb_douglas(1.0, 0.3, 0.1, 0.2)) == doctest::Approx(logs).epsilon(1e-15));
        CHECK(gamma_const(cobb_douglas(1.0, 0.3, 0.1, 0.2)) == doctest::Approx(1.4428).epsilon(1e-4));
    }

    TEST_CASE("growth condition") {
        const auto ok = check_growth_condition(cobb_douglas(1.0, 0.5, 1.0, 1.0));
        CHECK(ok.value == doctest::Approx(0.45));
        CHECK(ok.holds);
        auto p = cobb_douglas(0.2, 0.5, 0.0, 0.0);
        p.beta = 0.99;
        const auto bad = check_growth_condition(p);
        CHECK(bad.value == doctest::Approx(1.089));
        CHECK_FALSE(bad.holds);
    }

    TEST_CASE("lognormal preset condition agrees with Monte Carlo") {
        GrowthParams p = toys::growth_params();
        p.rho = 0.4;
        p.W = InnovationLaw::mean_shifted_lognormal(0.3, 0.4);
        const auto exact = check_growth_condition(p);
        MomentOptions mc;
        mc.method = MomentOptions::Method::monte_carlo;
        mc.seed = 99;
        const auto sampled = check_growth_condition(p, mc);
        const double scale = p.beta * std::pow(exact.gamma, 1.0 - p.sigma);
        CHECK(std::abs(sampled.value - exact.value) <= 4.0 * scale * sampled.theta.standard_error);
    }

    TEST_CASE("closed-form radius") {
        const auto p = cobb_douglas(0.2, 0.5, 1.0, 1.0);
        const auto single = CompactSet::points({{1.0, 1.0}});
        CHECK(growth_R0(p, single, 1.0, 1.0) == doctest::Approx(0.2 / 0.91).epsilon(1e-14));
        CHECK(growth_R0(p, single, 3.7, 1.0) == doctest::Approx(0.2 / 0.91).epsilon(1e-14));
        CHECK(growth_R0(p, CompactSet::points({{0.0, 0.0}}), 2.0, 1.0) == 0.0);

        auto bad = cobb_douglas(0.2, 0.5, 0.0, 0.0);
        bad.beta = 0.99;
        CHECK_THROWS_AS(growth_R0(bad, single, 1.0, 1.0), ConditionError);
    }

    TEST_CASE("bound function l0") {
        const auto p = cobb_douglas(0.2, 0.5, 1.0, 1.0);
        CHECK(growth_l0(p, 1.0, 4.0, 1.5) == doctest::Approx(1.5 * g_bound(p, 1.0, 4.0)));
        CHECK(growth_l0(p, 0.0, 0.0, 3.0) == 0.0);
    }

    TEST_CASE("Lagrange relaxation") {
        const auto zero = lagrange_relaxation_optimum(cobb_douglas(1.0, 0.5, 1.0, 1.0), 0.0, 0.0, 1.0);
        CHECK(zero.k_next == 0.0);
        CHECK(zero.h_next == 0.0);
        CHECK(zero.value == 0.0);

        const auto p = cobb_douglas(1.0, 0.5, 0.0, 0.0);
        REQUIRE(g_bound(p, 2.0 / 3.0, 2.0 / 3.0) == doctest::Approx(2.0));
        const auto even = lagrange_relaxation_optimum(p, 2.0 / 3.0, 2.0 / 3.0, 1.0);
        CHECK(even.k_next == doctest::Approx(1.0));
        CHECK(even.h_next == doctest::Approx(1.0));
    }

    TEST_CASE("relaxed optimum dominates a grid search of the budget simplex") {
        GrowthParams p = toys::growth_params();
        p.delta_h = 0.2;
        std::mt19937_64 rng(12);
        std::uniform_real_distribution<double> u(0.05, 10.0);
        std::uniform_real_distribution<double> zu(1.0, 1.5);
        for (int trial = 0; trial < 20; ++trial) {
            const double k = u(rng);
            const double h = u(rng);
            const double z = zu(rng);
            const auto opt = lagrange_relaxation_optimum(p, k, h, z);
            const double budget = z * g_bound(p, k, h);
            double best = 0.0;
            for (int i = 0; i <= 400; ++i) {
                const double kn = budget * i / 400.0;
                best = std::max(best, std::pow(g_bound(p, kn, budget - kn), 1.0 - p.sigma));
            }
            CHECK(opt.value >= best - 1e-9);
            CHECK(opt.value == doctest::Approx(std::pow(gamma_const(p) * z * g_bound(p, k, h), 1.0 - p.sigma)));
        }
    }

    TEST_CASE("deterministic one-capital toy matches exhaustive DP") {
        GrowthParams p = toys::growth_params();
        p.W = InnovationLaw::point_mass({1.0});
        GrowthSetup s = toys::growth_setup(ActionMode::grid, 30);
        s.z_seeds = {1.0};
        const auto solved = solve_growth(p, s);
        REQUIRE(solved.report.converged);

        oracle::GrowthInput in;
        in.k = s.k_axis;
        in.z = {1.0};
        in.P = {{1.0}};
        const auto expected = oracle::growth_values(in);
        CHECK(oracle::sup_diff(toys::growth_values_in_oracle_order(solved.value, in.z), expected) <= 1e-6);
    }

    TEST_CASE("myopic growth value is psi") {
        GrowthParams p = toys::growth_params();
        p.beta = 0.0;
        const auto solved = solve_growth(p, toys::growth_setup(ActionMode::continuous, 15));
        CHECK(solved.value.max_abs_difference(solved.model.op->psi()) == 0.0);
    }

    TEST_CASE("solve refuses a failing growth condition") {
        GrowthParams p = toys::growth_params();
        p.beta = 0.9;
        CHECK_THROWS_AS(solve_growth(p, toys::growth_setup(ActionMode::grid, 10)), ConditionError);
    }

    TEST_CASE("two-capital model: feasibility, monotone value and containment") {
        GrowthParams p = toys::growth_params();
        p.delta_h = 0.1;
        p.beta = 0.75;
        GrowthSetup s;
        s.k_axis = StateGrid::log_axis(0.1, 10.0, 6);
        s.h_axis = StateGrid::log_axis(0.1, 10.0, 6);
        s.z_seeds = {1.0, 1.2};
        s.tolerance = 1e-8;
        const auto solved = solve_growth(p, s);
        REQUIRE(solved.report.converged);
        const auto& grid = *solved.model.op->grid();
        const auto& chain = *solved.model.op->shocks();
        for (std::size_t iz = 0; iz < chain.size(); ++iz) {
            const double z = chain.node(iz)[0];
            for (std::size_t ix = 0; ix < grid.size(); ++ix) {
                const auto x = grid.point(ix);
                const auto y = solved.policy.action(ix, iz);
                CHECK(y[0] + y[1] <= growth_resources(p, x[0], x[1], z) + 1e-9);
                const auto m = grid.multi_index(ix);
                if (m[0] + 1 < grid.extent(0)) {
                    const std::size_t up[2] = {m[0] + 1, m[1]};
                    CHECK(solved.value.at(grid.flat_index(up), iz) >= solved.value.at(ix, iz) - 1e-9);
                }
                if (m[1] + 1 < grid.extent(1)) {
                    const std::size_t up[2] = {m[0], m[1] + 1};
                    CHECK(solved.value.at(grid.flat_index(up), iz) >= solved.value.at(ix, iz) - 1e-9);
                }
            }
        }
        ValueFunction magnitude = solved.value;
        for (double& v : magnitude.values()) v = std::abs(v);
        const auto seminorms = solved.model.op->family_seminorms(magnitude, solved.model.monitored);
        CHECK(max_excess(seminorms, solved.ledger.R0) <= 1e-6);
    }
}
