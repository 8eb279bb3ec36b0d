#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "stochdp/error.hpp"
#include "stochdp/lucas_model.hpp"
#include "toys.hpp"

using namespace stochdp;

namespace {

double marginal(double c, double sigma) { return std::pow(c, -sigma) + 1.0; }

LucasParams still_economy(double beta) {
    LucasParams p = toys::lucas_iid(0.5, beta);
    p.kernel = TransitionKernel::degenerate(1);
    return p;
}

ChainPtr chain_for(const LucasParams& p, std::vector<Shock> seeds) {
    return build_lucas_chain(p, toys::lucas_setup(std::move(seeds)));
}

}  // namespace

TEST_SUITE("lucas") {
    TEST_CASE("h under i.i.d. dividends") {
        const auto p = toys::lucas_iid();
        const double expected = 0.9 * 0.5 * (0.8 * marginal(0.8, 0.5) + 1.3 * marginal(1.3, 0.5));
        const double z[] = {1.0};
        CHECK(h_function(0, z, p) == doctest::Approx(expected).epsilon(1e-14));
        const auto chain = chain_for(p, {{0.8}, {1.3}});
        for (double h : h_table(0, p, *chain)) CHECK(h == doctest::Approx(expected).epsilon(1e-14));
    }

    TEST_CASE("phi closed forms") {
        const auto still = still_economy(0.9);
        const auto chain = chain_for(still, {{1.5}});
        const auto phi = solve_phi(0, still, *chain, {.tolerance = 1e-13});
        CHECK(phi.values[0] == doctest::Approx(1.5 * marginal(1.5, 0.5) * 0.9 / 0.1).epsilon(1e-11));

        const auto iid = toys::lucas_iid();
        const auto iid_chain = chain_for(iid, {{0.8}, {1.3}});
        const auto iid_phi = solve_phi(0, iid, *iid_chain, {.tolerance = 1e-13});
        const double h = 0.9 * 0.5 * (0.8 * marginal(0.8, 0.5) + 1.3 * marginal(1.3, 0.5));
        for (double v : iid_phi.values) CHECK(v == doctest::Approx(h / 0.1).epsilon(1e-11));
    }

    TEST_CASE("phi matches the truncated Neumann series") {
        LucasParams p = toys::lucas_iid();
        Eigen::MatrixXd B(1, 1);
        B << 0.4;
        p.kernel = TransitionKernel::linear_ar(B, InnovationLaw::atoms({{{0.8}, 0.5}, {{1.3}, 0.5}}));
        LucasSetup s = toys::lucas_setup({{1.5}});
        s.chain.depth = 4;
        const auto chain = build_lucas_chain(p, s);
        REQUIRE(chain->size() > 4);
        const auto h = h_table(0, p, *chain);
        const auto phi = solve_phi(0, p, *chain, {.tolerance = 1e-13});
        const auto series = oracle::neumann_series(h, toys::dense(*chain), p.beta, 600);
        CHECK(oracle::sup_diff(phi.values, series) <= 1e-8);
    }

    TEST_CASE("affine solve is linear in h and contracts at rate beta") {
        const auto p = toys::lucas_iid();
        const auto chain = chain_for(p, {{0.8}, {1.3}});
        const std::vector<double> h = {0.3, 1.7};
        const std::vector<double> h2 = {0.6, 3.4};
        const auto a = solve_affine(h, 0.9, *chain, {.tolerance = 1e-13});
        const auto b = solve_affine(h2, 0.9, *chain, {.tolerance = 1e-13});
        for (std::size_t j = 0; j < h.size(); ++j) CHECK(b.values[j] == doctest::Approx(2.0 * a.values[j]).epsilon(1e-11));
        const auto& r = a.report.residual_history;
        REQUIRE(r.size() > 10);
        for (std::size_t t = 1; t + 1 < r.size(); ++t) {
            if (r[t - 1] > 1e-10) CHECK(r[t] <= 0.9 * r[t - 1] + 1e-14);
        }
    }

    TEST_CASE("prices from phi") {
        const auto p = toys::lucas_iid();
        const auto chain = std::make_shared<const ShockChain>(ShockChain::from_matrix({{1.0}, {4.0}}, {{1, 0}, {0, 1}}));
        const auto price = price_from_phi({{2.0, 3.0}}, p, chain);
        CHECK(price.price[0][0] == doctest::Approx(1.0));
        CHECK(price.price[0][1] == doctest::Approx(3.0 / 1.5));

        LucasParams flat = p;
        flat.utility.du = [](double) { return 0.5; };
        CHECK_THROWS_AS(price_from_phi({{2.0, 3.0}}, flat, chain), ConditionError);
        CHECK_THROWS_AS(price_from_phi({{2.0}}, p, chain), ConfigError);
    }

    TEST_CASE("Euler equation holds at the solved prices") {
        const auto solved = solve_lucas_prices(toys::lucas_iid(), toys::lucas_setup({{0.8}, {1.3}}));
        CHECK(solved.euler_residual <= 1e-6);
        CHECK(solved.bound_slack >= 0.0);
    }

    TEST_CASE("price bound constants") {
        const auto p = toys::lucas_iid();
        const auto chain = chain_for(p, {{0.8}, {1.3}});
        const auto bound = price_bound_constants(p, *chain);
        const double delta = 0.5 * std::pow(0.5, 1.0);
        CHECK(bound.slope[0] == doctest::Approx(2.0));
        CHECK(bound.intercept == doctest::Approx((2.0 * 1.05 + delta) / 0.1));
        CHECK(bound.price_bound[0] == doctest::Approx(2.0 * 0.8 + bound.intercept));

        LucasParams q = p;
        q.beta = 0.8;
        Eigen::MatrixXd B(1, 1);
        B << 0.5;
        q.kernel = TransitionKernel::linear_ar(B, InnovationLaw::atoms({{{0.8}, 0.5}, {{1.3}, 0.5}}));
        const auto q_chain = chain_for(q, {{1.0}});
        CHECK(price_bound_constants(q, *q_chain).slope[0] == doctest::Approx(2.0 / 0.6));
    }

    TEST_CASE("price bound holds in both regimes") {
        const auto linear = solve_lucas_prices(toys::lucas_iid(), toys::lucas_setup({{0.8}, {1.3}}));
        CHECK(linear.bound_slack >= 0.0);
        CHECK(price_bound_slack(linear.price, linear.bound, true) >= 0.0);

        LucasParams p = toys::lucas_iid(0.5, 0.9);
        p.kernel = TransitionKernel::log_log_ar({0.5}, InnovationLaw::atoms({{{1.0}, 0.5}, {{1.2}, 0.5}}));
        LucasSetup s = toys::lucas_setup({{1.0}});
        s.chain.depth = 3;
        const auto loglinear = solve_lucas_prices(p, s);
        CHECK(loglinear.bound.regime == LucasRegime::log_linear);
        CHECK(loglinear.bound_slack >= 0.0);
        CHECK(loglinear.euler_residual <= 1e-6);
    }

    TEST_CASE("unit-root dividends with beta E w >= 1 are refused") {
        LucasParams p = toys::lucas_iid(0.5, 0.9);
        p.kernel = TransitionKernel::log_log_ar({1.0}, InnovationLaw::atoms({{{1.0}, 0.5}, {{1.3}, 0.5}}));
        CHECK_THROWS_AS(solve_lucas_prices(p, toys::lucas_setup({{1.0}})), ConditionError);
    }

    TEST_CASE("household holds the unit endowment") {
        const auto solved = solve_lucas(toys::lucas_iid(), toys::lucas_setup({{0.8}, {1.3}}));
        REQUIRE(solved.report.converged);
        CHECK(solved.unit_holdings_gap <= 1e-6);
        CHECK(unit_holdings_gap(solved.policy) == solved.unit_holdings_gap);
        CHECK(solved.ledger.psi_slack >= 0.0);
        CHECK(solved.ledger.containment_slack >= -1e-9);
    }

    TEST_CASE("myopic household value is psi") {
        const auto solved = solve_lucas(toys::lucas_iid(0.5, 0.0), toys::lucas_setup({{0.8}, {1.3}}));
        CHECK(solved.value.max_abs_difference(solved.household->psi()) <= 1e-12);
    }

    TEST_CASE("household values match exhaustive DP") {
        const auto solved = solve_lucas(toys::lucas_iid(), toys::lucas_setup({{0.8}, {1.3}}));
        const auto& chain = *solved.chain;
        oracle::HouseholdInput in;
        in.sigma = 0.5;
        in.beta = 0.9;
        in.x = solved.value.grid()->axis(0);
        for (std::size_t j = 0; j < chain.size(); ++j) {
            in.z.push_back(chain.node(j)[0]);
            in.price.push_back(solved.price.price[0][j]);
        }
        in.P = toys::dense(chain);
        const auto expected = oracle::household_values(in);
        const std::vector<double> got(solved.value.values().begin(), solved.value.values().end());
        CHECK(oracle::sup_diff(got, expected) <= 1e-6);
    }

    TEST_CASE("utility audit") {
        const auto p = toys::lucas_iid();
        const auto chain = chain_for(p, {{0.8}, {1.3}});
        const auto ok = audit_utility(p, *chain);
        CHECK(ok.passed);
        CHECK(ok.zero_value == 0.0);
        CHECK(ok.growth_slack >= 0.0);
        CHECK(ok.floor_slack >= 0.0);

        LucasParams shifted = p;
        shifted.utility.u = [](double c) { return c + 1.0; };
        CHECK_FALSE(audit_utility(shifted, *chain).passed);
    }
}
