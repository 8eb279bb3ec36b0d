#include <doctest.h>

#include <cmath>
#include <random>

#include "stochdp/error.hpp"
#include "stochdp/bound_ledger.hpp"
#include "stochdp/growth_model.hpp"
#include "toys.hpp"

using namespace stochdp;

namespace {

GridPtr line(std::vector<double> nodes) {
    return std::make_shared<const StateGrid>(std::vector<std::vector<double>>{std::move(nodes)});
}

std::shared_ptr<const BellmanOperator> bounded_model(double reward, double beta) {
    const auto g = line(StateGrid::uniform_axis(0.0, 1.0, 5));
    ModelSpec spec;
    spec.beta = beta;
    spec.grid = g;
    spec.shocks = std::make_shared<const ShockChain>(ShockChain::build(TransitionKernel::degenerate(1), {{1.0}}));
    spec.reward = [reward](auto, auto, auto) { return reward; };
    spec.feasible = [](auto, auto) { return ActionSet::box({0.0}, {1.0}); };
    return std::make_shared<const BellmanOperator>(spec);
}

BoundFn constant(double c) {
    return [c](std::span<const double>, std::span<const double>) { return c; };
}

struct GrowthCase {
    GrowthModel model;
    BoundLedger ledger;
    double alpha_beta = 0.0;
};

GrowthCase growth_case(std::size_t k_nodes = 20) {
    GrowthCase g{build_growth(toys::growth_params(), toys::growth_setup(ActionMode::grid, k_nodes)), {}, 0.0};
    g.ledger = verify_drift_bound(g.model.l0, *g.model.op, g.model.condition.alpha_drift, g.model.monitored);
    g.alpha_beta = g.model.condition.alpha_drift * g.model.params.beta;
    return g;
}

}  // namespace

TEST_SUITE("bound_ledger") {
    TEST_CASE("constant bound with alpha = 1") {
        const auto T = bounded_model(0.5, 0.8);
        const std::vector<CompactSet> Ks = {CompactSet::hull(*T->grid())};
        const BoundLedger ledger = verify_drift_bound(constant(1.0), *T, 1.0, Ks);
        CHECK(ledger.verified);
        for (double v : ledger.R0.values()) CHECK(v == doctest::Approx(1.0 / 0.2).epsilon(1e-13));
    }

    TEST_CASE("zero bound for a zero reward") {
        const auto T = bounded_model(0.0, 0.8);
        const BoundLedger ledger = verify_drift_bound(constant(0.0), *T, 1.0, {CompactSet::hull(*T->grid())});
        CHECK(ledger.R0.max() == 0.0);
    }

    TEST_CASE("failures") {
        const auto T = bounded_model(2.0, 0.8);
        const std::vector<CompactSet> Ks = {CompactSet::hull(*T->grid())};
        CHECK_THROWS_AS(verify_drift_bound(constant(1.0), *T, 1.0, Ks), ConditionError);
        const BoundLedger audit = audit_drift_bound(constant(1.0), *T, 1.0, Ks);
        CHECK_FALSE(audit.verified);
        CHECK(audit.psi_slack == doctest::Approx(-1.0));
        CHECK_THROWS_AS(verify_drift_bound(constant(3.0), *T, 1.25, Ks), ConditionError);
        CHECK_THROWS_AS(verify_drift_bound(constant(3.0), *T, 0.9, Ks), ConditionError);
    }

    TEST_CASE("geometric terms") {
        const auto T = bounded_model(0.5, 0.5);
        const BoundLedger ledger = verify_drift_bound(constant(8.0), *T, 1.0, {CompactSet::hull(*T->grid())});
        CHECK(lt_term(ledger, 0).max_abs_difference(ledger.l0) == 0.0);
        const ValueFunction third = lt_term(ledger, 3);
        for (double v : third.values()) CHECK(v == doctest::Approx(1.0));
    }

    TEST_CASE("growth toy ledger matches the closed-form radius") {
        const auto g = growth_case();
        const auto& p = g.model.params;
        CHECK(g.ledger.verified);
        const std::size_t nx = g.model.op->nx();
        for (std::size_t k = 0; k < g.model.monitored.size(); ++k) {
            for (std::size_t iz = 0; iz < g.model.op->nz(); ++iz) {
                const double z = g.model.op->shocks()->node(iz)[0];
                const double closed = growth_R0(p, g.model.monitored[k], z, g.model.condition.theta.value, true, 1.0);
                CHECK(g.ledger.R0(nx + k, iz) == doctest::Approx(closed).epsilon(1e-12));
            }
        }
    }

    TEST_CASE("partial sums increase to R0") {
        const auto g = growth_case();
        SeminormTable sum(g.ledger.r0.rows(), g.ledger.r0.cols(), 0.0);
        double previous = -1.0;
        for (std::size_t t = 0; t < 400; ++t) {
            const SeminormTable term = g.model.op->family_seminorms(lt_term(g.ledger, t), g.model.monitored);
            sum += term;
            CHECK(sum.max() >= previous);
            previous = sum.max();
        }
        CHECK(max_excess(sum, g.ledger.R0) <= 1e-9 * g.ledger.R0.max());
        CHECK(max_excess(g.ledger.R0, sum) <= 1e-9 * g.ledger.R0.max());
    }

    TEST_CASE("residual certificates") {
        const auto T = bounded_model(0.5, 0.5);
        const BoundLedger ledger = verify_drift_bound(constant(1.0), *T, 1.0, {CompactSet::hull(*T->grid())});
        const CopOperator half = [](const SeminormTable& p) { return 0.5 * p; };
        CHECK(max_excess(residual_certificate(ledger, half, 0), ledger.R0) == 0.0);
        const SeminormTable four = residual_certificate(ledger, half, 4);
        for (std::size_t i = 0; i < four.size(); ++i) CHECK(four[i] == doctest::Approx(ledger.R0[i] / 16.0));

        const auto g = growth_case();
        const CopOperator L = g.model.op->cop(g.model.monitored);
        const auto steps = static_cast<std::size_t>(
            std::ceil(std::log(1e-6 / g.ledger.R0.max()) / std::log(g.alpha_beta)));
        SeminormTable previous = g.ledger.R0;
        for (std::size_t t = 1; t <= steps; ++t) {
            const SeminormTable next = L(previous);
            CHECK(max_excess(next, previous) <= 0.0);
            previous = next;
        }
        CHECK(previous.max() <= 1e-6);
    }

    TEST_CASE("the ball around zero absorbs itself") {
        const auto g = growth_case();
        const BellmanOperator& T = *g.model.op;
        const auto& Ks = g.model.monitored;
        const SeminormTable& R0 = g.ledger.R0;
        const auto inside = [&](const ValueFunction& f) {
            ValueFunction magnitude = f;
            for (double& v : magnitude.values()) v = std::abs(v);
            return max_excess(T.family_seminorms(magnitude, Ks), R0);
        };
        CHECK(inside(T.apply(T.zero())) <= 1e-9);

        SolveOptions options;
        options.tolerance = 1e-10;
        options.monitored = Ks;
        const auto solved = solve_bellman(T, options);
        CHECK(inside(solved.value) <= 1e-9);
        CHECK(inside(T.apply(solved.value)) <= 1e-9);

        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int trial = 0; trial < 20; ++trial) {
            ValueFunction f = g.ledger.l0;
            for (double& v : f.values()) v *= u(rng);
            REQUIRE(inside(f) <= 1e-12);
            CHECK(inside(T.apply(f)) <= 1e-9 * R0.max());
        }
    }

    TEST_CASE("series bound p(l0) + L R0 <= R0") {
        const auto g = growth_case();
        const CopOperator L = g.model.op->cop(g.model.monitored);
        const SeminormTable lhs = g.ledger.r0 + L(g.ledger.R0);
        CHECK(max_excess(lhs, g.ledger.R0) <= 1e-10 * g.ledger.R0.max());
    }
}
