#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "stochdp/error.hpp"
#include "stochdp/bellman.hpp"
#include "stochdp/bound_ledger.hpp"
#include "stochdp/contraction.hpp"
#include "stochdp/finite_dp.hpp"
#include "toys.hpp"

using namespace stochdp;

namespace {

CopOperator scale(double theta) {
    return [theta](const SeminormTable& p) { return theta * p; };
}

SeminormTable random_table(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double hi = 5.0) {
    std::uniform_real_distribution<double> u(0.0, hi);
    SeminormTable t(rows, cols);
    for (double& v : t.values()) v = u(rng);
    return t;
}

// Two states, two actions: reward r[s][a], deterministic moves next[s][a].
struct TinyDp {
    double r[2][2] = {{1.0, 0.0}, {2.0, 0.5}};
    int next[2][2] = {{0, 1}, {0, 1}};
    double beta = 0.9;
};

}  // namespace

TEST_SUITE("contraction") {
    TEST_CASE("affine contraction on the real line reaches 2") {
        FixedPointOptions options;
        options.tolerance = 1e-12;
        auto [x, report] = iterate_fixed_point([](double x) { return 0.5 * x + 1.0; }, absolute_value_metric(), 0.0,
                                               options);
        CHECK(report.converged);
        CHECK(x == doctest::Approx(2.0).epsilon(1e-11));
    }

    TEST_CASE("identity map converges immediately") {
        auto [x, report] = iterate_fixed_point([](double x) { return x; }, absolute_value_metric(), 3.25);
        CHECK(report.converged);
        CHECK(report.iterations == 0);
        CHECK(x == 3.25);
    }

    TEST_CASE("non-convergence is reported, not thrown") {
        FixedPointOptions options;
        options.max_iter = 5;
        auto [x, report] = iterate_fixed_point([](double x) { return x + 1.0; }, absolute_value_metric(), 0.0,
                                               options);
        CHECK_FALSE(report.converged);
        CHECK(report.iterations == 5);
        CHECK(report.stop_reason == "max_iter reached");
        CHECK(std::isfinite(x));
    }

    TEST_CASE("non-finite iterate aborts with the iteration named") {
        CHECK_THROWS_AS(iterate_fixed_point([](double) { return NAN; }, absolute_value_metric(), 0.0),
                        NumericalError);
        FixedPointOptions zero_tolerance;
        zero_tolerance.tolerance = 0.0;
        CHECK_THROWS_AS(iterate_fixed_point([](double x) { return x; }, absolute_value_metric(), 0.0, zero_tolerance),
                        ConfigError);
    }

    TEST_CASE("two-state Bellman backup matches the best policy evaluation") {
        const TinyDp dp;
        PseudometricFamily<std::vector<double>> sup;
        sup.distances = [](const std::vector<double>& a, const std::vector<double>& b) {
            return SeminormTable::scalar(std::max(std::abs(a[0] - b[0]), std::abs(a[1] - b[1])));
        };
        const auto backup = [&](const std::vector<double>& v) {
            std::vector<double> out(2);
            for (int s = 0; s < 2; ++s) {
                out[s] = std::max(dp.r[s][0] + dp.beta * v[dp.next[s][0]], dp.r[s][1] + dp.beta * v[dp.next[s][1]]);
            }
            return out;
        };
        FixedPointOptions options;
        options.tolerance = 1e-12;
        options.max_iter = 100000;
        auto [v, report] = iterate_fixed_point(backup, sup, std::vector<double>{0.0, 0.0}, options);
        REQUIRE(report.converged);

        // Enumerate the four stationary policies and solve each 2x2 system by Cramer's rule.
        double best[2] = {-1e300, -1e300};
        for (int a0 = 0; a0 < 2; ++a0) {
            for (int a1 = 0; a1 < 2; ++a1) {
                const int a[2] = {a0, a1};
                double m[2][2] = {{1.0, 0.0}, {0.0, 1.0}};
                for (int s = 0; s < 2; ++s) m[s][dp.next[s][a[s]]] -= dp.beta;
                const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
                const double r0 = dp.r[0][a0];
                const double r1 = dp.r[1][a1];
                const double v0 = (r0 * m[1][1] - m[0][1] * r1) / det;
                const double v1 = (m[0][0] * r1 - m[1][0] * r0) / det;
                best[0] = std::max(best[0], v0);
                best[1] = std::max(best[1], v1);
            }
        }
        CHECK(std::abs(v[0] - best[0]) <= 1e-10);
        CHECK(std::abs(v[1] - best[1]) <= 1e-10);
    }

    TEST_CASE("R0 series of scalar COPs") {
        const SeminormTable ones(2, 3, 1.0);
        const SeminormTable r = cop_series_R0(scale(0.5), ones, 1e-14, 1000);
        for (double v : r.values()) CHECK(v == doctest::Approx(2.0).epsilon(1e-12));
        const SeminormTable sevens = cop_series_R0(scale(0.0), SeminormTable(1, 1, 7.0), 1e-14, 1000);
        CHECK(sevens[0] == 7.0);
    }

    TEST_CASE("R0 series flags divergence") {
        CHECK_THROWS_AS(cop_series_R0(scale(1.0), SeminormTable(1, 2, 1.0), 1e-12, 1000), DivergenceError);
        CHECK_THROWS_AS(cop_series_R0(scale(0.5), SeminormTable(1, 1, -1.0), 1e-12, 1000), Error);
    }

    TEST_CASE("R0 series of the Bellman COP equals direct accumulation") {
        const auto T = toys::cube_operator();
        const auto Ks = toys::cube_monitored();
        const CopOperator L = T->cop(Ks);
        std::mt19937_64 rng(17);
        const SeminormTable r0 = random_table(T->family_rows(Ks.size()), T->nz(), rng);
        SeriesOptions options;
        options.tail_tol = 1e-14;
        const SeminormTable R0 = cop_series_R0(L, r0, options);

        SeminormTable term = r0;
        SeminormTable sum = r0;
        for (int t = 1; t <= 400; ++t) {
            term = L(term);
            sum += term;
        }
        CHECK(max_excess(R0, sum) <= 1e-9);
        CHECK(max_excess(sum, R0) <= 1e-9);
    }

    TEST_CASE("geometric tail predicate") {
        const SeminormTable one(1, 1, 1.0);
        CHECK(check_geometric_tail(scale(0.5), one, 0, one, 0.5));
        CHECK_FALSE(check_geometric_tail(scale(0.5), one, 0, one, 0.4));
        CHECK(check_geometric_tail(scale(0.5), SeminormTable(1, 1, 4.0), 2, one, 0.5));
    }

    TEST_CASE("geometric tail holds for the growth COP once the drift is verified") {
        const auto params = toys::growth_params();
        const auto model = build_growth(params, toys::growth_setup(ActionMode::grid, 20));
        const BoundLedger ledger = verify_drift_bound(model.l0, *model.op, model.condition.alpha_drift,
                                                       model.monitored);
        const CopOperator L = model.op->cop(model.monitored);
        CHECK(check_geometric_tail(L, ledger.r0, 0, ledger.r0, model.condition.alpha_drift * params.beta));
    }

    TEST_CASE("ball membership") {
        const auto D = absolute_value_metric();
        CHECK(ball_membership(1.5, 1.5, SeminormTable(1, 1, 0.0), D));
        CHECK_FALSE(ball_membership(3.0, 0.0, SeminormTable(1, 1, 2.0), D));
        CHECK(ball_slack(3.0, 0.0, SeminormTable(1, 1, 2.0), D) == doctest::Approx(-1.0));
    }

    TEST_CASE("solved growth value lies in the ball around zero") {
        const auto params = toys::growth_params();
        const auto model = build_growth(params, toys::growth_setup(ActionMode::grid, 20));
        const BoundLedger ledger = verify_drift_bound(model.l0, *model.op, model.condition.alpha_drift,
                                                       model.monitored);
        SolveOptions options;
        options.tolerance = 1e-10;
        options.monitored = model.monitored;
        const auto solved = solve_bellman(*model.op, options);
        const auto D = model.op->metric_family(model.monitored);
        CHECK(ball_membership(solved.value, model.op->zero(), ledger.R0, D));
    }

    TEST_CASE("residuals stay below the COP bound sequence") {
        const auto T = toys::cube_operator();
        SolveOptions options;
        options.monitored = toys::cube_monitored();
        options.tolerance = 1e-10;
        const auto solved = solve_bellman(*T, options);
        CHECK(solved.report.converged);
        CHECK(solved.report.bound_violations == 0);
        CHECK(solved.report.worst_bound_excess <= 1e-8);
    }

    TEST_CASE("uniqueness probe from two starting points") {
        const auto T = toys::cube_operator();
        SolveOptions a;
        a.tolerance = 1e-10;
        SolveOptions b = a;
        ValueFunction start = T->zero();
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        for (double& v : start.values()) v = u(rng);
        b.initial = start;
        const auto va = solve_bellman(*T, a);
        const auto vb = solve_bellman(*T, b);
        const double tol = a.tolerance * T->beta() / (1.0 - T->beta());
        CHECK(va.value.max_abs_difference(vb.value) <= 2.0 * tol);
    }

    TEST_CASE("COP axioms on random tables") {
        const auto T = toys::cube_operator();
        const auto Ks = toys::cube_monitored();
        const CopOperator L = T->cop(Ks);
        const std::size_t rows = T->family_rows(Ks.size());
        const SeminormTable zero(rows, T->nz(), 0.0);
        CHECK(L(zero).max() == 0.0);
        std::mt19937_64 rng(5);
        for (int trial = 0; trial < 100; ++trial) {
            const SeminormTable p = random_table(rows, T->nz(), rng);
            SeminormTable q = p;
            const SeminormTable bump = random_table(rows, T->nz(), rng, 1.0);
            q += bump;
            CHECK(dominated_by(L(p), L(q), 1e-10));
            CHECK(dominated_by(L(p + bump), L(p) + L(bump), 1e-10));
        }
    }
}
