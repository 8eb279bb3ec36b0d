// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "config.hpp"
#include "models.hpp"
#include "oracles.hpp"
#include "runner.hpp"
#include "stochdp/bellman.hpp"
#include "stochdp/counterexample.hpp"
#include "stochdp/growth_model.hpp"
#include "stochdp/io.hpp"
#include "stochdp/lucas_model.hpp"
#include "toys.hpp"

using namespace stochdp;
namespace fs = std::filesystem;

namespace {

const fs::path source_dir{STOCHDP_SOURCE_DIR};

struct Outcome {
    bool passed = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) { return format_double(v); }

const GrowthSolution& growth_toy() {
    static const GrowthSolution solved = solve_growth(toys::growth_params(), toys::growth_setup(ActionMode::grid, 50));
    return solved;
}

// 1. Counterexample closed forms, tolerance 1e-9, under one second.
Outcome counterexample_values() {
    const auto start = Clock::now();
    const double tol = 1e-9;
    double worst = 0.0;
    const auto id = [](double z) { return z; };
    worst = std::max(worst, std::abs(markov_image(id, 0.0)));
    for (double z : {1e-6, 0.01, 0.5, 0.99, 3.0}) worst = std::max(worst, std::abs(markov_image(id, z) - 0.5));
    worst = std::max(worst, std::abs(currency_value(1.0, 0.0, 1.0, 0.5) - 3.0));
    worst = std::max(worst, std::abs(currency_value(0.0, 1.0, 1.0, 0.5) - 3.5));
    worst = std::max(worst, std::abs(currency_value_exact(0.0, 1.0, 1.0, 0.5) - 65.0 / 19.0));

    const auto displayed = [](double m, double z) { return currency_value(m, z, 1.0, 0.5); };
    const auto exact = [](double m, double z) { return currency_value_exact(m, z, 1.0, 0.5); };
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> mu(0.0, 10.0);
    std::uniform_real_distribution<double> high(1.0, 20.0);
    std::uniform_real_distribution<double> any(0.0, 3.0);
    for (int s = 0; s < 50; ++s) {
        const double m = mu(rng);
        const double z = s % 5 == 0 ? 0.0 : high(rng);
        worst = std::max(worst, std::abs(currency_residual(displayed, m, z, 1.0, 0.5)));
        const double w = s % 10 == 0 ? 0.0 : any(rng);
        worst = std::max(worst, std::abs(currency_residual(exact, m, w, 1.0, 0.5)));
    }
    const double elapsed = seconds_since(start);
    return {worst <= tol && elapsed < 1.0,
            "max error " + fmt(worst) + " (tol 1e-9), " + fmt(elapsed) + " s (limit 1 s)"};
}

// 2. d(Tf, Tg) <= L d(f, g) on 50 random pairs for the 3-D toy, tolerance 1e-8, under 60 s.
Outcome contraction_inequality() {
    const auto start = Clock::now();
    const auto T = toys::cube_operator();
    const auto Ks = toys::cube_monitored();
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    double worst = -1.0;
    for (int trial = 0; trial < 50; ++trial) {
        ValueFunction f = T->zero();
        ValueFunction g = T->zero();
        for (double& v : f.values()) v = u(rng);
        for (double& v : g.values()) v = u(rng);
        const auto lhs = T->distances(T->apply(f), T->apply(g), Ks);
        const auto rhs = T->cop_apply(T->distances(f, g, Ks), Ks);
        worst = std::max(worst, max_excess(lhs, rhs));
    }
    const double elapsed = seconds_since(start);
    return {worst <= 1e-8 && elapsed < 60.0,
            "worst excess " + fmt(worst) + " (tol 1e-8), " + fmt(elapsed) + " s (limit 60 s)"};
}

// 3. Growth toy on 50 capital x 8 shock nodes against exhaustive value iteration, tolerance 1e-6.
Outcome growth_against_oracle() {
    const auto& solved = growth_toy();
    const auto setup = toys::growth_setup(ActionMode::grid, 50);
    const auto expected = oracle::growth_values(toys::growth_oracle_input(setup));
    const double diff =
        oracle::sup_diff(toys::growth_values_in_oracle_order(solved.value, toys::growth_z_nodes()), expected);
    return {solved.report.converged && diff <= 1e-6, "sup difference " + fmt(diff) + " (tol 1e-6)"};
}

// 4. Simulated discounted returns at 5 interior states within 4 standard errors plus truncation.
Outcome monte_carlo_identity() {
    const auto& solved = growth_toy();
    const auto& T = *solved.model.op;
    const auto& grid = *T.grid();
    SimulationOptions options;
    options.paths = 10000;
    options.horizon = 45;
    options.seed = 7;
    const std::size_t nodes[5][2] = {{10, 0}, {18, 1}, {25, 2}, {32, 4}, {40, 7}};
    double worst_ratio = 0.0;
    bool ok = true;
    for (const auto& n : nodes) {
        const auto x = grid.point(n[0]);
        const auto sim = simulate_policy_value(T, solved.policy, x, n[1], options);
        const double allowance = 4.0 * sim.standard_error + sim.discount_tail * solved.value.max_abs();
        const double gap = std::abs(sim.mean - solved.value.at(n[0], n[1]));
        ok = ok && gap <= allowance;
        worst_ratio = std::max(worst_ratio, gap / allowance);
    }
    return {ok, "worst gap / (4 se + truncation) = " + fmt(worst_ratio) + " (limit 1), 10000 paths, horizon 45"};
}

cli::RunResult run_config(const std::string& name, const fs::path& out, const std::string& command = "solve") {
    cli::RunRequest r;
    r.command = command;
    r.config = source_dir / "configs" / name;
    r.out = out;
    return cli::run(r);
}

// 5. Drift bound verified on the shipped growth configuration and the fixed point inside the ball.
Outcome growth_bound_ledger() {
    const auto result = run_config("growth_toy.ini", fs::temp_directory_path() / "stochdp_acceptance" / "growth");
    if (result.exit_code != cli::kOk) return {false, "run failed: " + result.message};
    bool checks = true;
    for (const auto& c : result.report["checks"]) checks = checks && c["passed"].get<bool>();
    const double slack = result.report["ball"]["membership_slack"].get<double>();
    return {checks && slack >= -1e-6, std::string("checks ") + (checks ? "passed" : "failed") +
                                          ", ball membership slack " + fmt(slack) + " (tol -1e-6)"};
}

// 6. Lucas prices against the Neumann series (1e-8), price bound, unit holdings (1e-6).
Outcome lucas_prices() {
    const auto config = cli::Config::load(source_dir / "configs" / "lucas_m1.ini");
    const auto run = cli::lucas_from_config(config);
    const auto solved = solve_lucas(run.params, run.setup);
    const auto& chain = *solved.chain;
    double neumann = 0.0;
    for (std::size_t i = 0; i < run.params.k_assets; ++i) {
        const auto series = oracle::neumann_series(h_table(i, run.params, chain), toys::dense(chain), run.params.beta, 800);
        neumann = std::max(neumann, oracle::sup_diff(solved.phi[i].values, series));
    }
    const bool ok = neumann <= 1e-8 && solved.bound_slack >= 0.0 && solved.unit_holdings_gap <= 1e-6;
    return {ok, "phi vs series " + fmt(neumann) + " (tol 1e-8), bound slack " + fmt(solved.bound_slack) +
                    " (>= 0), unit holdings gap " + fmt(solved.unit_holdings_gap) + " (tol 1e-6)"};
}

// 7. L0 = 0, monotone and subadditive over 100 random tables.
Outcome cop_axioms() {
    const auto T = toys::cube_operator();
    const auto Ks = toys::cube_monitored();
    const CopOperator L = T->cop(Ks);
    const std::size_t rows = T->family_rows(Ks.size());
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    const auto table = [&] {
        SeminormTable t(rows, T->nz());
        for (double& v : t.values()) v = u(rng);
        return t;
    };
    bool ok = L(SeminormTable(rows, T->nz(), 0.0)).max() == 0.0;
    int failures = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const SeminormTable p = table();
        const SeminormTable bump = table();
        const bool monotone = dominated_by(L(p), L(p + bump), 1e-10);
        const bool subadditive = dominated_by(L(p + bump), L(p) + L(bump), 1e-10);
        if (!monotone || !subadditive) ++failures;
    }
    ok = ok && failures == 0;
    return {ok, std::to_string(failures) + " of 100 tables violate monotonicity or subadditivity (tol 1e-10)"};
}

// 8. Residual ratios of the growth iteration stay below alpha beta + 0.02 after iteration 5.
Outcome residual_ratio() {
    const auto& solved = growth_toy();
    const double limit = solved.ledger.alpha * solved.ledger.beta + 0.02;
    const auto& r = solved.report.residual_history;
    double worst = 0.0;
    for (std::size_t t = 6; t < r.size(); ++t) {
        if (r[t - 1] > 1e-12) worst = std::max(worst, r[t] / r[t - 1]);
    }
    return {r.size() > 6 && worst <= limit,
            "worst ratio " + fmt(worst) + " (limit alpha beta + 0.02 = " + fmt(limit) + ")"};
}

// 9. Every shipped configuration reproduces its artifacts byte for byte.
Outcome reproducible_runs() {
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(source_dir / "configs")) {
        if (entry.path().extension() == ".ini") names.push_back(entry.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    const fs::path base = fs::temp_directory_path() / "stochdp_acceptance";
    std::string bad;
    for (const auto& name : names) {
        const auto a = run_config(name, base / (name + ".a"));
        const auto b = run_config(name, base / (name + ".b"));
        if (a.exit_code != cli::kOk || b.exit_code != cli::kOk || a.files != b.files) bad += " " + name;
    }
    return {bad.empty() && !names.empty(), std::to_string(names.size()) + " configurations" +
                                               (bad.empty() ? ", all identical" : ", differing:" + bad)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"counterexample closed forms", counterexample_values},
        {"contraction inequality on random pairs", contraction_inequality},
        {"growth toy matches exhaustive DP", growth_against_oracle},
        {"simulated returns match the value function", monte_carlo_identity},
        {"growth drift bound and ball membership", growth_bound_ledger},
        {"Lucas prices, price bound and unit holdings", lucas_prices},
        {"contraction operator parameter axioms", cop_axioms},
        {"empirical contraction rate", residual_ratio},
        {"reproducible configuration runs", reproducible_runs},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        if (!o.passed) ++failed;
        std::printf("%s %zu %s: %s\n", o.passed ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
