#include "models.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "stochdp/error.hpp"

namespace stochdp::cli {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

ActionMode action_mode_from(const Config& c, const std::string& fallback) {
    const std::string mode = c.text("solver.action_mode", fallback);
    if (mode == "grid") return ActionMode::grid;
    if (mode == "continuous") return ActionMode::continuous;
    c.fail("solver.action_mode", "expected grid or continuous, got '" + mode + "'");
}

MaximizerOptions maximizer_from(const Config& c) {
    MaximizerOptions m;
    m.candidates = c.count("solver.scan_points", m.candidates);
    m.max_cycles = c.count("solver.refine_cycles", m.max_cycles);
    return m;
}

unsigned threads_from(const Config& c) {
    const auto t = c.count("threads", 1);
    if (t == 0) c.fail("threads", "must be at least 1");
    return static_cast<unsigned>(t);
}

std::vector<Shock> seeds_from(const Config& c, const std::string& key, std::size_t dim) {
    auto seeds = c.points(key);
    for (const auto& s : seeds) {
        if (s.size() != dim) c.fail(key, "every shock needs " + std::to_string(dim) + " coordinates");
    }
    return seeds;
}

double savings_utility(double c, double sigma) {
    if (c < 0.0) return kNegInf;
    return std::pow(c, 1.0 - sigma) / (1.0 - sigma);
}

}  // namespace

QuadratureRule quadrature_from_config(const Config& c) {
    QuadratureRule rule;
    rule.nodes = c.count("quadrature.nodes", rule.nodes);
    if (rule.nodes == 0) c.fail("quadrature.nodes", "must be positive");
    const std::string scheme = c.text("quadrature.scheme", "midpoint");
    if (scheme == "midpoint") {
        rule.scheme = QuadratureScheme::midpoint;
    } else if (scheme == "stratified") {
        rule.scheme = QuadratureScheme::stratified;
    } else {
        c.fail("quadrature.scheme", "expected midpoint or stratified, got '" + scheme + "'");
    }
    rule.seed = c.count("quadrature.seed", c.count("seed", 0));
    return rule;
}

InnovationLaw innovation_from_config(const Config& c, const std::string& section) {
    const std::string law = c.text(section + ".law");
    try {
        if (law == "point_mass") return InnovationLaw::point_mass(c.numbers(section + ".value"));
        if (law == "atoms") {
            std::vector<WeightedShock> atoms;
            for (auto& p : c.points(section + ".atoms")) {
                if (p.size() < 2) c.fail(section + ".atoms", "each atom needs coordinates followed by a weight");
                const double w = p.back();
                p.pop_back();
                atoms.push_back({std::move(p), w});
            }
            return InnovationLaw::atoms(std::move(atoms));
        }
        if (law == "rectified_lognormal") {
            return InnovationLaw::rectified_lognormal(c.numbers(section + ".mu"), c.numbers(section + ".s"));
        }
        if (law == "mean_shifted_lognormal") {
            return InnovationLaw::mean_shifted_lognormal(c.number(section + ".s"), c.number(section + ".shift_rho", 0.0));
        }
        if (law == "pareto") return InnovationLaw::pareto(c.numbers(section + ".shape"));
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        if (what.rfind(c.source(), 0) == 0) throw;
        c.fail(section + ".law", what);
    }
    c.fail(section + ".law", "unknown innovation law '" + law + "'");
}

TransitionKernel kernel_from_config(const Config& c, const std::string& section, std::size_t dim) {
    const std::string kind = c.text(section + ".kernel");
    const QuadratureRule rule = quadrature_from_config(c);
    if (kind == "degenerate") return TransitionKernel::degenerate(dim);
    if (kind == "linear_ar") {
        const auto b = c.numbers(section + ".B");
        if (b.size() != dim * dim) c.fail(section + ".B", "expected " + std::to_string(dim * dim) + " entries (row-major)");
        Eigen::MatrixXd B(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t j = 0; j < dim; ++j) B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = b[i * dim + j];
        }
        auto W = innovation_from_config(c, section);
        if (W.dim() != dim) c.fail(section + ".law", "innovation dimension differs from the shock dimension");
        return TransitionKernel::linear_ar(B, std::move(W), rule);
    }
    if (kind == "log_log_ar") {
        const auto rho = c.numbers(section + ".rho");
        if (rho.size() != dim) c.fail(section + ".rho", "expected " + std::to_string(dim) + " entries");
        auto W = innovation_from_config(c, section);
        if (W.dim() != dim) c.fail(section + ".law", "innovation dimension differs from the shock dimension");
        return TransitionKernel::log_log_ar(rho, std::move(W), rule);
    }
    c.fail(section + ".kernel", "expected linear_ar, log_log_ar or degenerate, got '" + kind + "'");
}

std::vector<double> axis_from_config(const Config& c, const std::string& key) {
    const std::string spec = c.text(key);
    std::istringstream in(spec);
    std::string head;
    in >> head;
    if (head == "log" || head == "uniform") {
        double lo = 0.0;
        double hi = 0.0;
        std::size_t n = 0;
        std::string rest;
        if (!(in >> lo >> hi >> n) || (in >> rest) || n < 2) c.fail(key, "expected '" + head + " lo hi n'");
        try {
            return head == "log" ? StateGrid::log_axis(lo, hi, n) : StateGrid::uniform_axis(lo, hi, n);
        } catch (const Error& e) {
            c.fail(key, e.what());
        }
    }
    return c.numbers(key);
}

std::vector<CompactSet> monitored_from_config(const Config& c, const StateGrid& grid) {
    std::vector<CompactSet> out;
    for (const auto& label : c.keys_in("monitored")) {
        const std::string key = "monitored." + label;
        if (c.text(key) == "hull") {
            out.push_back(CompactSet::hull(grid, label));
            continue;
        }
        const auto pts = c.points(key);
        if (pts.size() != 2 || pts[0].size() != grid.dim()) {
            c.fail(key, "expected 'hull' or 'lo...; hi...' with one coordinate per state axis");
        }
        try {
            out.push_back(CompactSet::box(pts[0], pts[1], label));
        } catch (const ConfigError& e) {
            c.fail(key, e.what());
        }
    }
    return out;
}

ChainBuildOptions chain_from_config(const Config& c) {
    ChainBuildOptions o;
    o.depth = c.count("shock.depth", o.depth);
    o.max_nodes = c.count("shock.max_nodes", o.max_nodes);
    return o;
}

GrowthRun growth_from_config(const Config& c) {
    GrowthRun run;
    auto& p = run.params;
    p.A = c.number("growth.A", p.A);
    p.alpha = c.number("growth.alpha", p.alpha);
    p.sigma = c.number("growth.sigma", p.sigma);
    p.psi_leisure = c.number("growth.psi_leisure", p.psi_leisure);
    p.delta_k = c.number("growth.delta_k", p.delta_k);
    p.delta_h = c.number("growth.delta_h", p.delta_h);
    p.beta = c.number("growth.beta");
    p.rho = c.number("growth.rho", p.rho);
    p.W = innovation_from_config(c, "shock");
    p.validate();

    auto& s = run.setup;
    s.k_axis = axis_from_config(c, "grid.k");
    s.fixed_h = c.flag("grid.fixed_h", false);
    if (s.fixed_h) {
        s.h_bar = c.number("grid.h_bar", 1.0);
    } else {
        s.h_axis = axis_from_config(c, "grid.h");
    }
    for (const auto& z : seeds_from(c, "shock.seeds", 1)) s.z_seeds.push_back(z[0]);
    s.chain = chain_from_config(c);
    s.quadrature = quadrature_from_config(c);
    s.action_mode = action_mode_from(c, "continuous");
    s.maximizer = maximizer_from(c);
    s.threads = threads_from(c);
    s.tolerance = c.number("solver.tolerance", s.tolerance);
    s.max_iter = c.count("solver.max_iter", s.max_iter);
    s.drift.audit_factor = c.count("solver.audit_factor", s.drift.audit_factor);
    const std::string method = c.text("moment.method", "automatic");
    if (method == "monte_carlo") {
        s.moment.method = MomentOptions::Method::monte_carlo;
    } else if (method != "automatic") {
        c.fail("moment.method", "expected automatic or monte_carlo");
    }
    s.moment.draws = c.count("moment.draws", s.moment.draws);
    s.moment.seed = c.count("seed", 0);

    const StateGrid grid = s.fixed_h ? StateGrid({s.k_axis}) : StateGrid({s.k_axis, s.h_axis});
    s.monitored = monitored_from_config(c, grid);

    auto& sim = run.simulation;
    sim.enabled = c.has("simulation.paths");
    if (sim.enabled) {
        sim.options.paths = c.count("simulation.paths");
        sim.options.horizon = c.count("simulation.horizon", sim.options.horizon);
        sim.options.seed = c.count("seed", 0);
        const std::string mode = c.text("simulation.mode", "lottery");
        if (mode == "interpolated") {
            sim.options.mode = SimulationMode::interpolated;
        } else if (mode != "lottery") {
            c.fail("simulation.mode", "expected lottery or interpolated");
        }
        sim.starts = c.points("simulation.starts");
        for (const auto& st : sim.starts) {
            if (st.size() != grid.dim() + 1) c.fail("simulation.starts", "each start needs the state followed by the shock");
        }
    }
    return run;
}

LucasRun lucas_from_config(const Config& c) {
    LucasRun run;
    auto& p = run.params;
    p.k_assets = c.count("lucas.assets", 1);
    if (p.k_assets == 0) c.fail("lucas.assets", "must be at least 1");
    const double sigma = c.number("lucas.sigma");
    try {
        p.utility = preset_utility(sigma);
        p.constants = preset_constants(sigma);
    } catch (const ConfigError& e) {
        c.fail("lucas.sigma", e.what());
    }
    p.constants.gamma = c.number("lucas.gamma", p.constants.gamma);
    p.constants.delta = c.number("lucas.delta", p.constants.delta);
    p.constants.a = c.number("lucas.a", p.constants.a);
    p.beta = c.number("lucas.beta");
    p.x_bar = c.number("lucas.x_bar", p.x_bar);
    p.kernel = kernel_from_config(c, "shock", p.k_assets);

    auto& s = run.setup;
    s.z_seeds = seeds_from(c, "shock.seeds", p.k_assets);
    s.chain = chain_from_config(c);
    if (c.has("grid.holdings")) {
        s.holdings_axis = axis_from_config(c, "grid.holdings");
    } else {
        s.holdings_nodes = c.count("grid.holdings_nodes", s.holdings_nodes);
    }
    s.action_mode = action_mode_from(c, "grid");
    s.maximizer = maximizer_from(c);
    s.threads = threads_from(c);
    s.phi.tolerance = c.number("solver.phi_tolerance", s.phi.tolerance);
    s.tolerance = c.number("solver.tolerance", s.tolerance);
    s.max_iter = c.count("solver.max_iter", s.max_iter);
    return run;
}

CustomRun custom_from_config(const Config& c) {
    CustomRun run;
    run.R = c.number("custom.R", run.R);
    run.sigma = c.number("custom.sigma", run.sigma);
    run.beta = c.number("custom.beta");
    run.x_bar = c.number("custom.x_bar", run.x_bar);
    if (!(run.R > 0.0)) c.fail("custom.R", "must be positive");
    if (!(run.sigma >= 0.0 && run.sigma < 1.0)) c.fail("custom.sigma", "must lie in [0, 1)");
    if (!(run.beta >= 0.0 && run.beta < 1.0)) c.fail("custom.beta", "must lie in [0, 1)");
    if (!(run.x_bar > 0.0)) c.fail("custom.x_bar", "must be positive");
    run.x_axis = c.has("grid.x") ? axis_from_config(c, "grid.x") : StateGrid::uniform_axis(0.0, run.x_bar, 41);
    if (run.x_axis.front() != 0.0 || run.x_axis.back() != run.x_bar) c.fail("grid.x", "must run from 0 to x_bar");
    run.kernel = kernel_from_config(c, "shock", 1);
    run.seeds = seeds_from(c, "shock.seeds", 1);
    for (const auto& z : run.seeds) {
        if (!(z[0] >= 0.0)) c.fail("shock.seeds", "income shocks must be nonnegative");
    }
    run.chain = chain_from_config(c);
    run.action_mode = action_mode_from(c, "continuous");
    run.maximizer = maximizer_from(c);
    run.threads = threads_from(c);
    run.tolerance = c.number("solver.tolerance", run.tolerance);
    run.max_iter = c.count("solver.max_iter", run.max_iter);
    if (c.has("bound.drift_alpha")) run.drift_alpha = c.number("bound.drift_alpha");
    run.monitored = monitored_from_config(c, StateGrid({run.x_axis}));
    return run;
}

OracleRun oracle_from_config(const Config& c) {
    OracleRun run;
    run.x = c.numbers("oracle.x", {0.0, 1.0, 2.0});
    run.z = c.numbers("oracle.z", {0.5, 1.5});
    if (c.has("oracle.P")) {
        run.P = c.points("oracle.P");
    } else {
        run.P = {{0.7, 0.3}, {0.4, 0.6}};
        c.text("oracle.P", "0.7 0.3; 0.4 0.6");
    }
    run.R = c.number("oracle.R", run.R);
    run.sigma = c.number("oracle.sigma", run.sigma);
    run.beta = c.number("oracle.beta", run.beta);
    run.tolerance = c.number("solver.tolerance", run.tolerance);
    if (run.P.size() != run.z.size()) c.fail("oracle.P", "needs one row per shock node");
    for (const auto& row : run.P) {
        if (row.size() != run.z.size()) c.fail("oracle.P", "rows must have one entry per shock node");
    }
    if (!(run.beta >= 0.0 && run.beta < 1.0)) c.fail("oracle.beta", "must lie in [0, 1)");
    if (!(run.sigma >= 0.0 && run.sigma < 1.0)) c.fail("oracle.sigma", "must lie in [0, 1)");
    if (run.x.size() > 6 || run.z.size() > 3) c.fail("oracle.x", "brute force needs at most 6 holdings and 3 shock nodes");
    return run;
}

CounterexampleRun counterexample_from_config(const Config& c) {
    CounterexampleRun run;
    run.function = c.text("counterexample.function", run.function);
    if (run.function != "identity" && run.function != "capped" && run.function != "constant") {
        c.fail("counterexample.function", "expected identity, capped or constant");
    }
    run.points = c.count("counterexample.points", run.points);
    run.z_min = c.number("counterexample.z_min", run.z_min);
    run.y = c.number("counterexample.y", run.y);
    run.beta = c.number("counterexample.beta", run.beta);
    run.m_samples = c.numbers("counterexample.m_samples", {0.0, 0.5, 1.0, 2.0});
    run.z_samples = c.numbers("counterexample.z_samples", {0.0, 0.25, 0.5, 0.99, 1.0, 3.0});
    if (run.points < 2) c.fail("counterexample.points", "need at least 2");
    if (!(run.z_min > 0.0 && run.z_min < 2.0)) c.fail("counterexample.z_min", "must lie in (0, 2)");
    if (!(run.y > 0.0)) c.fail("counterexample.y", "endowment must be positive");
    if (!(run.beta >= 0.0 && 1.5 * run.beta < 1.0)) c.fail("counterexample.beta", "need 0 <= beta < 2/3");
    return run;
}

std::shared_ptr<const BellmanOperator> custom_operator(const CustomRun& run) {
    const TransitionKernel& Q = run.kernel;
    Q.validate();
    auto chain = std::make_shared<const ShockChain>(ShockChain::build(Q, run.seeds, run.chain));
    auto grid = std::make_shared<const StateGrid>(std::vector<std::vector<double>>{run.x_axis});
    ModelSpec spec;
    spec.beta = run.beta;
    spec.grid = grid;
    spec.shocks = chain;
    spec.maximizer = run.maximizer;
    spec.threads = run.threads;
    const double R = run.R;
    const double sigma = run.sigma;
    const double x_bar = run.x_bar;
    spec.reward = [R, sigma](std::span<const double> x, std::span<const double> y, std::span<const double> z) {
        double c = R * x[0] + z[0] - y[0];
        if (c < 0.0 && c > -1e-12 * std::max(1.0, R * x[0] + z[0])) c = 0.0;
        return savings_utility(c, sigma);
    };
    const bool grid_actions = run.action_mode == ActionMode::grid;
    spec.feasible = [R, x_bar, grid, grid_actions](std::span<const double> x, std::span<const double> z) {
        const double hi = std::min(x_bar, R * x[0] + z[0]);
        if (grid_actions) {
            std::vector<std::vector<double>> candidates;
            for (double y : grid->axis(0)) {
                if (y <= hi * (1.0 + 1e-12)) candidates.push_back({y});
            }
            return ActionSet::from_candidates(std::move(candidates));
        }
        return ActionSet::box({0.0}, {hi});
    };
    return std::make_shared<const BellmanOperator>(std::move(spec));
}

BoundFn custom_l0(const CustomRun& run) {
    const double R = run.R;
    const double sigma = run.sigma;
    return [R, sigma](std::span<const double> x, std::span<const double> z) {
        return std::pow(R * x[0] + z[0], 1.0 - sigma) / (1.0 - sigma);
    };
}

std::shared_ptr<const BellmanOperator> oracle_operator(const OracleRun& run) {
    std::vector<Shock> nodes;
    for (double z : run.z) nodes.push_back({z});
    auto chain = std::make_shared<const ShockChain>(ShockChain::from_matrix(nodes, run.P));
    auto grid = std::make_shared<const StateGrid>(std::vector<std::vector<double>>{run.x});
    ModelSpec spec;
    spec.beta = run.beta;
    spec.grid = grid;
    spec.shocks = chain;
    const double R = run.R;
    const double sigma = run.sigma;
    spec.reward = [R, sigma](std::span<const double> x, std::span<const double> y, std::span<const double> z) {
        return savings_utility(R * x[0] + z[0] - y[0], sigma);
    };
    spec.feasible = [R, grid](std::span<const double> x, std::span<const double> z) {
        std::vector<std::vector<double>> candidates;
        for (double y : grid->axis(0)) {
            if (y <= R * x[0] + z[0]) candidates.push_back({y});
        }
        return ActionSet::from_candidates(std::move(candidates));
    };
    return std::make_shared<const BellmanOperator>(std::move(spec));
}

FiniteMdp oracle_mdp(const OracleRun& run) {
    const std::size_t nx = run.x.size();
    const std::size_t nz = run.z.size();
    FiniteMdp mdp;
    mdp.beta = run.beta;
    mdp.reward.resize(nx * nz);
    mdp.next.resize(nx * nz);
    for (std::size_t iz = 0; iz < nz; ++iz) {
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const std::size_t s = iz * nx + ix;
            for (std::size_t a = 0; a < nx; ++a) {
                const double c = run.R * run.x[ix] + run.z[iz] - run.x[a];
                if (c < 0.0) continue;
                mdp.reward[s].push_back(savings_utility(c, run.sigma));
                std::vector<Transition> law;
                for (std::size_t j = 0; j < nz; ++j) {
                    if (run.P[iz][j] > 0.0) law.push_back({j * nx + a, run.P[iz][j]});
                }
                mdp.next[s].push_back(std::move(law));
            }
        }
    }
    return mdp;
}

}  // namespace stochdp::cli
