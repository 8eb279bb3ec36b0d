#include "stochdp/growth_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stochdp/error.hpp"
#include "stochdp/io.hpp"

namespace stochdp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError("growth parameters: " + what);
}

double utility(const GrowthParams& p, double c, double leisure) {
    const double a = 1.0 - p.sigma;
    double u = std::pow(c, a) / a;
    if (p.psi_leisure > 0.0) u *= std::pow(leisure, p.psi_leisure * a);
    return u;
}

}  // namespace

void GrowthParams::validate() const {
    require(std::isfinite(A) && A > 0.0, "A must be positive");
    require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    require(sigma >= 0.0 && sigma < 1.0, "sigma must lie in [0, 1)");
    require(std::isfinite(psi_leisure) && psi_leisure >= 0.0, "psi_leisure must be >= 0");
    require(delta_k >= 0.0 && delta_k <= 1.0, "delta_k must lie in [0, 1]");
    require(delta_h >= 0.0 && delta_h <= 1.0, "delta_h must lie in [0, 1]");
    require(beta >= 0.0 && beta < 1.0, "beta must lie in [0, 1)");
    require(rho >= 0.0 && rho < 1.0, "rho must lie in [0, 1)");
    require(W.dim() == 1, "the innovation must be scalar");
    require(W.lower_support(0) >= 1.0, "innovation support must lie in [1, inf) so that z stays >= 1");
}

double gamma_const(const GrowthParams& p) {
    const double delta = std::min(p.delta_k, p.delta_h);
    return p.A * std::pow(p.alpha, p.alpha) * std::pow(1.0 - p.alpha, 1.0 - p.alpha) + (1.0 - delta);
}

GrowthCondition check_growth_condition(const GrowthParams& p, const MomentOptions& options) {
    p.validate();
    GrowthCondition c;
    c.gamma = gamma_const(p);
    c.theta = moment_theta(p.sigma, p.rho, p.W, options);
    c.alpha_drift = std::pow(c.gamma, 1.0 - p.sigma) * c.theta.value;
    c.value = p.beta * c.alpha_drift;
    c.holds = c.value < 1.0;
    return c;
}

double g_bound(const GrowthParams& p, double k, double h) {
    const double delta = std::min(p.delta_k, p.delta_h);
    return p.A * std::pow(k, p.alpha) * std::pow(h, 1.0 - p.alpha) + (1.0 - delta) * (k + h);
}

double growth_l0(const GrowthParams& p, double k, double h, double z) {
    const double a = 1.0 - p.sigma;
    return std::pow(z, a / (1.0 - p.rho)) * std::pow(g_bound(p, k, h), a) / a;
}

double growth_R0(const GrowthParams& p, const CompactSet& K, double z, double theta, bool fixed_h, double h_bar) {
    const double a = 1.0 - p.sigma;
    const double drift = p.beta * std::pow(gamma_const(p), a) * theta;
    if (!(drift < 1.0)) {
        throw ConditionError("growth condition beta * gamma^(1-sigma) * Theta = " + format_double(drift) +
                             " is not below 1");
    }
    double gmax = 0.0;
    auto visit = [&](std::span<const double> x) {
        const double k = x[0];
        const double h = fixed_h ? h_bar : x[1];
        gmax = std::max(gmax, std::pow(g_bound(p, k, h), a));
    };
    if (K.kind() == CompactSet::Kind::box) {
        visit(K.upper());  // g is nondecreasing in both arguments
    } else {
        for (const auto& x : K.point_list()) visit(x);
    }
    return theta / (1.0 - drift) * std::pow(z, p.rho * a / (1.0 - p.rho)) * gmax / a;
}

LagrangeOptimum lagrange_relaxation_optimum(const GrowthParams& p, double k, double h, double z) {
    const double budget = z * g_bound(p, k, h);
    LagrangeOptimum out;
    out.k_next = p.alpha * budget;
    out.h_next = (1.0 - p.alpha) * budget;
    out.value = std::pow(gamma_const(p) * budget, 1.0 - p.sigma);
    return out;
}

double growth_resources(const GrowthParams& p, double k, double h, double z) {
    return z * p.A * std::pow(k, p.alpha) * std::pow(h, 1.0 - p.alpha) + (1.0 - p.delta_k) * k +
           (1.0 - p.delta_h) * h;
}

double growth_reward(const GrowthParams& p, double k, double h, double k_next, double h_next, double z) {
    const double full = growth_resources(p, k, h, z);
    const double tol = 1e-12 * std::max(1.0, std::abs(full));
    const double c_full = full - k_next - h_next;
    if (c_full < -tol) return kNegInf;
    if (p.psi_leisure == 0.0) return utility(p, std::max(c_full, 0.0), 1.0);

    const double output = z * p.A * std::pow(k, p.alpha) * std::pow(h, 1.0 - p.alpha);
    const double base = full - output - k_next - h_next;
    auto consumption = [&](double n) { return std::max(output * std::pow(n, 1.0 - p.alpha) + base, 0.0); };
    double lo = 0.0;
    if (base < 0.0) {
        if (output <= 0.0) return utility(p, 0.0, 1.0);
        lo = std::min(1.0, std::pow(-base / output, 1.0 / (1.0 - p.alpha)));
    }
    auto objective = [&](double n) { return utility(p, consumption(n), 1.0 - n); };
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = 1.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = objective(c);
    double fd = objective(d);
    while (b - a > 1e-10) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
    }
    return std::max({fc, fd, objective(lo), objective(1.0)});
}

GrowthModel build_growth(const GrowthParams& p, const GrowthSetup& setup) {
    p.validate();
    if (setup.k_axis.empty()) throw ConfigError("growth grid: k axis is empty");
    if (!setup.fixed_h && setup.h_axis.empty()) throw ConfigError("growth grid: h axis is empty");
    if (setup.fixed_h && !(setup.h_bar > 0.0)) throw ConfigError("growth grid: h_bar must be positive");
    if (setup.k_axis.front() < 0.0 || (!setup.fixed_h && setup.h_axis.front() < 0.0)) {
        throw ConfigError("growth grid: capital stocks must be nonnegative");
    }
    for (double z : setup.z_seeds) {
        if (!(z >= 1.0)) throw ConfigError("growth shocks live in [1, inf); seed " + format_double(z) + " is below 1");
    }

    GrowthModel model;
    model.params = p;
    model.setup = setup;
    model.condition = check_growth_condition(p, setup.moment);

    const TransitionKernel Q = TransitionKernel::log_log_ar({p.rho}, p.W, setup.quadrature);
    Q.validate();
    std::vector<Shock> seeds;
    for (double z : setup.z_seeds) seeds.push_back({z});
    auto chain = std::make_shared<const ShockChain>(ShockChain::build(Q, seeds, setup.chain));

    auto grid = setup.fixed_h ? std::make_shared<const StateGrid>(std::vector<std::vector<double>>{setup.k_axis})
                              : std::make_shared<const StateGrid>(
                                    std::vector<std::vector<double>>{setup.k_axis, setup.h_axis});

    const bool fixed = setup.fixed_h;
    const double h_bar = setup.h_bar;
    ModelSpec spec;
    spec.beta = p.beta;
    spec.grid = grid;
    spec.shocks = chain;
    spec.maximizer = setup.maximizer;
    spec.threads = setup.threads;
    spec.reward = [p, fixed, h_bar](std::span<const double> x, std::span<const double> y, std::span<const double> z) {
        if (fixed) return growth_reward(p, x[0], h_bar, y[0], h_bar, z[0]);
        return growth_reward(p, x[0], x[1], y[0], y[1], z[0]);
    };
    const bool grid_actions = setup.action_mode == ActionMode::grid;
    spec.feasible = [p, fixed, h_bar, grid, grid_actions](std::span<const double> x, std::span<const double> z) {
        const double h = fixed ? h_bar : x[1];
        double bound = growth_resources(p, x[0], h, z[0]);
        if (fixed) bound -= h_bar;
        const std::size_t d = grid->dim();
        if (grid_actions) {
            const double tol = 1e-12 * std::max(1.0, std::abs(bound));
            std::vector<std::vector<double>> candidates;
            for (std::size_t i = 0; i < grid->size(); ++i) {
                auto y = grid->point(i);
                double cost = 0.0;
                for (double v : y) cost += v;
                if (cost <= bound + tol) candidates.push_back(std::move(y));
            }
            return ActionSet::from_candidates(std::move(candidates));
        }
        std::vector<double> lo(d);
        std::vector<double> hi(d);
        for (std::size_t i = 0; i < d; ++i) {
            lo[i] = grid->lower(i);
            hi[i] = grid->upper(i);
        }
        ActionSet set = ActionSet::box(std::move(lo), std::move(hi));
        set.budget = LinearBudget{std::vector<double>(d, 1.0), bound};
        return set;
    };
    model.op = staged("growth model setup", [&] { return std::make_shared<const BellmanOperator>(std::move(spec)); });

    model.monitored = setup.monitored;
    if (model.monitored.empty()) model.monitored.push_back(CompactSet::hull(*grid));
    model.l0 = [p, fixed, h_bar](std::span<const double> x, std::span<const double> z) {
        return growth_l0(p, x[0], fixed ? h_bar : x[1], z[0]);
    };
    return model;
}

GrowthSolution solve_growth(const GrowthParams& p, const GrowthSetup& setup) {
    GrowthSolution out;
    out.model = build_growth(p, setup);
    const auto& condition = out.model.condition;
    if (!condition.holds) {
        throw ConditionError("growth condition beta * gamma^(1-sigma) * Theta = " + format_double(condition.value) +
                             " is not below 1");
    }
    const BellmanOperator& T = *out.model.op;
    out.ledger = staged("bound verification", [&] {
        return verify_drift_bound(out.model.l0, T, condition.alpha_drift, out.model.monitored, setup.drift);
    });
    SolveOptions options;
    options.tolerance = setup.tolerance;
    options.max_iter = setup.max_iter;
    options.monitored = out.model.monitored;
    options.radius = out.ledger.R0;
    auto solved = staged("value iteration", [&] { return solve_bellman(T, options); });
    out.value = std::move(solved.value);
    out.policy = std::move(solved.policy);
    out.report = std::move(solved.report);
    return out;
}

}  // namespace stochdp
