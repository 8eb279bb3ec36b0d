#include "stochdp/lucas_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "stochdp/error.hpp"
#include "stochdp/io.hpp"

namespace stochdp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double total(std::span<const double> z) {
    double s = 0.0;
    for (double v : z) s += v;
    return s;
}

// z_i u'(1'z), zero at the origin where u' may be infinite.
double dividend_marginal(const Utility& U, std::span<const double> z, std::size_t i) {
    const double s = total(z);
    if (z[i] == 0.0 || s == 0.0) return 0.0;
    return z[i] * U.du(s);
}

std::vector<double> innovation_mean(const TransitionKernel& Q) {
    if (Q.kind() == TransitionKernel::Kind::degenerate) return std::vector<double>(Q.dim(), 1.0);
    return Q.innovation().mean();
}

std::vector<double> kernel_rho(const TransitionKernel& Q) {
    if (Q.kind() == TransitionKernel::Kind::degenerate) return std::vector<double>(Q.dim(), 1.0);
    return Q.rho();
}

}  // namespace

Utility preset_utility(double sigma) {
    if (!(sigma >= 0.0 && sigma < 1.0)) throw ConfigError("utility preset: sigma must lie in [0, 1)");
    Utility U;
    const double a = 1.0 - sigma;
    U.u = [a](double c) { return std::pow(c, a) / a + c; };
    U.du = [sigma](double c) { return std::pow(c, -sigma) + 1.0; };
    U.name = "c^(1-sigma)/(1-sigma) + c, sigma = " + format_double(sigma);
    return U;
}

UtilityConstants preset_constants(double sigma) {
    if (!(sigma >= 0.0 && sigma < 1.0)) throw ConfigError("utility preset: sigma must lie in [0, 1)");
    UtilityConstants c;
    c.gamma = 2.0;
    c.delta = sigma == 0.0 ? 0.0 : sigma * std::pow(1.0 - sigma, (1.0 - sigma) / sigma);
    c.a = 1.0;
    return c;
}

void LucasParams::validate() const {
    if (k_assets == 0) throw ConfigError("lucas: at least one asset is required");
    if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("lucas: beta must lie in [0, 1)");
    if (!(x_bar > 1.0) || !std::isfinite(x_bar)) throw ConfigError("lucas: x_bar must be a finite number above 1");
    if (!utility.u || !utility.du) throw ConfigError("lucas: utility needs both u and u'");
    if (!(constants.gamma >= 0.0) || !(constants.delta >= 0.0)) {
        throw ConfigError("lucas: gamma and delta must be nonnegative");
    }
    if (!(constants.a > 0.0)) throw ConfigError("lucas: the marginal-utility floor a must be positive");
    if (kernel.dim() != k_assets) {
        throw ConfigError("lucas: kernel dimension " + std::to_string(kernel.dim()) + " differs from k_assets " +
                          std::to_string(k_assets));
    }
    lucas_regime(kernel);
    kernel.validate();
    kernel.validate_discount(beta);
}

LucasRegime lucas_regime(const TransitionKernel& Q) {
    switch (Q.kind()) {
        case TransitionKernel::Kind::linear_ar: return LucasRegime::linear;
        case TransitionKernel::Kind::log_log_ar:
        case TransitionKernel::Kind::degenerate: return LucasRegime::log_linear;
        case TransitionKernel::Kind::piecewise_jump: break;
    }
    throw ConfigError("lucas: dividends need a linear_ar, log_log_ar or degenerate kernel");
}

std::string regime_name(LucasRegime regime) {
    return regime == LucasRegime::linear ? "linear" : "log_linear";
}

UtilityAudit audit_utility(const LucasParams& p, const ShockChain& chain, std::size_t points) {
    if (points < 2) throw ConfigError("utility audit: need at least two audit points");
    UtilityAudit out;
    const auto& U = p.utility;
    const auto& k = p.constants;
    out.zero_value = U.u(0.0);
    out.min_marginal = std::numeric_limits<double>::infinity();
    out.growth_slack = std::numeric_limits<double>::infinity();
    out.audit_points = points;

    const double lo = std::log(1e-8);
    const double hi = std::log(1e8);
    for (std::size_t j = 0; j < points; ++j) {
        const double c = std::exp(lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(points - 1));
        const double m = U.du(c);
        out.min_marginal = std::min(out.min_marginal, m);
        const double rhs = k.gamma * c + k.delta;
        const double slack = rhs - c * m + 1e-12 * std::max(1.0, rhs);
        if (slack < out.growth_slack) {
            out.growth_slack = slack;
            out.growth_worst_c = c;
        }
    }
    out.floor_slack = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < chain.size(); ++n) {
        const double slack = U.du(total(chain.node(n))) - k.a;
        if (slack < out.floor_slack) {
            out.floor_slack = slack;
            out.floor_worst_node = format_shock(chain.node(n));
        }
    }

    if (std::abs(out.zero_value) > 1e-14) {
        out.failure = "u(0) = " + format_double(out.zero_value) + " is not 0";
    } else if (!(out.min_marginal > 0.0)) {
        out.failure = "u' is not positive on the audit grid";
    } else if (out.growth_slack < 0.0) {
        out.failure = "c u'(c) exceeds gamma c + delta at c = " + format_double(out.growth_worst_c);
    } else if (out.floor_slack < -1e-12 * k.a) {
        out.failure = "u'(1'z) is below a at z = " + out.floor_worst_node;
    }
    out.passed = out.failure.empty();
    return out;
}

double h_function(std::size_t i, std::span<const double> z, const LucasParams& p) {
    if (i >= p.k_assets) throw ConfigError("h_function: asset index out of range");
    const double e = p.kernel.conditional_expectation(
        [&](std::span<const double> next) {
            const double v = dividend_marginal(p.utility, next, i);
            if (!std::isfinite(v)) throw NumericalError("h_function: non-finite integrand at z' = " + format_shock(next));
            return v;
        },
        z);
    return p.beta * e;
}

std::vector<double> h_table(std::size_t i, const LucasParams& p, const ShockChain& chain) {
    if (i >= p.k_assets) throw ConfigError("h_table: asset index out of range");
    std::vector<double> node_term(chain.size());
    for (std::size_t n = 0; n < chain.size(); ++n) {
        node_term[n] = dividend_marginal(p.utility, chain.node(n), i);
        if (!std::isfinite(node_term[n])) {
            throw NumericalError("h_table: non-finite integrand at z' = " + format_shock(chain.node(n)));
        }
    }
    std::vector<double> h(chain.size());
    for (std::size_t n = 0; n < chain.size(); ++n) {
        h[n] = p.beta * chain.expectation(n, [&](std::size_t m) { return node_term[m]; });
    }
    return h;
}

PseudometricFamily<std::vector<double>> affine_family(const ShockChain& chain) {
    PseudometricFamily<std::vector<double>> D;
    D.rows = 2;
    D.cols = chain.size();
    const ShockChain* c = &chain;
    D.distances = [c](const std::vector<double>& f, const std::vector<double>& g) {
        const std::size_t n = c->size();
        SeminormTable d(2, n);
        for (std::size_t j = 0; j < n; ++j) d(0, j) = std::abs(f[j] - g[j]);
        for (std::size_t j = 0; j < n; ++j) {
            d(1, j) = c->expectation(j, [&](std::size_t m) { return std::abs(f[m] - g[m]); });
        }
        return d;
    };
    D.label = [c](std::size_t row, std::size_t col) {
        return std::string(row == 0 ? "node" : "expectation") + " at z = " + format_shock(c->node(col));
    };
    return D;
}

CopOperator affine_cop(double beta, const ShockChain& chain) {
    const ShockChain* c = &chain;
    return [beta, c](const SeminormTable& p) {
        const std::size_t n = c->size();
        SeminormTable out(2, n);
        for (std::size_t j = 0; j < n; ++j) {
            out(0, j) = beta * p(1, j);
            out(1, j) = beta * c->expectation(j, [&](std::size_t m) { return p(1, m); });
        }
        return out;
    };
}

PhiSolution solve_affine(const std::vector<double>& h, double beta, const ShockChain& chain,
                         const AffineSolveOptions& options) {
    if (h.size() != chain.size()) throw ConfigError("solve_affine: h has the wrong length");
    if (!(beta >= 0.0 && beta < 1.0)) throw ConditionError("solve_affine: beta must lie in [0, 1)");
    for (std::size_t n = 0; n < h.size(); ++n) {
        if (!std::isfinite(h[n])) throw NumericalError("solve_affine: h is not finite at z = " + format_shock(chain.node(n)));
    }
    const auto map = [&](const std::vector<double>& f) {
        std::vector<double> out(f.size());
        for (std::size_t n = 0; n < f.size(); ++n) {
            out[n] = h[n] + beta * chain.expectation(n, [&](std::size_t m) { return f[m]; });
        }
        return out;
    };
    FixedPointOptions fp;
    fp.tolerance = options.tolerance;
    fp.max_iter = options.max_iter;
    fp.cop = affine_cop(beta, chain);
    double previous = std::numeric_limits<double>::infinity();
    std::size_t growing = 0;
    fp.on_iteration = [&](std::size_t t, const SeminormTable& d) {
        const double r = d.max();
        growing = r > previous ? growing + 1 : 0;
        previous = r;
        if (growing >= options.divergence_sweeps) {
            throw DivergenceError("affine price iteration: residual grew for " + std::to_string(growing) +
                                  " consecutive sweeps (sweep " + std::to_string(t) + ", residual " +
                                  format_double(r) + ")");
        }
    };
    auto [values, report] = iterate_fixed_point(map, affine_family(chain), std::vector<double>(h.size(), 0.0), fp);
    if (!report.converged) {
        throw NumericalError("affine price iteration: no convergence after " + std::to_string(report.iterations) +
                             " sweeps, residual " + format_double(report.final_residuals.max()));
    }
    return PhiSolution{std::move(values), std::move(report)};
}

PhiSolution solve_phi(std::size_t i, const LucasParams& p, const ShockChain& chain, const AffineSolveOptions& options) {
    return solve_affine(h_table(i, p, chain), p.beta, chain, options);
}

PriceBound price_bound_constants(const LucasParams& p, const ShockChain& chain) {
    p.validate();
    const std::size_t k = p.k_assets;
    const auto& c = p.constants;
    const double beta = p.beta;
    PriceBound out;
    out.regime = lucas_regime(p.kernel);
    const std::vector<double> Ew = innovation_mean(p.kernel);
    const std::size_t n = chain.size();
    out.price_bound.resize(n);
    out.phi_bound.resize(n);

    if (out.regime == LucasRegime::linear) {
        const Eigen::MatrixXd& B = p.kernel.matrix();
        const double norm = p.kernel.spectral_norm();
        if (!(beta * norm < 1.0)) {
            throw ConditionError("price bound: beta ||B|| = " + format_double(beta * norm) + " is not below 1");
        }
        const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
        const Eigen::MatrixXd inv_beta = (I - beta * B).inverse();
        const Eigen::MatrixXd inv_one = (I - B).inverse();
        const Eigen::RowVectorXd ones = Eigen::RowVectorXd::Ones(static_cast<Eigen::Index>(k));
        const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(Ew.data(), static_cast<Eigen::Index>(k));

        const Eigen::RowVectorXd slope = (c.gamma / c.a) * ones * inv_beta;
        out.slope.assign(slope.data(), slope.data() + k);
        out.intercept = (c.gamma * w.sum() + c.delta) / (c.a * (1.0 - beta));

        const Eigen::RowVectorXd complete = (c.gamma / c.a) * ones * (beta * B * inv_beta);
        out.complete_slope.assign(complete.data(), complete.data() + k);
        out.complete_intercept = beta * (c.gamma * (ones * inv_one * w)(0) + c.delta) / (c.a * (1.0 - beta));

        for (std::size_t j = 0; j < n; ++j) {
            const auto& z = chain.node(j);
            double v = out.intercept;
            for (std::size_t i = 0; i < k; ++i) v += out.slope[i] * z[i];
            out.price_bound[j] = v;
            out.phi_bound[j] = c.a * v;
        }
        return out;
    }

    const std::vector<double> rho = kernel_rho(p.kernel);
    out.growth_factor.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        if (rho[i] < 1.0) {
            out.growth_factor[i] = std::pow(Ew[i], 1.0 / (1.0 - rho[i]));
        } else {
            if (!(beta * Ew[i] < 1.0)) {
                throw ConditionError("price bound: rho_" + std::to_string(i + 1) + " = 1 needs beta E[w_" +
                                     std::to_string(i + 1) + "] < 1, got " + format_double(beta * Ew[i]));
            }
            out.growth_factor[i] = (1.0 - beta) * Ew[i] / (1.0 - beta * Ew[i]);
        }
        if (!std::isfinite(out.growth_factor[i])) {
            throw ConditionError("price bound: growth factor of asset " + std::to_string(i + 1) + " is not finite");
        }
    }
    out.mu_uniform = *std::max_element(out.growth_factor.begin(), out.growth_factor.end());
    const double scale = c.gamma / (c.a * (1.0 - beta));
    out.slope.assign(k, scale * out.mu_uniform);
    out.intercept = c.delta / (c.a * (1.0 - beta));
    out.mu_node.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const auto& z = chain.node(j);
        double mu = 0.0;
        for (std::size_t i = 0; i < k; ++i) mu = std::max(mu, z[i] * out.growth_factor[i]);
        out.mu_node[j] = mu;
        out.price_bound[j] = scale * mu * total(z) + out.intercept;
        out.phi_bound[j] = c.a * out.price_bound[j];
    }
    return out;
}

std::vector<double> PriceFunction::at(std::size_t node) const {
    std::vector<double> out(k_assets);
    for (std::size_t i = 0; i < k_assets; ++i) out[i] = price[i][node];
    return out;
}

PriceFunction price_from_phi(const std::vector<std::vector<double>>& phi, const LucasParams& p, ChainPtr chain) {
    if (!chain) throw ConfigError("price_from_phi: missing shock chain");
    if (phi.size() != p.k_assets) throw ConfigError("price_from_phi: need one phi table per asset");
    PriceFunction out;
    out.chain = chain;
    out.k_assets = p.k_assets;
    out.phi = phi;
    const std::size_t n = chain->size();
    out.marginal.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double m = p.utility.du(total(chain->node(j)));
        if (!(m >= p.constants.a * (1.0 - 1e-12))) {
            throw ConditionError("price_from_phi: u'(1'z) = " + format_double(m) + " is below a = " +
                                 format_double(p.constants.a) + " at z = " + format_shock(chain->node(j)));
        }
        out.marginal[j] = m;
    }
    out.price.assign(p.k_assets, std::vector<double>(n));
    for (std::size_t i = 0; i < p.k_assets; ++i) {
        if (phi[i].size() != n) throw ConfigError("price_from_phi: phi table has the wrong length");
        for (std::size_t j = 0; j < n; ++j) out.price[i][j] = phi[i][j] / out.marginal[j];
    }
    return out;
}

double euler_residual(const PriceFunction& price, const LucasParams& p) {
    const ShockChain& chain = *price.chain;
    double worst = 0.0;
    for (std::size_t i = 0; i < price.k_assets; ++i) {
        for (std::size_t j = 0; j < chain.size(); ++j) {
            // u'(1'z') p_i(z') is phi_i(z'), which stays finite where u' does not.
            const double rhs = p.beta * chain.expectation(j, [&](std::size_t m) {
                return dividend_marginal(p.utility, chain.node(m), i) + price.phi[i][m];
            });
            worst = std::max(worst, std::abs(price.marginal[j] * price.price[i][j] - rhs));
        }
    }
    return worst;
}

double price_bound_slack(const PriceFunction& price, const PriceBound& bound, bool complete) {
    const ShockChain& chain = *price.chain;
    double slack = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < chain.size(); ++j) {
        double b = bound.price_bound[j];
        if (complete) {
            if (bound.complete_slope.empty()) throw ConfigError("price_bound_slack: no complete constants in this regime");
            b = bound.complete_intercept;
            for (std::size_t i = 0; i < bound.complete_slope.size(); ++i) b += bound.complete_slope[i] * chain.node(j)[i];
        }
        for (std::size_t i = 0; i < price.k_assets; ++i) slack = std::min(slack, b - price.price[i][j]);
    }
    return slack;
}

std::vector<double> holdings_axis(double x_bar, std::size_t nodes) {
    if (!(x_bar > 1.0)) throw ConfigError("holdings axis: x_bar must exceed 1");
    std::vector<double> axis = StateGrid::uniform_axis(0.0, x_bar, std::max<std::size_t>(nodes, 2));
    bool has_one = false;
    for (double& v : axis) {
        if (std::abs(v - 1.0) <= 1e-12) {
            v = 1.0;
            has_one = true;
        }
    }
    if (!has_one) axis.push_back(1.0);
    std::sort(axis.begin(), axis.end());
    return axis;
}

ChainPtr build_lucas_chain(const LucasParams& p, const LucasSetup& setup) {
    p.validate();
    if (setup.z_seeds.empty()) throw ConfigError("lucas: at least one shock seed is required");
    const bool log_linear = p.kernel.kind() == TransitionKernel::Kind::log_log_ar;
    for (const auto& z : setup.z_seeds) {
        if (z.size() != p.k_assets) throw ConfigError("lucas: seed " + format_shock(z) + " has the wrong dimension");
        for (double v : z) {
            if (!(v >= 0.0)) throw ConfigError("lucas: dividends must be nonnegative, seed " + format_shock(z));
            if (log_linear && v < 1.0) {
                throw ConfigError("lucas: log-linear dividends live in [1, inf), seed " + format_shock(z));
            }
        }
    }
    return std::make_shared<const ShockChain>(ShockChain::build(p.kernel, setup.z_seeds, setup.chain));
}

LucasSolution solve_lucas_prices(const LucasParams& p, const LucasSetup& setup) {
    LucasSolution out;
    out.chain = build_lucas_chain(p, setup);
    const ShockChain& chain = *out.chain;
    out.audit = audit_utility(p, chain);
    if (!out.audit.passed) throw ConditionError("utility audit: " + out.audit.failure);
    out.bound = staged("price bound constants", [&] { return price_bound_constants(p, chain); });

    out.phi.resize(p.k_assets);
    staged("price functional equations", [&] {
        parallel_for(p.k_assets, setup.threads, [&](std::size_t i) { out.phi[i] = solve_phi(i, p, chain, setup.phi); });
    });
    std::vector<std::vector<double>> phi;
    for (const auto& s : out.phi) phi.push_back(s.values);
    out.price = price_from_phi(phi, p, out.chain);
    out.euler_residual = euler_residual(out.price, p);
    out.bound_slack = price_bound_slack(out.price, out.bound);
    return out;
}

std::shared_ptr<const BellmanOperator> household_operator(const LucasParams& p, const PriceFunction& price,
                                                          const LucasSetup& setup) {
    const std::size_t k = p.k_assets;
    const std::vector<double> axis =
        setup.holdings_axis.empty() ? holdings_axis(p.x_bar, setup.holdings_nodes) : setup.holdings_axis;
    if (axis.front() != 0.0 || std::abs(axis.back() - p.x_bar) > 1e-12 * p.x_bar) {
        throw ConfigError("lucas: the holdings axis must run from 0 to x_bar");
    }
    auto grid = std::make_shared<const StateGrid>(std::vector<std::vector<double>>(k, axis));
    ChainPtr chain = price.chain;
    auto prices = std::make_shared<const PriceFunction>(price);
    const Utility U = p.utility;

    ModelSpec spec;
    spec.beta = p.beta;
    spec.grid = grid;
    spec.shocks = chain;
    spec.maximizer = setup.maximizer;
    spec.threads = setup.threads;
    spec.reward = [U, prices, chain, k](std::span<const double> x, std::span<const double> y, std::span<const double> z) {
        const std::size_t iz = chain->index_of(z);
        double c = 0.0;
        double scale = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double pi = prices->price[i][iz];
            c += x[i] * z[i] + (x[i] - y[i]) * pi;
            scale += x[i] * (z[i] + pi);
        }
        if (c < 0.0) {
            if (c < -1e-12 * std::max(1.0, scale)) return kNegInf;
            c = 0.0;
        }
        return U.u(c);
    };
    const bool grid_actions = setup.action_mode == ActionMode::grid;
    spec.feasible = [prices, chain, grid, k, grid_actions](std::span<const double> x, std::span<const double> z) {
        const std::size_t iz = chain->index_of(z);
        std::vector<double> coeff(k);
        double bound = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            coeff[i] = prices->price[i][iz];
            bound += x[i] * (z[i] + coeff[i]);
        }
        if (grid_actions) {
            const double tol = 1e-12 * std::max(1.0, std::abs(bound));
            std::vector<std::vector<double>> candidates;
            for (std::size_t j = 0; j < grid->size(); ++j) {
                auto y = grid->point(j);
                double cost = 0.0;
                for (std::size_t i = 0; i < k; ++i) cost += coeff[i] * y[i];
                if (cost <= bound + tol) candidates.push_back(std::move(y));
            }
            return ActionSet::from_candidates(std::move(candidates));
        }
        std::vector<double> lo(k);
        std::vector<double> hi(k);
        for (std::size_t i = 0; i < k; ++i) {
            lo[i] = grid->lower(i);
            hi[i] = grid->upper(i);
        }
        ActionSet set = ActionSet::box(std::move(lo), std::move(hi));
        set.budget = LinearBudget{std::move(coeff), bound};
        return set;
    };
    return staged("household setup", [&] { return std::make_shared<const BellmanOperator>(std::move(spec)); });
}

HouseholdLedger household_ledger(const LucasParams& p, const PriceFunction& price, const PriceBound& bound,
                                 const BellmanOperator& T) {
    const ShockChain& chain = *price.chain;
    const std::size_t k = p.k_assets;
    const std::size_t n = chain.size();
    const double xb = p.x_bar * static_cast<double>(k) * bound.intercept;
    if (!(xb > 0.0)) throw ConditionError("household ledger: the price-bound intercept must be positive");
    const double u_b = p.utility.u(xb);
    const double du_b = p.utility.du(xb);

    HouseholdLedger out;
    out.l0.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double excess = static_cast<double>(k) * (bound.price_bound[j] - bound.intercept);
        out.l0[j] = u_b + du_b * p.x_bar * (total(chain.node(j)) + excess);
    }

    const ValueFunction psi = T.psi();
    out.psi_slack = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        double m = 0.0;
        for (double v : psi.slice(j)) m = std::max(m, std::abs(v));
        out.psi_slack = std::min(out.psi_slack, out.l0[j] - m);
    }

    const double beta = p.beta;
    const CopOperator L = [&](const SeminormTable& q) {
        SeminormTable r(1, n);
        for (std::size_t j = 0; j < n; ++j) r(0, j) = beta * chain.expectation(j, [&](std::size_t m) { return q(0, m); });
        return r;
    };
    IndexLabeler label = [&](std::size_t, std::size_t col) { return "z = " + format_shock(chain.node(col)); };
    SeminormTable l0(1, n, out.l0);
    SeminormTable r0(1, n);
    for (std::size_t j = 0; j < n; ++j) r0(0, j) = chain.expectation(j, [&](std::size_t m) { return out.l0[m]; });
    const SeminormTable R0 = cop_series_R0(L, r0, SeriesOptions{}, label);
    const SeminormTable lsum = cop_series_R0(L, l0, SeriesOptions{}, label);
    out.R0.assign(R0.values().begin(), R0.values().end());
    out.l_sum.assign(lsum.values().begin(), lsum.values().end());

    if (bound.regime == LucasRegime::linear) {
        const auto E = static_cast<Eigen::Index>(k);
        const Eigen::MatrixXd& B = p.kernel.matrix();
        const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(E, E);
        const std::vector<double> Ew = innovation_mean(p.kernel);
        const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(Ew.data(), E);
        const Eigen::RowVectorXd a = Eigen::Map<const Eigen::RowVectorXd>(bound.slope.data(), E);
        // x_bar'(I + A) v with every row of A equal to the slope a'.
        const auto weight = [&](const Eigen::VectorXd& v) { return p.x_bar * (v.sum() + static_cast<double>(k) * a.dot(v)); };
        const double drift = beta / (1.0 - beta) * du_b * weight((I - B).inverse() * w);
        const Eigen::MatrixXd inv = (I - beta * B).inverse();
        out.w0_closed.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            const Eigen::VectorXd z = Eigen::Map<const Eigen::VectorXd>(chain.node(j).data(), E);
            out.w0_closed[j] = u_b / (1.0 - beta) + du_b * weight(inv * z) + drift;
        }
    }
    return out;
}

double unit_holdings_gap(const PolicyFunction& policy) {
    const StateGrid& grid = *policy.grid();
    std::vector<double> one(grid.dim(), 1.0);
    std::optional<std::size_t> node;
    for (std::size_t j = 0; j < grid.size() && !node; ++j) {
        const auto x = grid.point(j);
        if (std::all_of(x.begin(), x.end(), [](double v) { return v == 1.0; })) node = j;
    }
    if (!node) throw ConfigError("unit_holdings_gap: the holdings grid has no node at x = 1");
    double gap = 0.0;
    for (std::size_t iz = 0; iz < policy.chain()->size(); ++iz) {
        for (double y : policy.action(*node, iz)) gap = std::max(gap, std::abs(y - 1.0));
    }
    return gap;
}

LucasSolution solve_lucas(const LucasParams& p, const LucasSetup& setup) {
    LucasSolution out = solve_lucas_prices(p, setup);
    out.household = household_operator(p, out.price, setup);
    const BellmanOperator& T = *out.household;
    SolveOptions options;
    options.tolerance = setup.tolerance;
    options.max_iter = setup.max_iter;
    options.monitored = {CompactSet::hull(*T.grid())};
    auto solved = staged("household value iteration", [&] { return solve_bellman(T, options); });
    out.value = std::move(solved.value);
    out.policy = std::move(solved.policy);
    out.report = std::move(solved.report);
    out.ledger = staged("household ledger", [&] { return household_ledger(p, out.price, out.bound, T); });
    out.ledger.containment_slack = std::numeric_limits<double>::infinity();
    const CompactSet X = CompactSet::hull(*T.grid());
    for (std::size_t j = 0; j < out.chain->size(); ++j) {
        out.ledger.containment_slack = std::min(out.ledger.containment_slack, out.ledger.R0[j] - seminorm(out.value, X, j));
    }
    out.unit_holdings_gap = unit_holdings_gap(out.policy);
    return out;
}

}  // namespace stochdp
