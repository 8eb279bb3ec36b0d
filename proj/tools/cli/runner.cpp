#include "runner.hpp"

#include <cmath>
#include <sstream>

#include "config.hpp"
#include "models.hpp"
#include "stochdp/counterexample.hpp"
#include "stochdp/error.hpp"
#include "stochdp/finite_dp.hpp"
#include "stochdp/io.hpp"

namespace stochdp::cli {

namespace {

using json = nlohmann::json;

struct Check {
    std::string name;
    bool passed = false;
    double value = 0.0;
    std::string detail;
};

/// A named check failed while solving; carries the check name into the report.
class CheckFailure : public ConditionError {
public:
    CheckFailure(std::string check, const std::string& what) : ConditionError(what), check_(std::move(check)) {}
    const std::string& check() const noexcept { return check_; }

private:
    std::string check_;
};

json number(double v) { return std::isfinite(v) ? json(v) : json(format_double(v)); }

json checks_json(const std::vector<Check>& checks) {
    json out = json::array();
    for (const auto& c : checks) {
        out.push_back({{"name", c.name}, {"passed", c.passed}, {"value", number(c.value)}, {"detail", c.detail}});
    }
    return out;
}

void require_all(const std::vector<Check>& checks) {
    for (const auto& c : checks) {
        if (!c.passed) throw CheckFailure(c.name, c.name + " failed: " + c.detail);
    }
}

json table_json(const SeminormTable& t, const IndexLabeler& label = {}) {
    json values = json::array();
    for (std::size_t r = 0; r < t.rows(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < t.cols(); ++c) row.push_back(number(t(r, c)));
        values.push_back(std::move(row));
    }
    json out = {{"rows", t.rows()}, {"cols", t.cols()}, {"max", number(t.empty() ? 0.0 : t.max())}, {"values", values}};
    if (label && t.rows() > 0) {
        json rows = json::array();
        for (std::size_t r = 0; r < t.rows(); ++r) rows.push_back(label(r, 0));
        out["row_labels"] = rows;
    }
    return out;
}

json iteration_json(const IterationReport& r) {
    json history = json::array();
    for (double v : r.residual_history) history.push_back(number(v));
    return {{"iterations", r.iterations},
            {"converged", r.converged},
            {"stop_reason", r.stop_reason},
            {"final_residual", number(r.final_residuals.empty() ? 0.0 : r.final_residuals.max())},
            {"bound_violations", r.bound_violations},
            {"worst_bound_excess", number(r.worst_bound_excess)},
            {"residual_history", history}};
}

json chain_json(const ShockChain& chain) {
    return {{"nodes", chain.size()},
            {"closed", chain.closed()},
            {"snapped_successors", chain.snapped_successors()},
            {"max_snap_distance", number(chain.max_snap_distance())}};
}

json vector_json(const std::vector<double>& v) {
    json out = json::array();
    for (double x : v) out.push_back(number(x));
    return out;
}

template <class T>
std::string csv_of(const T& table) {
    std::ostringstream out;
    table.write_csv(out);
    return out.str();
}

void require_converged(const IterationReport& r, const std::string& what) {
    if (!r.converged) {
        throw NumericalError(what + " did not converge: " + r.stop_reason + ", residual " +
                             format_double(r.final_residuals.max()));
    }
}

struct Context {
    const Config& config;
    std::string command;
    json& report;
    std::map<std::string, std::string>& files;
};

// ---------------------------------------------------------------- growth

struct GrowthAudit {
    std::vector<Check> checks;
    std::optional<BoundLedger> ledger;
};

GrowthAudit audit_growth(const GrowthModel& model) {
    GrowthAudit out;
    const auto& cond = model.condition;
    out.checks.push_back({"growth_condition", cond.holds, cond.value,
                          "beta * gamma^(1-sigma) * Theta = " + format_double(cond.value) + " (gamma " +
                              format_double(cond.gamma) + ", Theta " + format_double(cond.theta.value) + " by " +
                              cond.theta.method + "); must be below 1"});
    const double ab = cond.alpha_drift * model.params.beta;
    out.checks.push_back({"drift_discount_product", ab < 1.0, ab,
                          "alpha * beta with alpha = gamma^(1-sigma) * Theta = " + format_double(cond.alpha_drift)});
    if (!(ab < 1.0)) return out;
    BoundLedger ledger = audit_drift_bound(model.l0, *model.op, cond.alpha_drift, model.monitored, model.setup.drift);
    const bool drift_ok = ledger.failure.find("drift inequality") == std::string::npos;
    const bool psi_ok = ledger.failure.find("|psi|") == std::string::npos;
    out.checks.push_back({"drift_inequality", drift_ok, ledger.worst_slack,
                          "min of alpha l0 - E max_Gamma l0 over " + std::to_string(ledger.checked_nodes) +
                              " points; worst at " + ledger.worst_node});
    out.checks.push_back({"reward_bound", psi_ok, ledger.psi_slack,
                          "min of l0 - |psi| over grid nodes; worst at " + ledger.psi_worst_node});
    out.ledger = std::move(ledger);
    return out;
}

json ledger_json(const BoundLedger& ledger, const BellmanOperator& T) {
    const IndexLabeler label = T.family_labeler(ledger.monitored);
    return {{"alpha", number(ledger.alpha)},
            {"beta", number(ledger.beta)},
            {"alpha_beta", number(ledger.alpha * ledger.beta)},
            {"verified", ledger.verified},
            {"worst_slack", number(ledger.worst_slack)},
            {"worst_node", ledger.worst_node},
            {"checked_nodes", ledger.checked_nodes},
            {"audit_grid_size", ledger.audit_grid_size},
            {"psi_slack", number(ledger.psi_slack)},
            {"psi_worst_node", ledger.psi_worst_node},
            {"failure", ledger.failure},
            {"r0", table_json(ledger.r0, label)},
            {"R0", table_json(ledger.R0, label)}};
}

void run_growth(Context& ctx) {
    const GrowthRun run = growth_from_config(ctx.config);
    ctx.config.finish();
    const GrowthModel model = build_growth(run.params, run.setup);
    const BellmanOperator& T = *model.op;
    ctx.report["chain"] = chain_json(*T.shocks());
    ctx.report["condition"] = {{"value", number(model.condition.value)},
                               {"gamma", number(model.condition.gamma)},
                               {"theta", number(model.condition.theta.value)},
                               {"theta_standard_error", number(model.condition.theta.standard_error)},
                               {"theta_method", model.condition.theta.method},
                               {"alpha_drift", number(model.condition.alpha_drift)}};

    GrowthAudit audit = audit_growth(model);
    ctx.report["checks"] = checks_json(audit.checks);
    if (audit.ledger) ctx.files["ledger.json"] = ledger_json(*audit.ledger, T).dump(2) + "\n";
    require_all(audit.checks);
    if (ctx.command == "check") return;

    const BoundLedger& ledger = *audit.ledger;
    SolveOptions options;
    options.tolerance = run.setup.tolerance;
    options.max_iter = run.setup.max_iter;
    options.monitored = model.monitored;
    options.radius = ledger.R0;
    const SolveResult solved = solve_bellman(T, options);
    ctx.report["iteration"] = iteration_json(solved.report);
    require_converged(solved.report, "value iteration");

    ValueFunction magnitude = solved.value;
    for (double& v : magnitude.values()) v = std::abs(v);
    const SeminormTable seminorms = T.family_seminorms(magnitude, model.monitored);
    const SeminormTable certificate = residual_certificate(ledger, T.cop(model.monitored), solved.report.iterations);
    ctx.report["ball"] = {{"membership_slack", number(-max_excess(seminorms, ledger.R0))},
                          {"certified_distance_bound", number(certificate.max())}};

    if (run.simulation.enabled) {
        json sims = json::array();
        const std::size_t d = T.grid()->dim();
        const double vmax = solved.value.max_abs();
        for (const auto& start : run.simulation.starts) {
            const std::vector<double> x0(start.begin(), start.begin() + static_cast<std::ptrdiff_t>(d));
            const double z0[1] = {start[d]};
            const std::size_t iz = T.shocks()->index_of(z0);
            const SimulationResult sim = simulate_policy_value(T, solved.policy, x0, iz, run.simulation.options);
            const double v = solved.value.evaluate(x0, iz);
            const double truncation = sim.discount_tail * vmax;
            const double gap = std::abs(sim.mean - v);
            sims.push_back({{"state", vector_json(x0)},
                            {"shock", number(start[d])},
                            {"value", number(v)},
                            {"simulated", number(sim.mean)},
                            {"standard_error", number(sim.standard_error)},
                            {"truncation_bound", number(truncation)},
                            {"gap", number(gap)},
                            {"within_4se_plus_truncation", gap <= 4.0 * sim.standard_error + truncation}});
        }
        ctx.report["simulation"] = sims;
    }
    ctx.files["value.csv"] = csv_of(solved.value);
    ctx.files["policy.csv"] = csv_of(solved.policy);
}

// ---------------------------------------------------------------- lucas

std::vector<Check> kernel_checks(const LucasParams& p) {
    std::vector<Check> checks;
    try {
        p.kernel.validate();
        checks.push_back({"kernel_regime", true, 0.0, regime_name(lucas_regime(p.kernel)) + " dividends"});
    } catch (const ConditionError& e) {
        checks.push_back({"kernel_regime", false, 0.0, e.what()});
        return checks;
    }
    if (p.kernel.kind() == TransitionKernel::Kind::log_log_ar) {
        double worst = 0.0;
        std::string detail = "no unit-root dividend";
        bool ok = true;
        for (std::size_t i = 0; i < p.k_assets && ok; ++i) {
            if (p.kernel.rho()[i] < 1.0) continue;
            const double product = p.beta * p.kernel.innovation().mean()[i];
            worst = std::max(worst, product);
            detail = "beta E[w] = " + format_double(product) + " for asset " + std::to_string(i + 1) + "; must be below 1";
            ok = product < 1.0;
        }
        checks.push_back({"rho_one_discount", ok, worst, detail});
    }
    return checks;
}

void chain_checks(const LucasParams& p, const ShockChain& chain, std::vector<Check>& checks) {
    const UtilityAudit audit = audit_utility(p, chain);
    checks.push_back({"utility_audit", audit.passed, std::min(audit.growth_slack, audit.floor_slack),
                      audit.passed ? "u(0) = 0, u' > 0, c u'(c) <= gamma c + delta on " +
                                         std::to_string(audit.audit_points) + " points, u'(1'z) >= a at every node"
                                   : audit.failure});
    if (!audit.passed) return;
    try {
        const PriceBound bound = price_bound_constants(p, chain);
        checks.push_back({"price_bound_constants", true, bound.intercept, "intercept b_i"});
    } catch (const ConditionError& e) {
        checks.push_back({"price_bound_constants", false, 0.0, e.what()});
    }
}

std::string prices_csv(const PriceFunction& price, const PriceBound& bound) {
    std::ostringstream out;
    const ShockChain& chain = *price.chain;
    for (std::size_t i = 0; i < chain.dim(); ++i) out << (i ? "," : "") << 'z' << i + 1;
    for (std::size_t i = 0; i < price.k_assets; ++i) out << ",phi" << i + 1 << ",p" << i + 1;
    out << ",price_bound\n";
    for (std::size_t j = 0; j < chain.size(); ++j) {
        std::vector<double> row(chain.node(j));
        for (std::size_t i = 0; i < price.k_assets; ++i) {
            row.push_back(price.phi[i][j]);
            row.push_back(price.price[i][j]);
        }
        row.push_back(bound.price_bound[j]);
        write_csv_row(out, row);
    }
    return out.str();
}

void run_lucas(Context& ctx) {
    const LucasRun run = lucas_from_config(ctx.config);
    ctx.config.finish();
    if (!(run.params.beta >= 0.0 && run.params.beta < 1.0)) ctx.config.fail("lucas.beta", "must lie in [0, 1)");
    if (!(run.params.x_bar > 1.0)) ctx.config.fail("lucas.x_bar", "must exceed 1");

    std::vector<Check> checks = kernel_checks(run.params);
    ctx.report["checks"] = checks_json(checks);
    require_all(checks);
    const ChainPtr chain = build_lucas_chain(run.params, run.setup);
    ctx.report["chain"] = chain_json(*chain);
    chain_checks(run.params, *chain, checks);
    ctx.report["checks"] = checks_json(checks);
    require_all(checks);
    if (ctx.command == "check") return;

    const LucasSolution s = solve_lucas(run.params, run.setup);
    json phi = json::array();
    for (const auto& ph : s.phi) phi.push_back(iteration_json(ph.report));
    ctx.report["price_iterations"] = phi;
    ctx.report["iteration"] = iteration_json(s.report);
    require_converged(s.report, "household value iteration");
    ctx.report["prices"] = {{"euler_residual", number(s.euler_residual)},
                            {"bound_slack", number(s.bound_slack)},
                            {"bound_holds", s.bound_slack >= 0.0}};
    if (s.bound.regime == LucasRegime::linear) {
        const double complete = price_bound_slack(s.price, s.bound, true);
        ctx.report["prices"]["complete_bound_slack"] = number(complete);
    }
    ctx.report["household"] = {{"unit_holdings_gap", number(s.unit_holdings_gap)},
                               {"containment_slack", number(s.ledger.containment_slack)},
                               {"psi_slack", number(s.ledger.psi_slack)}};

    json bound = {{"regime", regime_name(s.bound.regime)},
                  {"slope", vector_json(s.bound.slope)},
                  {"intercept", number(s.bound.intercept)},
                  {"price_bound", vector_json(s.bound.price_bound)},
                  {"phi_bound", vector_json(s.bound.phi_bound)}};
    if (s.bound.regime == LucasRegime::linear) {
        bound["complete_slope"] = vector_json(s.bound.complete_slope);
        bound["complete_intercept"] = number(s.bound.complete_intercept);
    } else {
        bound["growth_factor"] = vector_json(s.bound.growth_factor);
        bound["mu_uniform"] = number(s.bound.mu_uniform);
        bound["mu_node"] = vector_json(s.bound.mu_node);
    }
    json household = {{"l0", vector_json(s.ledger.l0)},
                      {"R0", vector_json(s.ledger.R0)},
                      {"l_sum", vector_json(s.ledger.l_sum)},
                      {"psi_slack", number(s.ledger.psi_slack)},
                      {"containment_slack", number(s.ledger.containment_slack)}};
    if (!s.ledger.w0_closed.empty()) household["w0_closed"] = vector_json(s.ledger.w0_closed);
    const json ledger = {{"price_bound", bound},
                         {"constants",
                          {{"gamma", number(run.params.constants.gamma)},
                           {"delta", number(run.params.constants.delta)},
                           {"a", number(run.params.constants.a)}}},
                         {"household", household}};
    ctx.files["ledger.json"] = ledger.dump(2) + "\n";
    ctx.files["prices.csv"] = prices_csv(s.price, s.bound);
    ctx.files["value.csv"] = csv_of(s.value);
    ctx.files["policy.csv"] = csv_of(s.policy);
}

// ---------------------------------------------------------------- custom savings

void run_custom(Context& ctx) {
    const CustomRun run = custom_from_config(ctx.config);
    ctx.config.finish();
    const auto op = custom_operator(run);
    const BellmanOperator& T = *op;
    ctx.report["chain"] = chain_json(*T.shocks());
    std::vector<CompactSet> monitored = run.monitored;
    if (monitored.empty()) monitored.push_back(CompactSet::hull(*T.grid()));

    std::vector<Check> checks;
    std::optional<BoundLedger> ledger;
    if (run.drift_alpha) {
        const double ab = *run.drift_alpha * run.beta;
        checks.push_back({"drift_discount_product", ab < 1.0, ab, "alpha * beta must be below 1"});
        if (ab < 1.0) {
            ledger = audit_drift_bound(custom_l0(run), T, *run.drift_alpha, monitored, run.drift);
            checks.push_back({"drift_inequality", ledger->failure.find("drift inequality") == std::string::npos,
                              ledger->worst_slack, "worst at " + ledger->worst_node});
            checks.push_back({"reward_bound", ledger->failure.find("|psi|") == std::string::npos, ledger->psi_slack,
                              "worst at " + ledger->psi_worst_node});
            ctx.files["ledger.json"] = ledger_json(*ledger, T).dump(2) + "\n";
        }
    }
    ctx.report["checks"] = checks_json(checks);
    require_all(checks);
    if (ctx.command == "check") return;

    SolveOptions options;
    options.tolerance = run.tolerance;
    options.max_iter = run.max_iter;
    options.monitored = monitored;
    if (ledger) options.radius = ledger->R0;
    const SolveResult solved = solve_bellman(T, options);
    ctx.report["iteration"] = iteration_json(solved.report);
    require_converged(solved.report, "value iteration");
    if (ledger) {
        ValueFunction magnitude = solved.value;
        for (double& v : magnitude.values()) v = std::abs(v);
        ctx.report["ball"] = {
            {"membership_slack", number(-max_excess(T.family_seminorms(magnitude, monitored), ledger->R0))}};
    }
    ctx.files["value.csv"] = csv_of(solved.value);
    ctx.files["policy.csv"] = csv_of(solved.policy);
}

// ---------------------------------------------------------------- oracle

void run_oracle(Context& ctx) {
    const OracleRun run = oracle_from_config(ctx.config);
    ctx.config.finish();
    if (ctx.command == "check") {
        ctx.report["checks"] = checks_json({{"discount_range", true, run.beta, "beta in [0, 1)"}});
        return;
    }
    const auto op = oracle_operator(run);
    SolveOptions options;
    options.tolerance = run.tolerance;
    const SolveResult solved = solve_bellman(*op, options);
    ctx.report["iteration"] = iteration_json(solved.report);
    require_converged(solved.report, "value iteration");

    const FiniteMdp mdp = oracle_mdp(run);
    double policies = 1.0;
    for (const auto& actions : mdp.reward) policies *= static_cast<double>(actions.size());
    const bool enumerate = policies <= 1e6;
    const FiniteSolution vi = finite_value_iteration(mdp, 1e-13);
    const FiniteSolution brute = enumerate ? finite_policy_enumeration(mdp) : vi;
    ctx.report["brute_force"] = enumerate ? "policy enumeration" : "exhaustive value iteration";
    ctx.report["policies"] = number(policies);
    double diff = 0.0;
    double vi_diff = 0.0;
    const auto values = solved.value.values();
    for (std::size_t s = 0; s < values.size(); ++s) {
        diff = std::max(diff, std::abs(values[s] - brute.value[s]));
        vi_diff = std::max(vi_diff, std::abs(values[s] - vi.value[s]));
    }
    ctx.report["oracle_sup_diff"] = number(diff);
    ctx.report["value_iteration_sup_diff"] = number(vi_diff);
    ctx.report["states"] = values.size();
    ctx.files["value.csv"] = csv_of(solved.value);
    ctx.files["policy.csv"] = csv_of(solved.policy);
    if (!(diff <= 1e-6)) throw NumericalError("library solve differs from brute force by " + format_double(diff));
}

// ---------------------------------------------------------------- counterexample

void run_counterexample(Context& ctx) {
    const CounterexampleRun run = counterexample_from_config(ctx.config);
    ctx.config.finish();
    ScalarFn f = [](double z) { return z; };
    if (run.function == "capped") f = [](double z) { return std::min(z, 10.0); };
    if (run.function == "constant") f = [](double) { return 1.0; };
    if (ctx.command == "check") {
        ctx.report["checks"] = checks_json({{"discount_range", true, 1.5 * run.beta, "1.5 beta < 1"}});
        return;
    }
    const auto rows = jump_profile(f, run.points, run.z_min);
    std::ostringstream csv;
    write_jump_csv(csv, rows);
    ctx.files["jump.csv"] = csv.str();

    ctx.report["markov_image"] = {{"at_0", number(markov_image(f, 0.0))},
                                  {"at_0.5", number(markov_image(f, 0.5))},
                                  {"gap_at_0.01", number(discontinuity_gap(f, 0.01))}};
    json currency = json::array();
    const auto displayed = [&](double m, double z) { return currency_value(m, z, run.y, run.beta); };
    const auto exact = [&](double m, double z) { return currency_value_exact(m, z, run.y, run.beta); };
    for (double m : run.m_samples) {
        for (double z : run.z_samples) {
            currency.push_back({{"m", number(m)},
                                {"z", number(z)},
                                {"value", number(displayed(m, z))},
                                {"exact_value", number(exact(m, z))},
                                {"residual", number(currency_residual(displayed, m, z, run.y, run.beta))},
                                {"exact_residual", number(currency_residual(exact, m, z, run.y, run.beta))}});
        }
    }
    ctx.report["currency"] = currency;
}

Config default_config(const std::string& model) {
    return Config::parse_ini("schema_version = 1\nmodel = " + model + "\n", "<built-in " + model + ">");
}

}  // namespace

RunResult run(const RunRequest& request) {
    RunResult result;
    json report = json::object();
    std::map<std::string, std::string> files;
    std::optional<Config> config;
    std::string model;
    try {
        if (request.command != "solve" && request.command != "check" && request.command != "counterexample" &&
            request.command != "oracle") {
            throw ConfigError("unknown command '" + request.command + "'");
        }
        if (request.config) {
            config = Config::load(*request.config);
        } else if (request.command == "counterexample" || request.command == "oracle") {
            config = default_config(request.command);
        } else {
            throw ConfigError(request.command + " needs --config");
        }
        if (request.seed) config->set("seed", std::to_string(*request.seed));
        if (request.threads) config->set("threads", std::to_string(*request.threads));
        const auto version = config->count("schema_version");
        if (version != kSchemaVersion) {
            config->fail("schema_version", "unsupported schema version " + std::to_string(version) + " (expected " +
                                               std::to_string(kSchemaVersion) + ")");
        }
        model = config->text("model");
        if ((request.command == "counterexample" || request.command == "oracle") && model != request.command) {
            config->fail("model", "the " + request.command + " command needs model = " + request.command);
        }
        config->count("seed", 0);
        config->count("threads", 1);
        const auto out = config->setting("output");
        result.out_dir = request.out ? *request.out : std::filesystem::path(out ? *out : "out/" + model);
    } catch (const Error& e) {
        result.exit_code = kConfigError;
        result.status = "config_error";
        result.message = e.what();
        return result;
    }

    report["schema_version"] = kSchemaVersion;
    report["command"] = request.command;
    report["model"] = model;
    Context ctx{*config, request.command, report, files};
    try {
        if (model == "growth") {
            run_growth(ctx);
        } else if (model == "lucas") {
            run_lucas(ctx);
        } else if (model == "custom") {
            run_custom(ctx);
        } else if (model == "oracle") {
            run_oracle(ctx);
        } else if (model == "counterexample") {
            run_counterexample(ctx);
        } else {
            config->fail("model", "expected growth, lucas, custom, counterexample or oracle, got '" + model + "'");
        }
        result.exit_code = kOk;
        result.status = request.command == "check" ? "checks_passed" : "ok";
    } catch (const CheckFailure& e) {
        result.exit_code = kConditionFailed;
        result.status = "condition_failed";
        result.message = e.what();
        report["failed_check"] = e.check();
    } catch (const ConfigError& e) {
        result.exit_code = kConfigError;
        result.status = "config_error";
        result.message = e.what();
        return result;
    } catch (const ConditionError& e) {
        result.exit_code = kConditionFailed;
        result.status = "condition_failed";
        result.message = e.what();
    } catch (const NumericalError& e) {
        result.exit_code = kNumericalError;
        result.status = "numerical_error";
        result.message = e.what();
    } catch (const std::exception& e) {
        result.exit_code = kNumericalError;
        result.status = "numerical_error";
        result.message = std::string("unexpected error: ") + e.what();
    }

    report["status"] = result.status;
    report["exit_code"] = result.exit_code;
    report["message"] = result.message;
    report["config"] = config->resolved();
    files["report.json"] = report.dump(2) + "\n";
    try {
        for (const auto& [name, content] : files) write_text_file(result.out_dir / name, content);
    } catch (const std::exception& e) {
        result.exit_code = kNumericalError;
        result.status = "io_error";
        result.message = e.what();
    }
    result.report = std::move(report);
    result.files = std::move(files);
    return result;
}

}  // namespace stochdp::cli
