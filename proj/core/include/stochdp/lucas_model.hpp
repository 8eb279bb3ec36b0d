#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stochdp/bellman.hpp"
#include "stochdp/shock_chain.hpp"

namespace stochdp {

/// Period utility u and its derivative u'.
struct Utility {
    std::function<double(double)> u;
    std::function<double(double)> du;
    std::string name;
};

/// u(c) = c^{1-sigma} / (1-sigma) + c, sigma in [0, 1).
Utility preset_utility(double sigma);

/// c u'(c) <= gamma c + delta for c >= 0 and u'(1'z) >= a.
struct UtilityConstants {
    double gamma = 2.0;
    double delta = 0.0;
    double a = 1.0;
};

/// gamma = 2, delta = sigma (1-sigma)^{(1-sigma)/sigma} (the max of c^{1-sigma} - c), a = 1.
UtilityConstants preset_constants(double sigma);

/// Lucas exchange economy with k trees paying dividends z_i:
///   v(x, z) = max_{y in Gamma(x, z)} u(x'z + (x - y)'p(z)) + beta E v(y, z'),
///   Gamma(x, z) = {y in [0, x_bar]^k : y'p(z) <= x'(z + p(z))}.
struct LucasParams {
    std::size_t k_assets = 1;
    Utility utility = preset_utility(0.5);
    double beta = 0.9;
    TransitionKernel kernel = TransitionKernel::degenerate(1);
    double x_bar = 2.0;
    UtilityConstants constants = preset_constants(0.5);

    void validate() const;
};

enum class LucasRegime { linear, log_linear };

/// linear: z' = B z + w (B >= 0, ||B|| < 1); log_linear: z'_i = z_i^{rho_i} w_i (degenerate counts as rho = 1, w = 1).
LucasRegime lucas_regime(const TransitionKernel& Q);
std::string regime_name(LucasRegime regime);

struct UtilityAudit {
    bool passed = false;
    double zero_value = 0.0;         // u(0)
    double min_marginal = 0.0;       // min u' over the audit grid
    double growth_slack = 0.0;       // min over the audit grid of gamma c + delta - c u'(c)
    double growth_worst_c = 0.0;
    double floor_slack = 0.0;        // min over shock nodes of u'(1'z) - a
    std::string floor_worst_node;
    std::size_t audit_points = 0;
    std::string failure;
};

/// Audits u(0) = 0, u' > 0, c u'(c) <= gamma c + delta on a log-spaced grid of c, and
/// u'(1'z) >= a at every chain node.
UtilityAudit audit_utility(const LucasParams& p, const ShockChain& chain, std::size_t points = 241);

/// h_i(z) = beta E[z'_i u'(1'z') | z] by the kernel's quadrature.
double h_function(std::size_t i, std::span<const double> z, const LucasParams& p);

/// h_i on chain nodes, with the expectation taken under the chain's transitions.
std::vector<double> h_table(std::size_t i, const LucasParams& p, const ShockChain& chain);

struct AffineSolveOptions {
    double tolerance = 1e-10;
    std::size_t max_iter = 100000;
    std::size_t divergence_sweeps = 10;
};

struct PhiSolution {
    std::vector<double> values;
    IterationReport report;
};

/// Fixed point of f = h + beta P f on the chain, iterated from f = 0 until every node
/// residual is below tolerance. Residuals growing for divergence_sweeps consecutive
/// sweeps raise DivergenceError.
PhiSolution solve_affine(const std::vector<double>& h, double beta, const ShockChain& chain,
                         const AffineSolveOptions& options = {});

PhiSolution solve_phi(std::size_t i, const LucasParams& p, const ShockChain& chain,
                      const AffineSolveOptions& options = {});

/// Two-row pseudometric family for the affine price maps: row 0 is |f - g| at the node,
/// row 1 its expectation under P(z, .).
PseudometricFamily<std::vector<double>> affine_family(const ShockChain& chain);
/// (L p)(0, z) = beta p(1, z), (L p)(1, z) = beta sum_z' P(z, z') p(1, z').
CopOperator affine_cop(double beta, const ShockChain& chain);

/// Affine bound p_i(z) <= a_i'z + b_i and the matching bound phi_i <= w0.
struct PriceBound {
    LucasRegime regime = LucasRegime::linear;
    // linear regime: one slope vector shared by all assets; log_linear: the z-free slope mu' 1.
    std::vector<double> slope;
    double intercept = 0.0;
    // log_linear regime: mu(z) = max_i z_i c_i per node and the resulting node-wise slope.
    std::vector<double> mu_node;
    double mu_uniform = 0.0;
    std::vector<double> growth_factor;  // c_i
    // Per node: the price bound of the displayed constants and the phi bound w0.
    std::vector<double> price_bound;
    std::vector<double> phi_bound;
    // Linear regime only: constants keeping every term of the bound series.
    std::vector<double> complete_slope;
    double complete_intercept = 0.0;
};

/// Price-bound constants on the chain nodes. Linear regime:
///   a_i' = gamma 1'(I - beta B)^{-1} / a,  b_i = (gamma 1'E w + delta) / (a (1 - beta)).
/// Log-linear regime with c_i = (E w_i)^{1/(1-rho_i)} (rho_i < 1) or
/// (1-beta) E w_i / (1 - beta E w_i) (rho_i = 1) and mu(z) = max_i z_i c_i:
///   p_i(z) <= gamma mu(z) 1'z / (a (1 - beta)) + delta / (a (1 - beta)).
/// Throws ConditionError when the spectral or discount clause fails.
PriceBound price_bound_constants(const LucasParams& p, const ShockChain& chain);

struct PriceFunction {
    ChainPtr chain;
    std::size_t k_assets = 0;
    std::vector<std::vector<double>> phi;    // [asset][node]
    std::vector<std::vector<double>> price;  // [asset][node]
    std::vector<double> marginal;            // u'(1'z) per node

    std::vector<double> at(std::size_t node) const;
};

/// p_i = phi_i / u'(1'z). Throws ConditionError when u'(1'z) < a at a node.
PriceFunction price_from_phi(const std::vector<std::vector<double>>& phi, const LucasParams& p, ChainPtr chain);

/// max over assets and nodes of |u'(1'z) p_i(z) - beta E[(z'_i + p_i(z')) u'(1'z')]|.
double euler_residual(const PriceFunction& price, const LucasParams& p);

/// min over assets and nodes of bound - p_i (negative means the bound fails somewhere).
double price_bound_slack(const PriceFunction& price, const PriceBound& bound, bool complete = false);

struct LucasSetup {
    std::vector<Shock> z_seeds;
    ChainBuildOptions chain;
    std::vector<double> holdings_axis;  // per asset; empty means holdings_axis(x_bar, holdings_nodes)
    std::size_t holdings_nodes = 21;
    ActionMode action_mode = ActionMode::grid;
    MaximizerOptions maximizer;
    unsigned threads = 1;
    AffineSolveOptions phi;
    double tolerance = 1e-10;
    std::size_t max_iter = 100000;
};

/// Uniform nodes on [0, x_bar] with 1 inserted.
std::vector<double> holdings_axis(double x_bar, std::size_t nodes);

/// Bound sequence l0(z) = u(x_bar'b) + u'(x_bar'b) x_bar'(z + pbar(z) - b), l_{t+1} = beta P l_t,
/// where pbar is the affine price bound; R0(z) = sum_t sum_z' P(z, z') l_t(z').
struct HouseholdLedger {
    std::vector<double> l0;
    std::vector<double> R0;
    std::vector<double> l_sum;      // sum_t l_t
    std::vector<double> w0_closed;  // linear regime closed-form bound on sum_t l_t (empty otherwise)
    double psi_slack = 0.0;         // min over nodes of l0 - max_x |psi|
    double containment_slack = 0.0;  // min over nodes of R0 - p_{X,z}(v)
};

struct LucasSolution {
    ChainPtr chain;
    UtilityAudit audit;
    PriceBound bound;
    std::vector<PhiSolution> phi;
    PriceFunction price;
    std::shared_ptr<const BellmanOperator> household;
    HouseholdLedger ledger;
    ValueFunction value;
    PolicyFunction policy;
    IterationReport report;
    double euler_residual = 0.0;
    double bound_slack = 0.0;
    double unit_holdings_gap = 0.0;
};

ChainPtr build_lucas_chain(const LucasParams& p, const LucasSetup& setup);

/// Prices only: audits, constants, phi solves (one per asset, concurrently), prices.
LucasSolution solve_lucas_prices(const LucasParams& p, const LucasSetup& setup);

/// Household Bellman operator for a given price, with the trivial family {X}.
std::shared_ptr<const BellmanOperator> household_operator(const LucasParams& p, const PriceFunction& price,
                                                          const LucasSetup& setup);

HouseholdLedger household_ledger(const LucasParams& p, const PriceFunction& price, const PriceBound& bound,
                                 const BellmanOperator& T);

/// Solves for prices, then the household problem, then fills the ledger and the checks.
LucasSolution solve_lucas(const LucasParams& p, const LucasSetup& setup);

/// max over shock nodes of the distance between the policy at x = 1 and y = 1.
double unit_holdings_gap(const PolicyFunction& policy);

}  // namespace stochdp
