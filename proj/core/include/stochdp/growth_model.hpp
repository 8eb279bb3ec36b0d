#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stochdp/bellman.hpp"
#include "stochdp/bound_ledger.hpp"
#include "stochdp/shock_chain.hpp"

namespace stochdp {

/// Stochastic endogenous growth with physical capital k, human capital h, hours n and
/// leisure l = 1 - n:
///   max E sum beta^t c^{1-sigma} l^{psi_leisure (1-sigma)} / (1-sigma)
///   c + k' + h' <= z A k^alpha (n h)^{1-alpha} + (1-delta_k) k + (1-delta_h) h,
///   ln z' = rho ln z + ln w, w >= 1.
struct GrowthParams {
    double A = 1.0;
    double alpha = 0.3;
    double sigma = 0.5;
    double psi_leisure = 0.0;
    double delta_k = 0.1;
    double delta_h = 0.1;
    double beta = 0.9;
    double rho = 0.0;
    InnovationLaw W = InnovationLaw::point_mass({1.0});

    void validate() const;
};

struct GrowthSetup {
    std::vector<double> k_axis;
    std::vector<double> h_axis;
    // With fixed_h the state is k alone and human capital stays at h_bar (h' = h = h_bar).
    bool fixed_h = false;
    double h_bar = 1.0;
    std::vector<double> z_seeds{1.0};
    ChainBuildOptions chain;
    QuadratureRule quadrature;
    ActionMode action_mode = ActionMode::continuous;
    MaximizerOptions maximizer;
    unsigned threads = 1;
    std::vector<CompactSet> monitored;  // defaults to the grid hull
    double tolerance = 1e-8;
    std::size_t max_iter = 10000;
    MomentOptions moment;
    DriftOptions drift;
};

/// gamma = A alpha^alpha (1-alpha)^{1-alpha} + (1 - delta), delta = min(delta_k, delta_h).
double gamma_const(const GrowthParams& p);

struct GrowthCondition {
    bool holds = false;
    double value = 0.0;  // beta gamma^{1-sigma} Theta
    double gamma = 0.0;
    MomentEstimate theta;
    double alpha_drift = 0.0;  // gamma^{1-sigma} Theta
};

GrowthCondition check_growth_condition(const GrowthParams& p, const MomentOptions& options = {});

/// g(k, h) = A k^alpha h^{1-alpha} + (1 - delta)(k + h), hours fixed at n = 1.
double g_bound(const GrowthParams& p, double k, double h);

/// l0(k, h, z) = z^{(1-sigma)/(1-rho)} g(k, h)^{1-sigma} / (1 - sigma).
double growth_l0(const GrowthParams& p, double k, double h, double z);

/// Radius R0(K, z) = Theta / (1 - beta gamma^{1-sigma} Theta) z^{rho (1-sigma)/(1-rho)} max_K g^{1-sigma} / (1 - sigma).
/// K lives in (k, h) coordinates, or in k alone with h = h_bar when fixed_h is set.
double growth_R0(const GrowthParams& p, const CompactSet& K, double z, double theta, bool fixed_h = false,
                 double h_bar = 1.0);

struct LagrangeOptimum {
    double k_next = 0.0;
    double h_next = 0.0;
    double value = 0.0;
};

/// max g(k', h')^{1-sigma} subject to k' + h' <= z g(k, h): k' = alpha z g, h' = (1-alpha) z g.
LagrangeOptimum lagrange_relaxation_optimum(const GrowthParams& p, double k, double h, double z);

/// One-period return after the inner choice of hours; -inf when consumption would be negative.
double growth_reward(const GrowthParams& p, double k, double h, double k_next, double h_next, double z);

/// Resources at full hours: z A k^alpha h^{1-alpha} + (1-delta_k) k + (1-delta_h) h.
double growth_resources(const GrowthParams& p, double k, double h, double z);

struct GrowthModel {
    GrowthParams params;
    GrowthSetup setup;
    GrowthCondition condition;
    std::shared_ptr<const BellmanOperator> op;
    std::vector<CompactSet> monitored;
    BoundFn l0;
};

GrowthModel build_growth(const GrowthParams& p, const GrowthSetup& setup);

struct GrowthSolution {
    GrowthModel model;
    BoundLedger ledger;
    ValueFunction value;
    PolicyFunction policy;
    IterationReport report;
};

GrowthSolution solve_growth(const GrowthParams& p, const GrowthSetup& setup);

}  // namespace stochdp
