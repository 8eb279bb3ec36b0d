#pragma once

#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "stochdp/bellman.hpp"
#include "stochdp/finite_dp.hpp"
#include "stochdp/growth_model.hpp"
#include "stochdp/lucas_model.hpp"

namespace stochdp::cli {

struct SimulationPlan {
    bool enabled = false;
    SimulationOptions options;
    std::vector<std::vector<double>> starts;  // state coordinates followed by the shock
};

struct GrowthRun {
    GrowthParams params;
    GrowthSetup setup;
    SimulationPlan simulation;
};

struct LucasRun {
    LucasParams params;
    LucasSetup setup;
};

/// Savings problem: Gamma(x, z) = [0, min(x_bar, R x + z)], U = (R x + z - y)^{1-sigma} / (1-sigma).
struct CustomRun {
    double R = 1.0;
    double sigma = 0.5;
    double beta = 0.9;
    double x_bar = 10.0;
    std::vector<double> x_axis;
    TransitionKernel kernel = TransitionKernel::degenerate(1);
    std::vector<Shock> seeds;
    ChainBuildOptions chain;
    ActionMode action_mode = ActionMode::continuous;
    MaximizerOptions maximizer;
    double tolerance = 1e-8;
    std::size_t max_iter = 10000;
    std::vector<CompactSet> monitored;
    std::optional<double> drift_alpha;
    DriftOptions drift;
    unsigned threads = 1;
};

/// Small savings problem on explicit nodes with an explicit transition matrix.
struct OracleRun {
    std::vector<double> x;
    std::vector<double> z;
    std::vector<std::vector<double>> P;
    double R = 1.0;
    double sigma = 0.5;
    double beta = 0.9;
    double tolerance = 1e-12;
};

struct CounterexampleRun {
    std::string function = "identity";
    std::size_t points = 25;
    double z_min = 1e-6;
    double y = 1.0;
    double beta = 0.5;
    std::vector<double> m_samples;
    std::vector<double> z_samples;
};

InnovationLaw innovation_from_config(const Config& c, const std::string& section);
QuadratureRule quadrature_from_config(const Config& c);
/// kernel = linear_ar | log_log_ar | degenerate, with B / rho and the innovation law.
TransitionKernel kernel_from_config(const Config& c, const std::string& section, std::size_t dim);
/// "log lo hi n", "uniform lo hi n" or an explicit list of nodes.
std::vector<double> axis_from_config(const Config& c, const std::string& key);
/// Every key of [monitored] is a label; values are "hull" or "lo1 lo2 ...; hi1 hi2 ...".
std::vector<CompactSet> monitored_from_config(const Config& c, const StateGrid& grid);
ChainBuildOptions chain_from_config(const Config& c);

GrowthRun growth_from_config(const Config& c);
LucasRun lucas_from_config(const Config& c);
CustomRun custom_from_config(const Config& c);
OracleRun oracle_from_config(const Config& c);
CounterexampleRun counterexample_from_config(const Config& c);

std::shared_ptr<const BellmanOperator> custom_operator(const CustomRun& run);
BoundFn custom_l0(const CustomRun& run);
std::shared_ptr<const BellmanOperator> oracle_operator(const OracleRun& run);
FiniteMdp oracle_mdp(const OracleRun& run);

}  // namespace stochdp::cli
