#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "stochdp/bellman.hpp"

namespace stochdp {

using BoundFn = std::function<double(std::span<const double> x, std::span<const double> z)>;

struct DriftOptions {
    std::size_t audit_factor = 2;  // audit grid splits every solver cell this many times per axis
    double rel_tol = 1e-10;
    MaximizerOptions maximizer;
};

/// Certificate for the geometric bound sequence l_t = (alpha beta)^t l0.
struct BoundLedger {
    ValueFunction l0;
    double alpha = 0.0;
    double beta = 0.0;
    std::vector<CompactSet> monitored;
    SeminormTable r0;  // pseudometric-family seminorms of l0 (layout of BellmanOperator::metric_family)
    SeminormTable R0;  // r0 / (1 - alpha beta)
    bool verified = false;
    double worst_slack = 0.0;      // min over checked (x, z) of alpha l0(x, z) - E max_Gamma l0
    std::string worst_node;
    std::size_t checked_nodes = 0;
    std::size_t audit_grid_size = 0;
    double psi_slack = 0.0;        // min over grid nodes of l0 - |psi|
    std::string psi_worst_node;
    std::string failure;
};

/// Checks sum_{z'} P(z, z') max_{y in Gamma(x, z)} l0(y, z') <= alpha l0(x, z) on the solver grid
/// and on a denser audit grid, and l0 >= |psi| on the solver grid. Never throws for a failed
/// inequality; `verified` and `failure` report it.
BoundLedger audit_drift_bound(const BoundFn& l0, const BellmanOperator& T, double alpha,
                               const std::vector<CompactSet>& monitored, const DriftOptions& options = {});

/// As audit_drift_bound but throws ConditionError on failure, naming the worst node and slack.
BoundLedger verify_drift_bound(const BoundFn& l0, const BellmanOperator& T, double alpha,
                                const std::vector<CompactSet>& monitored, const DriftOptions& options = {});

/// (alpha beta)^t l0.
ValueFunction lt_term(const BoundLedger& ledger, std::size_t t);

/// L^t R0: a bound on the distance from the t-th iterate to the fixed point.
SeminormTable residual_certificate(const BoundLedger& ledger, const CopOperator& L, std::size_t t);

}  // namespace stochdp
