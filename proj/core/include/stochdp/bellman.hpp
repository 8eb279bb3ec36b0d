#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "stochdp/contraction.hpp"
#include "stochdp/maximizer.hpp"
#include "stochdp/value_function.hpp"

namespace stochdp {

using RewardFn = std::function<double(std::span<const double> x, std::span<const double> y, std::span<const double> z)>;
using FeasibleFn = std::function<ActionSet(std::span<const double> x, std::span<const double> z)>;

/// (X, Z, Gamma, Q, U, beta): actions are next-period states, so Gamma(x, z) is a subset of X.
struct ModelSpec {
    RewardFn reward;
    FeasibleFn feasible;
    double beta = 0.9;
    GridPtr grid;
    ChainPtr shocks;
    MaximizerOptions maximizer;
    unsigned threads = 1;
};

class PolicyFunction {
public:
    PolicyFunction() = default;
    PolicyFunction(GridPtr grid, ChainPtr chain, std::size_t action_dim);

    std::size_t action_dim() const noexcept { return action_dim_; }
    const GridPtr& grid() const noexcept { return grid_; }
    const ChainPtr& chain() const noexcept { return chain_; }
    std::span<double> action(std::size_t ix, std::size_t iz);
    std::span<const double> action(std::size_t ix, std::size_t iz) const;
    /// Componentwise multilinear interpolation of the stored actions.
    std::vector<double> evaluate(std::span<const double> x, std::size_t iz) const;
    double max_abs_difference(const PolicyFunction& other) const;

    /// Columns x1..xl, z1..zk, y1..yl.
    void write_csv(std::ostream& out) const;

private:
    GridPtr grid_;
    ChainPtr chain_;
    std::size_t action_dim_ = 0;
    std::vector<double> actions_;
};

/// Runs fn(i) for i in [0, n), split over `threads` workers. Rethrows the first exception.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

/// Bellman operator T, Markov operator M and the contraction operator parameter L.
///
/// The pseudometric family used for L has rows
///   [0, nx)          Gamma(x_i, z) for each grid node x_i,
///   [nx, nx + nK)    the monitored compact sets,
///   nx + nK          the node-wise sup at z (no expectation),
/// and one column per shock node. Gamma rows take the max over the nodes of every grid
/// cell meeting the bounding box of Gamma(x, z), which dominates the max over Gamma of
/// any multilinear interpolant.
class BellmanOperator {
public:
    explicit BellmanOperator(ModelSpec model);

    const ModelSpec& model() const noexcept { return model_; }
    const GridPtr& grid() const noexcept { return model_.grid; }
    const ChainPtr& shocks() const noexcept { return model_.shocks; }
    std::size_t nx() const noexcept { return model_.grid->size(); }
    std::size_t nz() const noexcept { return model_.shocks->size(); }
    std::size_t action_dim() const noexcept { return model_.grid->dim(); }
    double beta() const noexcept { return model_.beta; }

    ValueFunction zero() const;
    const ActionSet& gamma(std::size_t ix, std::size_t iz) const { return gamma_[iz * nx() + ix]; }
    /// Gamma(x, z) at any state, clipped to the grid hull; throws NumericalError when empty.
    ActionSet feasible_set(std::span<const double> x, std::span<const double> z) const;

    ValueFunction markov(const ValueFunction& f) const;
    ValueFunction apply(const ValueFunction& f) const;
    std::pair<ValueFunction, PolicyFunction> apply_with_policy(const ValueFunction& f) const;
    PolicyFunction policy(const ValueFunction& f) const;
    ValueFunction psi() const;

    /// U(x, y, z) + beta (Mf)(y, z) for the node (ix, iz) and action y.
    double objective(const ValueFunction& Mf, std::size_t ix, std::size_t iz, std::span<const double> y) const;

    std::size_t family_rows(std::size_t monitored) const noexcept { return nx() + monitored + 1; }
    PseudometricFamily<ValueFunction> metric_family(const std::vector<CompactSet>& Ks) const;
    SeminormTable distances(const ValueFunction& f, const ValueFunction& g, const std::vector<CompactSet>& Ks) const;
    /// Pseudometric values of a nonnegative node table d(x, z) (e.g. |f - g| or a bound l0).
    SeminormTable family_seminorms(const ValueFunction& d, const std::vector<CompactSet>& Ks) const;
    SeminormTable cop_apply(const SeminormTable& p, const std::vector<CompactSet>& Ks) const;
    CopOperator cop(const std::vector<CompactSet>& Ks) const;
    IndexLabeler family_labeler(const std::vector<CompactSet>& Ks) const;

    /// max over the cover of Gamma(ix, iz) of node values.
    double gamma_cover_max(std::span<const double> node_values, std::size_t ix, std::size_t iz) const;

private:
    ModelSpec model_;
    std::vector<ActionSet> gamma_;
    std::vector<std::size_t> cover_lo_;
    std::vector<std::size_t> cover_hi_;
};

ValueFunction markov_operator(const ValueFunction& f);
ValueFunction apply_bellman(const ValueFunction& f, const BellmanOperator& T);
ValueFunction psi(const BellmanOperator& T);
SeminormTable cop_apply(const SeminormTable& p, const BellmanOperator& T, const std::vector<CompactSet>& Ks);
PolicyFunction extract_policy(const ValueFunction& f, const BellmanOperator& T);

struct SolveOptions {
    double tolerance = 1e-8;
    std::size_t max_iter = 10000;
    std::vector<CompactSet> monitored;
    bool check_bound = true;
    std::optional<SeminormTable> radius;
    bool certified_stop = false;
    std::optional<ValueFunction> initial;
    std::function<void(std::size_t, const SeminormTable&)> on_iteration;
};

struct SolveResult {
    ValueFunction value;
    PolicyFunction policy;
    IterationReport report;
};

SolveResult solve_bellman(const BellmanOperator& T, const SolveOptions& options = {});

enum class SimulationMode { lottery, interpolated };

struct SimulationOptions {
    std::size_t horizon = 100;
    std::size_t paths = 10000;
    std::uint64_t seed = 0;
    SimulationMode mode = SimulationMode::lottery;
};

struct SimulationResult {
    double mean = 0.0;
    double standard_error = 0.0;
    double discount_tail = 0.0;  // beta^{horizon + 1}: multiply by a bound on |v| for the truncation error
};

/// Monte-Carlo discounted return over horizon + 1 periods under a stationary policy.
/// In lottery mode the state stays on grid nodes: the next state is drawn from the
/// interpolation stencil of the chosen action, so the estimator is unbiased for the
/// tabulated fixed point. Interpolated mode follows actions exactly.
SimulationResult simulate_policy_value(const BellmanOperator& T, const PolicyFunction& policy,
                                       std::span<const double> x0, std::size_t iz0, const SimulationOptions& options);

}  // namespace stochdp
