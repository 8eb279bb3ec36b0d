#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace stochdp {

/// coeff . y <= bound with coeff >= 0.
struct LinearBudget {
    std::vector<double> coeff;
    double bound = 0.0;
};

/// Feasible actions: a box, optionally cut by one linear budget, or an explicit finite list.
struct ActionSet {
    std::vector<double> lower;
    std::vector<double> upper;
    std::optional<LinearBudget> budget;
    std::vector<std::vector<double>> candidates;

    bool finite() const noexcept { return !candidates.empty(); }
    static ActionSet box(std::vector<double> lower, std::vector<double> upper);
    static ActionSet from_candidates(std::vector<std::vector<double>> candidates);
};

/// continuous: box/budget sets searched by the maximizer; grid: actions restricted to grid nodes.
enum class ActionMode { continuous, grid };

struct MaximizerOptions {
    std::size_t candidates = 64;       // scan points per action dimension
    std::size_t max_scan_points = 4096;  // caps the scan when the action has more than two dimensions
    double refine_tol = 1e-10;
    std::size_t max_cycles = 4;
};

struct MaxResult {
    std::vector<double> argmax;
    double value = 0.0;
};

using Objective = std::function<double(std::span<const double>)>;

/// Deterministic coarse scan followed by coordinate-wise golden-section refinement.
/// Ties go to the lexicographically smallest action. Throws NumericalError on an
/// empty set or a NaN objective.
MaxResult maximize(const Objective& objective, const ActionSet& set, const MaximizerOptions& options = {});

/// Upper bound on coordinate j given the other coordinates of y, from box and budget.
double coordinate_upper(const ActionSet& set, std::span<const double> y, std::size_t j);

/// Budget slack coeff . y - bound (positive means infeasible).
double budget_excess(const ActionSet& set, std::span<const double> y);

}  // namespace stochdp
