#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stochdp/error.hpp"
#include "stochdp/seminorm_table.hpp"

namespace stochdp {

/// Finite family of pseudometrics d_a laid out as a rows x cols table.
template <class Point>
struct PseudometricFamily {
    std::size_t rows = 1;
    std::size_t cols = 1;
    std::function<SeminormTable(const Point&, const Point&)> distances;
    IndexLabeler label;
};

/// Contraction operator parameter: acts on tables of pseudometric values.
using CopOperator = std::function<SeminormTable(const SeminormTable&)>;

struct FixedPointOptions {
    double tolerance = 1e-8;
    // Per-index tolerances; overrides `tolerance` when set.
    std::optional<SeminormTable> tolerances;
    std::size_t max_iter = 10000;

    // When set, every residual table is compared with L^t d(x0, T x0).
    CopOperator cop;
    double bound_rel_tol = 1e-9;
    double bound_abs_tol = 1e-12;

    // With a radius table R0 and `certified_stop`, iteration also stops once
    // L^t R0 (a bound on the distance to the fixed point) is below tolerance.
    std::optional<SeminormTable> radius;
    bool certified_stop = false;

    std::size_t tail_window = 10;
    std::function<void(std::size_t, const SeminormTable&)> on_iteration;
};

struct IterationReport {
    std::size_t iterations = 0;
    SeminormTable final_residuals;
    SeminormTable r0_series_tail;
    std::vector<double> residual_history;        // max over indices, one per sweep
    std::vector<SeminormTable> residual_tail;    // last tail_window residual tables
    std::size_t bound_violations = 0;
    double worst_bound_excess = 0.0;
    bool converged = false;
    bool certified = false;
    std::string stop_reason;
};

namespace detail {
void require_finite(const SeminormTable& table, std::size_t iteration, const IndexLabeler& label);
bool below(const SeminormTable& residual, const FixedPointOptions& options);
}  // namespace detail

template <class Point, class Map>
std::pair<Point, IterationReport> iterate_fixed_point(Map&& T, const PseudometricFamily<Point>& D,
                                                      Point x0, const FixedPointOptions& options = {}) {
    if (!(options.tolerance > 0.0)) throw ConfigError("iterate_fixed_point: tolerance must be positive");
    if (options.tolerances) {
        if (!(options.tolerances->min() > 0.0)) {
            throw ConfigError("iterate_fixed_point: per-index tolerances must be positive");
        }
    }

    IterationReport report;
    Point x = std::move(x0);
    SeminormTable bound;
    std::optional<SeminormTable> certificate = options.radius;

    for (std::size_t t = 0;; ++t) {
        Point y = T(x);
        SeminormTable d = D.distances(x, y);
        detail::require_finite(d, t, D.label);

        if (options.cop) {
            if (t == 0) {
                bound = d;
            } else {
                bound = options.cop(bound);
                const double excess = max_excess(d, bound);
                if (!dominated_by(d, bound, options.bound_rel_tol, options.bound_abs_tol)) {
                    ++report.bound_violations;
                }
                if (t == 1 || excess > report.worst_bound_excess) report.worst_bound_excess = excess;
            }
        }
        if (certificate && t > 0 && options.cop) *certificate = options.cop(*certificate);

        report.residual_history.push_back(d.max());
        report.residual_tail.push_back(d);
        if (report.residual_tail.size() > options.tail_window) {
            report.residual_tail.erase(report.residual_tail.begin());
        }
        if (options.on_iteration) options.on_iteration(t, d);

        const bool small = detail::below(d, options);
        const bool certified = options.certified_stop && certificate && detail::below(*certificate, options);
        if (small || certified) {
            report.iterations = t;
            report.final_residuals = std::move(d);
            report.converged = true;
            report.certified = certified;
            report.stop_reason = small ? "residual below tolerance" : "certified radius below tolerance";
            if (certificate) report.r0_series_tail = *certificate;
            return {std::move(x), std::move(report)};
        }
        if (t + 1 >= options.max_iter) {
            report.iterations = t + 1;
            report.final_residuals = std::move(d);
            report.stop_reason = "max_iter reached";
            if (certificate) report.r0_series_tail = *certificate;
            return {std::move(y), std::move(report)};
        }
        x = std::move(y);
    }
}

struct SeriesOptions {
    double tail_tol = 1e-12;
    std::size_t max_terms = 100000;
    std::size_t divergence_window = 5;
};

/// Partial sum of sum_t L^t r0, stopped when the last term is below tail_tol everywhere.
SeminormTable cop_series_R0(const CopOperator& L, const SeminormTable& r0, const SeriesOptions& options = {},
                            const IndexLabeler& label = {});

inline SeminormTable cop_series_R0(const CopOperator& L, const SeminormTable& r0, double tail_tol,
                                   std::size_t max_terms) {
    SeriesOptions options;
    options.tail_tol = tail_tol;
    options.max_terms = max_terms;
    return cop_series_R0(L, r0, options);
}

/// L^t applied to a table.
SeminormTable cop_power(const CopOperator& L, SeminormTable table, std::size_t t);

/// L^{t0} d0 <= s and L s <= theta s, both pointwise with 1e-12 relative tolerance.
bool check_geometric_tail(const CopOperator& L, const SeminormTable& d0, std::size_t t0,
                          const SeminormTable& s, double theta);

template <class Point>
double ball_slack(const Point& x, const Point& x0, const SeminormTable& m, const PseudometricFamily<Point>& D) {
    return -max_excess(D.distances(x0, x), m);
}

template <class Point>
bool ball_membership(const Point& x, const Point& x0, const SeminormTable& m, const PseudometricFamily<Point>& D,
                     double rel_tol = 0.0, double abs_tol = 0.0) {
    return dominated_by(D.distances(x0, x), m, rel_tol, abs_tol);
}

/// The real line with |.|; handy for scalar maps and tests.
PseudometricFamily<double> absolute_value_metric();

}  // namespace stochdp
