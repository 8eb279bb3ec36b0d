#include "stochdp/contraction.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace stochdp {

namespace detail {

void require_finite(const SeminormTable& table, std::size_t iteration, const IndexLabeler& label) {
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (!std::isfinite(table[i])) {
            throw NumericalError("non-finite pseudometric value at iteration " + std::to_string(iteration) +
                                 ", index " + describe_index(table, i, label));
        }
    }
}

bool below(const SeminormTable& residual, const FixedPointOptions& options) {
    if (options.tolerances) {
        if (!residual.same_shape(*options.tolerances)) {
            throw ConfigError("iterate_fixed_point: tolerance table shape differs from the pseudometric family");
        }
        for (std::size_t i = 0; i < residual.size(); ++i) {
            if (!(residual[i] <= (*options.tolerances)[i])) return false;
        }
        return true;
    }
    return residual.max() <= options.tolerance;
}

}  // namespace detail

SeminormTable cop_series_R0(const CopOperator& L, const SeminormTable& r0, const SeriesOptions& options,
                            const IndexLabeler& label) {
    for (std::size_t i = 0; i < r0.size(); ++i) {
        if (!std::isfinite(r0[i]) || r0[i] < 0.0) {
            throw NumericalError("cop_series_R0: r0 must be finite and nonnegative, index " +
                                 describe_index(r0, i, label));
        }
    }
    SeminormTable sum = r0;
    SeminormTable term = r0;
    if (term.empty() || term.max() < options.tail_tol) return sum;

    std::vector<std::size_t> nondecreasing(r0.size(), 0);
    for (std::size_t t = 1; t <= options.max_terms; ++t) {
        SeminormTable next = L(term);
        if (!next.same_shape(term)) throw NumericalError("cop_series_R0: operator changed the table shape");
        for (std::size_t i = 0; i < next.size(); ++i) {
            if (!std::isfinite(next[i])) {
                throw DivergenceError("cop_series_R0: non-finite term " + std::to_string(t) + " at index " +
                                      describe_index(next, i, label));
            }
            if (next[i] >= options.tail_tol && next[i] >= term[i]) {
                if (++nondecreasing[i] >= options.divergence_window) {
                    throw DivergenceError("cop_series_R0: terms stopped decreasing at index " +
                                          describe_index(next, i, label) + " (term " + std::to_string(t) + ")");
                }
            } else {
                nondecreasing[i] = 0;
            }
        }
        sum += next;
        term = std::move(next);
        if (term.max() < options.tail_tol) return sum;
    }
    const auto worst = static_cast<std::size_t>(
        std::max_element(term.values().begin(), term.values().end()) - term.values().begin());
    throw DivergenceError("cop_series_R0: tail still above tolerance after " + std::to_string(options.max_terms) +
                          " terms at index " + describe_index(term, worst, label));
}

SeminormTable cop_power(const CopOperator& L, SeminormTable table, std::size_t t) {
    for (std::size_t s = 0; s < t; ++s) table = L(table);
    return table;
}

bool check_geometric_tail(const CopOperator& L, const SeminormTable& d0, std::size_t t0, const SeminormTable& s,
                          double theta) {
    constexpr double rel = 1e-12;
    if (!(theta >= 0.0 && theta < 1.0)) return false;
    if (!s.all_finite() || !s.all_nonnegative()) return false;
    const SeminormTable lifted = cop_power(L, d0, t0);
    if (!dominated_by(lifted, s, rel)) return false;
    return dominated_by(L(s), theta * s, rel);
}

PseudometricFamily<double> absolute_value_metric() {
    PseudometricFamily<double> family;
    family.distances = [](const double& x, const double& y) { return SeminormTable::scalar(std::abs(x - y)); };
    family.label = [](std::size_t, std::size_t) { return std::string("|.|"); };
    return family;
}

}  // namespace stochdp
