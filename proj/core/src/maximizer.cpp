#include "stochdp/maximizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stochdp/error.hpp"

namespace stochdp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kInvPhi = (std::sqrt(5.0) - 1.0) / 2.0;

double checked(const Objective& f, std::span<const double> y) {
    const double v = f(y);
    if (std::isnan(v)) throw NumericalError("objective is NaN at a feasible action");
    return v;
}

bool better(double v, std::span<const double> y, double best, const std::vector<double>& best_y) {
    if (v > best) return true;
    if (v == best && !best_y.empty()) {
        return std::lexicographical_compare(y.begin(), y.end(), best_y.begin(), best_y.end());
    }
    return false;
}

double golden(const std::function<double(double)>& f, double a, double b, double tol, double& best_value) {
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tol) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
        }
    }
    if (fc >= fd) {
        best_value = fc;
        return c;
    }
    best_value = fd;
    return d;
}

}  // namespace

ActionSet ActionSet::box(std::vector<double> lower, std::vector<double> upper) {
    ActionSet s;
    s.lower = std::move(lower);
    s.upper = std::move(upper);
    return s;
}

ActionSet ActionSet::from_candidates(std::vector<std::vector<double>> candidates) {
    ActionSet s;
    if (candidates.empty()) return s;
    const std::size_t d = candidates.front().size();
    s.lower.assign(d, std::numeric_limits<double>::infinity());
    s.upper.assign(d, -std::numeric_limits<double>::infinity());
    for (const auto& c : candidates) {
        for (std::size_t i = 0; i < d; ++i) {
            s.lower[i] = std::min(s.lower[i], c[i]);
            s.upper[i] = std::max(s.upper[i], c[i]);
        }
    }
    s.candidates = std::move(candidates);
    return s;
}

double budget_excess(const ActionSet& set, std::span<const double> y) {
    if (!set.budget) return -std::numeric_limits<double>::infinity();
    double cost = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) cost += set.budget->coeff[i] * y[i];
    return cost - set.budget->bound;
}

double coordinate_upper(const ActionSet& set, std::span<const double> y, std::size_t j) {
    double up = set.upper[j];
    if (set.budget && set.budget->coeff[j] > 0.0) {
        double rest = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (i != j) rest += set.budget->coeff[i] * y[i];
        }
        up = std::min(up, (set.budget->bound - rest) / set.budget->coeff[j]);
    }
    return up;
}

MaxResult maximize(const Objective& objective, const ActionSet& set, const MaximizerOptions& options) {
    MaxResult best{{}, kNegInf};

    if (set.finite()) {
        for (const auto& y : set.candidates) {
            const double v = checked(objective, y);
            if (best.argmax.empty() || better(v, y, best.value, best.argmax)) {
                best.value = v;
                best.argmax = y;
            }
        }
        return best;
    }

    const std::size_t d = set.lower.size();
    if (d == 0 || set.upper.size() != d) throw NumericalError("action box has no dimensions");
    for (std::size_t i = 0; i < d; ++i) {
        if (!(set.lower[i] <= set.upper[i])) throw NumericalError("empty action box");
    }
    if (set.budget && budget_excess(set, set.lower) > 1e-12 * std::max(1.0, std::abs(set.budget->bound))) {
        throw NumericalError("budget excludes every action in the box");
    }

    std::size_t n = std::max<std::size_t>(options.candidates, 2);
    if (d > 2) {
        const double per_dim = std::pow(static_cast<double>(options.max_scan_points), 1.0 / static_cast<double>(d));
        n = std::max<std::size_t>(3, std::min(n, static_cast<std::size_t>(per_dim)));
    }

    std::vector<double> spacing(d);
    for (std::size_t i = 0; i < d; ++i) spacing[i] = (set.upper[i] - set.lower[i]) / static_cast<double>(n - 1);

    std::vector<double> y(d);
    std::vector<std::size_t> idx(d > 1 ? d - 1 : 0, 0);
    double last_spacing = spacing[d - 1];
    while (true) {
        for (std::size_t i = 0; i + 1 < d; ++i) {
            y[i] = set.lower[i] + spacing[i] * static_cast<double>(idx[i]);
            if (idx[i] == n - 1) y[i] = set.upper[i];
        }
        y[d - 1] = set.lower[d - 1];
        const double up = coordinate_upper(set, y, d - 1);
        if (up >= set.lower[d - 1]) {
            const double step = (up - set.lower[d - 1]) / static_cast<double>(n - 1);
            for (std::size_t j = 0; j < n; ++j) {
                y[d - 1] = j == n - 1 ? up : set.lower[d - 1] + step * static_cast<double>(j);
                const double v = checked(objective, y);
                if (best.argmax.empty() || better(v, y, best.value, best.argmax)) {
                    best.value = v;
                    best.argmax = y;
                    last_spacing = step;
                }
                if (step == 0.0) break;
            }
        }
        std::size_t i = idx.size();
        bool done = true;
        while (i > 0) {
            --i;
            if (idx[i] + 1 < n) {
                ++idx[i];
                done = false;
                break;
            }
            idx[i] = 0;
        }
        if (done) break;
    }
    if (best.argmax.empty()) throw NumericalError("no feasible action found by the scan");
    spacing[d - 1] = last_spacing;

    for (std::size_t cycle = 0; cycle < std::max<std::size_t>(options.max_cycles, 1); ++cycle) {
        bool improved = false;
        for (std::size_t j = 0; j < d; ++j) {
            std::vector<double> trial = best.argmax;
            const double hi_bound = coordinate_upper(set, trial, j);
            const double a = std::max(set.lower[j], trial[j] - spacing[j]);
            const double b = std::min(hi_bound, trial[j] + spacing[j]);
            if (!(b > a)) continue;
            auto line = [&](double t) {
                trial[j] = t;
                return checked(objective, trial);
            };
            double value = kNegInf;
            const double t = golden(line, a, b, options.refine_tol, value);
            trial[j] = t;
            if (better(value, trial, best.value, best.argmax) && value > best.value) {
                best.value = value;
                best.argmax = trial;
                improved = true;
            }
        }
        if (!improved || d == 1) break;
    }
    return best;
}

}  // namespace stochdp
