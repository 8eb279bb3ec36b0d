#include "stochdp/state_grid.hpp"

#include <algorithm>
#include <cmath>

#include "stochdp/error.hpp"
#include "stochdp/shock_kernels.hpp"

namespace stochdp {

StateGrid::StateGrid(std::vector<std::vector<double>> axes) : axes_(std::move(axes)) {
    if (axes_.empty()) throw ConfigError("state grid needs at least one axis");
    if (axes_.size() > max_dim) throw ConfigError("state grid supports at most 8 axes");
    size_ = 1;
    for (std::size_t i = 0; i < axes_.size(); ++i) {
        const auto& a = axes_[i];
        if (a.empty()) throw ConfigError("state grid axis " + std::to_string(i + 1) + " is empty");
        for (std::size_t j = 0; j < a.size(); ++j) {
            if (!std::isfinite(a[j])) throw ConfigError("state grid axis " + std::to_string(i + 1) + " is not finite");
            if (j > 0 && !(a[j] > a[j - 1])) {
                throw ConfigError("state grid axis " + std::to_string(i + 1) + " must be strictly increasing");
            }
        }
        size_ *= a.size();
    }
    strides_.assign(axes_.size(), 1);
    for (std::size_t i = axes_.size() - 1; i > 0; --i) strides_[i - 1] = strides_[i] * axes_[i].size();
}

std::vector<double> StateGrid::uniform_axis(double lo, double hi, std::size_t n) {
    if (n == 0) throw ConfigError("axis needs at least one node");
    if (n == 1) return {lo};
    if (!(hi > lo)) throw ConfigError("axis upper bound must exceed the lower bound");
    std::vector<double> a(n);
    for (std::size_t j = 0; j < n; ++j) {
        a[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(n - 1);
    }
    a.back() = hi;
    return a;
}

std::vector<double> StateGrid::log_axis(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0)) throw ConfigError("log-spaced axis needs a positive lower bound");
    if (n == 1) return {lo};
    auto a = uniform_axis(std::log(lo), std::log(hi), n);
    for (double& v : a) v = std::exp(v);
    a.front() = lo;
    a.back() = hi;
    return a;
}

std::vector<double> StateGrid::point(std::size_t flat) const {
    std::vector<double> x(dim());
    point(flat, x);
    return x;
}

void StateGrid::point(std::size_t flat, std::span<double> out) const {
    for (std::size_t i = 0; i < dim(); ++i) {
        out[i] = axes_[i][(flat / strides_[i]) % axes_[i].size()];
    }
}

std::vector<std::size_t> StateGrid::multi_index(std::size_t flat) const {
    std::vector<std::size_t> m(dim());
    for (std::size_t i = 0; i < dim(); ++i) m[i] = (flat / strides_[i]) % axes_[i].size();
    return m;
}

std::size_t StateGrid::flat_index(std::span<const std::size_t> multi) const {
    std::size_t flat = 0;
    for (std::size_t i = 0; i < dim(); ++i) flat += multi[i] * strides_[i];
    return flat;
}

double StateGrid::tolerance(std::size_t axis) const {
    const auto& a = axes_[axis];
    return 1e-12 * std::max({1.0, std::abs(a.front()), std::abs(a.back())});
}

bool StateGrid::contains(std::span<const double> x) const {
    if (x.size() != dim()) return false;
    for (std::size_t i = 0; i < dim(); ++i) {
        const double tol = tolerance(i);
        if (!(x[i] >= lower(i) - tol && x[i] <= upper(i) + tol)) return false;
    }
    return true;
}

std::vector<double> StateGrid::clamp_to_hull(std::span<const double> x) const {
    if (!contains(x)) throw NumericalError("state " + format_shock(x) + " lies outside the grid hull");
    std::vector<double> out(x.begin(), x.end());
    for (std::size_t i = 0; i < dim(); ++i) out[i] = std::clamp(out[i], lower(i), upper(i));
    return out;
}

void StateGrid::locate(std::size_t axis, double v, std::size_t& cell, double& t) const {
    const auto& a = axes_[axis];
    const double tol = tolerance(axis);
    if (!(v >= a.front() - tol && v <= a.back() + tol)) {
        throw NumericalError("coordinate " + std::to_string(v) + " on axis " + std::to_string(axis + 1) +
                             " lies outside the grid hull");
    }
    if (a.size() == 1) {
        cell = 0;
        t = 0.0;
        return;
    }
    v = std::clamp(v, a.front(), a.back());
    auto it = std::upper_bound(a.begin(), a.end(), v);
    std::size_t j = it == a.begin() ? 0 : static_cast<std::size_t>(it - a.begin()) - 1;
    if (j >= a.size() - 1) {
        cell = a.size() - 2;
        t = 1.0;
        return;
    }
    cell = j;
    t = v == a[j] ? 0.0 : (v - a[j]) / (a[j + 1] - a[j]);
}

std::vector<StencilEntry> StateGrid::stencil(std::span<const double> x) const {
    if (x.size() != dim()) throw NumericalError("state has the wrong dimension");
    std::array<std::size_t, max_dim> cell{};
    std::array<double, max_dim> t{};
    for (std::size_t i = 0; i < dim(); ++i) locate(i, x[i], cell[i], t[i]);
    std::vector<StencilEntry> out;
    out.reserve(std::size_t{1} << dim());
    for (std::size_t corner = 0; corner < (std::size_t{1} << dim()); ++corner) {
        double w = 1.0;
        std::size_t flat = 0;
        for (std::size_t i = 0; i < dim(); ++i) {
            const bool up = (corner >> i) & 1U;
            const double wi = up ? t[i] : 1.0 - t[i];
            if (wi == 0.0) {
                w = 0.0;
                break;
            }
            w *= wi;
            flat += (cell[i] + (up ? 1 : 0)) * strides_[i];
        }
        if (w != 0.0) out.push_back({flat, w});
    }
    return out;
}

double StateGrid::interpolate(std::span<const double> values, std::span<const double> x) const {
    if (x.size() != dim()) throw NumericalError("state has the wrong dimension");
    std::array<std::size_t, max_dim> cell{};
    std::array<double, max_dim> t{};
    for (std::size_t i = 0; i < dim(); ++i) locate(i, x[i], cell[i], t[i]);
    double total = 0.0;
    for (std::size_t corner = 0; corner < (std::size_t{1} << dim()); ++corner) {
        double w = 1.0;
        std::size_t flat = 0;
        for (std::size_t i = 0; i < dim(); ++i) {
            const bool up = (corner >> i) & 1U;
            const double wi = up ? t[i] : 1.0 - t[i];
            if (wi == 0.0) {
                w = 0.0;
                break;
            }
            w *= wi;
            flat += (cell[i] + (up ? 1 : 0)) * strides_[i];
        }
        if (w != 0.0) total += w * values[flat];
    }
    return total;
}

StateGrid StateGrid::refined(std::size_t factor) const {
    if (factor == 0) throw ConfigError("refinement factor must be positive");
    std::vector<std::vector<double>> axes;
    for (const auto& a : axes_) {
        std::vector<double> r;
        for (std::size_t j = 0; j + 1 < a.size(); ++j) {
            for (std::size_t s = 0; s < factor; ++s) {
                r.push_back(a[j] + (a[j + 1] - a[j]) * static_cast<double>(s) / static_cast<double>(factor));
            }
        }
        r.push_back(a.back());
        axes.push_back(std::move(r));
    }
    return StateGrid(std::move(axes));
}

}  // namespace stochdp
