#include "stochdp/value_function.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "stochdp/error.hpp"
#include "stochdp/io.hpp"

namespace stochdp {

ValueFunction::ValueFunction(GridPtr grid, ChainPtr chain, double fill)
    : grid_(std::move(grid)), chain_(std::move(chain)) {
    if (!grid_ || !chain_) throw ConfigError("value function needs a grid and a shock chain");
    values_.assign(grid_->size() * chain_->size(), fill);
}

ValueFunction::ValueFunction(GridPtr grid, ChainPtr chain, std::vector<double> values)
    : grid_(std::move(grid)), chain_(std::move(chain)), values_(std::move(values)) {
    if (!grid_ || !chain_) throw ConfigError("value function needs a grid and a shock chain");
    if (values_.size() != grid_->size() * chain_->size()) {
        throw ConfigError("value table size does not match grid x shock nodes");
    }
}

ValueFunction ValueFunction::tabulate(
    GridPtr grid, ChainPtr chain, const std::function<double(std::span<const double>, std::span<const double>)>& f) {
    ValueFunction v(grid, chain);
    std::vector<double> x(grid->dim());
    for (std::size_t iz = 0; iz < chain->size(); ++iz) {
        for (std::size_t ix = 0; ix < grid->size(); ++ix) {
            grid->point(ix, x);
            v.at(ix, iz) = f(x, chain->node(iz));
        }
    }
    return v;
}

double ValueFunction::evaluate(std::span<const double> x, std::size_t iz) const {
    if (iz >= nz()) throw NumericalError("shock node index " + std::to_string(iz) + " out of range");
    return grid_->interpolate(slice(iz), x);
}

double ValueFunction::evaluate(std::span<const double> x, std::span<const double> z) const {
    return evaluate(x, chain_->index_of(z));
}

bool ValueFunction::compatible(const ValueFunction& other) const {
    if (nx() != other.nx() || nz() != other.nz()) return false;
    if (grid_ != other.grid_ && !(*grid_ == *other.grid_)) return false;
    if (chain_ != other.chain_ && chain_->nodes() != other.chain_->nodes()) return false;
    return true;
}

bool ValueFunction::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double ValueFunction::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double ValueFunction::max_abs_difference(const ValueFunction& other) const {
    if (!compatible(other)) throw ConfigError("value functions live on different grids");
    double m = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) m = std::max(m, std::abs(values_[i] - other.values_[i]));
    return m;
}

ValueFunction& ValueFunction::operator+=(const ValueFunction& other) {
    if (!compatible(other)) throw ConfigError("value functions live on different grids");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

ValueFunction& ValueFunction::operator-=(const ValueFunction& other) {
    if (!compatible(other)) throw ConfigError("value functions live on different grids");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

ValueFunction& ValueFunction::operator*=(double factor) {
    for (double& v : values_) v *= factor;
    return *this;
}

ValueFunction& ValueFunction::add_constant(double c) {
    for (double& v : values_) v += c;
    return *this;
}

void ValueFunction::write_csv(std::ostream& out) const {
    const std::size_t l = grid_->dim();
    const std::size_t k = chain_->dim();
    for (std::size_t i = 0; i < l; ++i) out << 'x' << i + 1 << ',';
    for (std::size_t i = 0; i < k; ++i) out << 'z' << i + 1 << ',';
    out << "value\n";
    std::vector<double> row(l + k + 1);
    for (std::size_t ix = 0; ix < nx(); ++ix) {
        grid_->point(ix, std::span<double>(row).first(l));
        for (std::size_t iz = 0; iz < nz(); ++iz) {
            const auto& z = chain_->node(iz);
            std::copy(z.begin(), z.end(), row.begin() + static_cast<std::ptrdiff_t>(l));
            row.back() = at(ix, iz);
            write_csv_row(out, row);
        }
    }
}

CompactSet CompactSet::box(std::vector<double> lower, std::vector<double> upper, std::string label) {
    if (lower.empty() || lower.size() != upper.size()) throw ConfigError("box corners must have equal dimension");
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (!(lower[i] <= upper[i])) throw ConfigError("box corners must be ordered on every axis");
    }
    CompactSet K;
    K.kind_ = Kind::box;
    K.label_ = std::move(label);
    K.lower_ = std::move(lower);
    K.upper_ = std::move(upper);
    return K;
}

CompactSet CompactSet::points(std::vector<std::vector<double>> points, std::string label) {
    if (points.empty()) throw ConfigError("point set must be nonempty");
    for (const auto& p : points) {
        if (p.size() != points.front().size()) throw ConfigError("points must have equal dimension");
    }
    CompactSet K;
    K.kind_ = Kind::points;
    K.label_ = std::move(label);
    K.points_ = std::move(points);
    return K;
}

CompactSet CompactSet::hull(const StateGrid& grid, std::string label) {
    std::vector<double> lo(grid.dim());
    std::vector<double> hi(grid.dim());
    for (std::size_t i = 0; i < grid.dim(); ++i) {
        lo[i] = grid.lower(i);
        hi[i] = grid.upper(i);
    }
    return box(std::move(lo), std::move(hi), std::move(label));
}

void cover_range(const StateGrid& grid, std::span<const double> lower, std::span<const double> upper,
                 std::span<std::size_t> lo_index, std::span<std::size_t> hi_index) {
    for (std::size_t i = 0; i < grid.dim(); ++i) {
        std::size_t cell;
        double t;
        grid.locate(i, lower[i], cell, t);
        lo_index[i] = t == 1.0 ? cell + 1 : cell;
        grid.locate(i, upper[i], cell, t);
        hi_index[i] = t == 0.0 ? cell : cell + 1;
        if (grid.extent(i) == 1) hi_index[i] = 0;
    }
}

namespace {

template <class F>
void for_each_in_range(const StateGrid& grid, std::span<const std::size_t> lo, std::span<const std::size_t> hi,
                       F&& f) {
    const std::size_t d = grid.dim();
    std::vector<std::size_t> m(lo.begin(), lo.end());
    while (true) {
        f(grid.flat_index(m));
        std::size_t i = d;
        while (i > 0) {
            --i;
            if (m[i] < hi[i]) {
                ++m[i];
                break;
            }
            m[i] = lo[i];
            if (i == 0) return;
        }
        if (d == 0) return;
    }
}

}  // namespace

ResolvedSet resolve(const CompactSet& K, const StateGrid& grid) {
    const std::size_t d = grid.dim();
    ResolvedSet out;
    if (K.kind() == CompactSet::Kind::points) {
        std::set<std::size_t> cover;
        for (const auto& p : K.point_list()) {
            if (p.size() != d) throw ConfigError("compact set " + K.label() + " has the wrong dimension");
            if (!grid.contains(p)) {
                throw NumericalError("compact set " + K.label() + " has a point outside the grid hull");
            }
            auto s = grid.stencil(p);
            if (s.size() == 1) ++out.direct_nodes;
            for (const auto& e : s) cover.insert(e.node);
            out.probes.push_back(std::move(s));
        }
        out.cover.assign(cover.begin(), cover.end());
        return out;
    }

    if (K.lower().size() != d) throw ConfigError("compact set " + K.label() + " has the wrong dimension");
    std::vector<double> lo(d);
    std::vector<double> hi(d);
    std::vector<std::vector<double>> coords(d);
    for (std::size_t i = 0; i < d; ++i) {
        lo[i] = std::max(K.lower()[i], grid.lower(i));
        hi[i] = std::min(K.upper()[i], grid.upper(i));
        const double tol = 1e-12 * std::max({1.0, std::abs(grid.lower(i)), std::abs(grid.upper(i))});
        if (lo[i] > hi[i] + tol) {
            throw NumericalError("compact set " + (K.label().empty() ? std::string("(box)") : K.label()) +
                                 " does not meet the grid hull on axis " + std::to_string(i + 1));
        }
        hi[i] = std::max(hi[i], lo[i]);
        coords[i].push_back(lo[i]);
        for (double a : grid.axis(i)) {
            if (a > lo[i] && a < hi[i]) coords[i].push_back(a);
        }
        if (hi[i] > lo[i]) coords[i].push_back(hi[i]);
    }

    std::vector<std::size_t> idx(d, 0);
    std::vector<double> x(d);
    while (true) {
        for (std::size_t i = 0; i < d; ++i) x[i] = coords[i][idx[i]];
        auto s = grid.stencil(x);
        if (s.size() == 1) ++out.direct_nodes;
        out.probes.push_back(std::move(s));
        std::size_t i = d;
        bool done = true;
        while (i > 0) {
            --i;
            if (idx[i] + 1 < coords[i].size()) {
                ++idx[i];
                done = false;
                break;
            }
            idx[i] = 0;
        }
        if (done) break;
    }

    std::vector<std::size_t> lo_index(d);
    std::vector<std::size_t> hi_index(d);
    cover_range(grid, lo, hi, lo_index, hi_index);
    for_each_in_range(grid, lo_index, hi_index, [&](std::size_t flat) { out.cover.push_back(flat); });
    std::sort(out.cover.begin(), out.cover.end());
    return out;
}

double max_abs_over(const ResolvedSet& K, std::span<const double> values) {
    double m = 0.0;
    for (const auto& probe : K.probes) {
        double v = 0.0;
        for (const auto& e : probe) v += e.weight * values[e.node];
        m = std::max(m, std::abs(v));
    }
    return m;
}

double seminorm(const ValueFunction& f, const ResolvedSet& K, std::size_t iz) {
    if (iz >= f.nz()) throw NumericalError("shock node index out of range");
    return f.chain()->expectation(iz, [&](std::size_t next) { return max_abs_over(K, f.slice(next)); });
}

double seminorm(const ValueFunction& f, const CompactSet& K, std::size_t iz) {
    return seminorm(f, resolve(K, *f.grid()), iz);
}

double seminorm_distance(const ValueFunction& f, const ValueFunction& g, const CompactSet& K, std::size_t iz) {
    if (!f.compatible(g)) throw ConfigError("seminorm_distance: value functions live on different grids");
    return seminorm(f - g, K, iz);
}

SeminormTable seminorm_table(const ValueFunction& f, const std::vector<CompactSet>& Ks) {
    SeminormTable table(Ks.size(), f.nz());
    for (std::size_t r = 0; r < Ks.size(); ++r) {
        const ResolvedSet K = resolve(Ks[r], *f.grid());
        std::vector<double> slice_max(f.nz());
        for (std::size_t iz = 0; iz < f.nz(); ++iz) slice_max[iz] = max_abs_over(K, f.slice(iz));
        for (std::size_t iz = 0; iz < f.nz(); ++iz) {
            table(r, iz) = f.chain()->expectation(iz, [&](std::size_t next) { return slice_max[next]; });
        }
    }
    return table;
}

}  // namespace stochdp
