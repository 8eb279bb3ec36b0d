#pragma once

#include <functional>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "stochdp/seminorm_table.hpp"
#include "stochdp/shock_chain.hpp"
#include "stochdp/state_grid.hpp"

namespace stochdp {

using GridPtr = std::shared_ptr<const StateGrid>;
using ChainPtr = std::shared_ptr<const ShockChain>;

/// f(x, z) tabulated on grid nodes x shock nodes, multilinear in x.
/// Storage is shock-major: values[iz * nx + ix].
class ValueFunction {
public:
    ValueFunction() = default;
    ValueFunction(GridPtr grid, ChainPtr chain, double fill = 0.0);
    ValueFunction(GridPtr grid, ChainPtr chain, std::vector<double> values);

    static ValueFunction tabulate(GridPtr grid, ChainPtr chain,
                                  const std::function<double(std::span<const double>, std::span<const double>)>& f);

    const GridPtr& grid() const noexcept { return grid_; }
    const ChainPtr& chain() const noexcept { return chain_; }
    std::size_t nx() const noexcept { return grid_ ? grid_->size() : 0; }
    std::size_t nz() const noexcept { return chain_ ? chain_->size() : 0; }

    double& at(std::size_t ix, std::size_t iz) { return values_[iz * nx() + ix]; }
    double at(std::size_t ix, std::size_t iz) const { return values_[iz * nx() + ix]; }
    std::span<double> slice(std::size_t iz) { return std::span<double>(values_).subspan(iz * nx(), nx()); }
    std::span<const double> slice(std::size_t iz) const {
        return std::span<const double>(values_).subspan(iz * nx(), nx());
    }
    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    /// Interpolated value at x in the hull, at stored shock node iz.
    double evaluate(std::span<const double> x, std::size_t iz) const;
    /// Same, with the shock given by value; it must be a stored node.
    double evaluate(std::span<const double> x, std::span<const double> z) const;

    bool compatible(const ValueFunction& other) const;
    bool all_finite() const;
    double max_abs() const;
    double max_abs_difference(const ValueFunction& other) const;

    ValueFunction& operator+=(const ValueFunction& other);
    ValueFunction& operator-=(const ValueFunction& other);
    ValueFunction& operator*=(double factor);
    ValueFunction& add_constant(double c);
    friend ValueFunction operator+(ValueFunction a, const ValueFunction& b) { return a += b; }
    friend ValueFunction operator-(ValueFunction a, const ValueFunction& b) { return a -= b; }
    friend ValueFunction operator*(double c, ValueFunction a) { return a *= c; }

    /// Columns x1..xl, z1..zk, value; rows by grid index, then shock node.
    void write_csv(std::ostream& out) const;

private:
    GridPtr grid_;
    ChainPtr chain_;
    std::vector<double> values_;
};

/// A compact subset of the state space: an axis-aligned box or a finite list of points.
class CompactSet {
public:
    enum class Kind { box, points };

    static CompactSet box(std::vector<double> lower, std::vector<double> upper, std::string label = {});
    static CompactSet points(std::vector<std::vector<double>> points, std::string label = {});
    static CompactSet hull(const StateGrid& grid, std::string label = "X");

    Kind kind() const noexcept { return kind_; }
    const std::string& label() const noexcept { return label_; }
    const std::vector<double>& lower() const noexcept { return lower_; }
    const std::vector<double>& upper() const noexcept { return upper_; }
    const std::vector<std::vector<double>>& point_list() const noexcept { return points_; }

private:
    Kind kind_ = Kind::box;
    std::string label_;
    std::vector<double> lower_;
    std::vector<double> upper_;
    std::vector<std::vector<double>> points_;
};

/// A compact set resolved against a grid: the probe points whose interpolated values
/// realise max over K of |f| for multilinear f, and the nodes of every cell meeting K.
struct ResolvedSet {
    std::vector<std::vector<StencilEntry>> probes;
    std::vector<std::size_t> cover;
    std::size_t direct_nodes = 0;
};

ResolvedSet resolve(const CompactSet& K, const StateGrid& grid);

/// Index range per axis of the grid nodes of every cell meeting [lower, upper].
void cover_range(const StateGrid& grid, std::span<const double> lower, std::span<const double> upper,
                 std::span<std::size_t> lo_index, std::span<std::size_t> hi_index);

/// max over the resolved set of |interpolated values|.
double max_abs_over(const ResolvedSet& K, std::span<const double> values);

/// p_{K,z}(f) = sum_{z'} P(z, z') max_{x in K} |f(x, z')|.
double seminorm(const ValueFunction& f, const CompactSet& K, std::size_t iz);
double seminorm(const ValueFunction& f, const ResolvedSet& K, std::size_t iz);
double seminorm_distance(const ValueFunction& f, const ValueFunction& g, const CompactSet& K, std::size_t iz);

/// Rows: compact sets, columns: shock nodes.
SeminormTable seminorm_table(const ValueFunction& f, const std::vector<CompactSet>& Ks);

}  // namespace stochdp
