#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace stochdp {

struct StencilEntry {
    std::size_t node = 0;
    double weight = 0.0;
};

/// Rectangular product grid over the endogenous state. Flat indices are
/// lexicographic with the first axis slowest.
class StateGrid {
public:
    static constexpr std::size_t max_dim = 8;

    explicit StateGrid(std::vector<std::vector<double>> axes);

    static std::vector<double> uniform_axis(double lo, double hi, std::size_t n);
    static std::vector<double> log_axis(double lo, double hi, std::size_t n);

    std::size_t dim() const noexcept { return axes_.size(); }
    std::size_t size() const noexcept { return size_; }
    const std::vector<double>& axis(std::size_t i) const { return axes_[i]; }
    const std::vector<std::vector<double>>& axes() const noexcept { return axes_; }
    std::size_t extent(std::size_t i) const { return axes_[i].size(); }
    double lower(std::size_t i) const { return axes_[i].front(); }
    double upper(std::size_t i) const { return axes_[i].back(); }

    std::vector<double> point(std::size_t flat) const;
    void point(std::size_t flat, std::span<double> out) const;
    std::vector<std::size_t> multi_index(std::size_t flat) const;
    std::size_t flat_index(std::span<const std::size_t> multi) const;

    /// Inside the hull up to a relative tolerance of 1e-12 per axis.
    bool contains(std::span<const double> x) const;
    /// Clamp coordinates that are within the hull tolerance; throws NumericalError when outside.
    std::vector<double> clamp_to_hull(std::span<const double> x) const;

    /// Multilinear stencil: at most 2^dim entries, zero weights dropped, exact at nodes.
    std::vector<StencilEntry> stencil(std::span<const double> x) const;
    /// Multilinear interpolation of node values (size() entries) at x.
    double interpolate(std::span<const double> values, std::span<const double> x) const;

    /// Cell index j (a_j <= v <= a_{j+1}) and local coordinate t in [0, 1].
    void locate(std::size_t axis, double v, std::size_t& cell, double& t) const;

    /// Grid with every cell split into `factor` equal pieces per axis.
    StateGrid refined(std::size_t factor) const;

    bool operator==(const StateGrid& other) const { return axes_ == other.axes_; }

private:
    double tolerance(std::size_t axis) const;

    std::vector<std::vector<double>> axes_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
};

}  // namespace stochdp
