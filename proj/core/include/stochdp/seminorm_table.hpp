#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace stochdp {

/// Nonnegative values indexed by a finite index set laid out as
/// rows x cols (for the Bellman family: compact set x shock node).
/// This is the object a contraction operator parameter acts on.
class SeminormTable {
public:
    SeminormTable() = default;
    SeminormTable(std::size_t rows, std::size_t cols, double fill = 0.0);
    SeminormTable(std::size_t rows, std::size_t cols, std::vector<double> values);

    static SeminormTable scalar(double value) { return SeminormTable(1, 1, value); }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    double& operator()(std::size_t row, std::size_t col) { return values_[row * cols_ + col]; }
    double operator()(std::size_t row, std::size_t col) const { return values_[row * cols_ + col]; }
    double& operator[](std::size_t flat) { return values_[flat]; }
    double operator[](std::size_t flat) const { return values_[flat]; }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    bool same_shape(const SeminormTable& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    double max() const;
    double min() const;
    bool all_finite() const;
    bool all_nonnegative() const;

    SeminormTable& operator+=(const SeminormTable& other);
    SeminormTable& operator*=(double factor);

    friend SeminormTable operator+(SeminormTable lhs, const SeminormTable& rhs) { return lhs += rhs; }
    friend SeminormTable operator*(double factor, SeminormTable table) { return table *= factor; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

/// Pointwise lhs <= rhs + rel_tol * max(|lhs|, |rhs|) + abs_tol.
bool dominated_by(const SeminormTable& lhs, const SeminormTable& rhs,
                  double rel_tol = 0.0, double abs_tol = 0.0);

/// Largest value of lhs - rhs (positive means lhs exceeds rhs somewhere).
double max_excess(const SeminormTable& lhs, const SeminormTable& rhs);

/// Human-readable name of a flat index: "(row r, col c)" unless a labeler is given.
using IndexLabeler = std::function<std::string(std::size_t row, std::size_t col)>;
std::string describe_index(const SeminormTable& table, std::size_t flat,
                           const IndexLabeler& labeler = {});

}  // namespace stochdp
