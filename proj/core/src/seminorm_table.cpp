#include "stochdp/seminorm_table.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stochdp {

SeminormTable::SeminormTable(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

SeminormTable::SeminormTable(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_) {
        throw std::invalid_argument("SeminormTable: value count does not match shape");
    }
}

double SeminormTable::max() const {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : values_) m = std::max(m, v);
    return m;
}

double SeminormTable::min() const {
    double m = std::numeric_limits<double>::infinity();
    for (double v : values_) m = std::min(m, v);
    return m;
}

bool SeminormTable::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

bool SeminormTable::all_nonnegative() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v >= 0.0; });
}

SeminormTable& SeminormTable::operator+=(const SeminormTable& other) {
    if (!same_shape(other)) throw std::invalid_argument("SeminormTable: shape mismatch in +=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

SeminormTable& SeminormTable::operator*=(double factor) {
    for (double& v : values_) v *= factor;
    return *this;
}

bool dominated_by(const SeminormTable& lhs, const SeminormTable& rhs, double rel_tol, double abs_tol) {
    if (!lhs.same_shape(rhs)) throw std::invalid_argument("dominated_by: shape mismatch");
    for (std::size_t i = 0; i < lhs.size(); ++i) {
        const double slack = rel_tol * std::max(std::abs(lhs[i]), std::abs(rhs[i])) + abs_tol;
        if (!(lhs[i] <= rhs[i] + slack)) return false;
    }
    return true;
}

double max_excess(const SeminormTable& lhs, const SeminormTable& rhs) {
    if (!lhs.same_shape(rhs)) throw std::invalid_argument("max_excess: shape mismatch");
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lhs.size(); ++i) worst = std::max(worst, lhs[i] - rhs[i]);
    return worst;
}

std::string describe_index(const SeminormTable& table, std::size_t flat, const IndexLabeler& labeler) {
    const std::size_t cols = std::max<std::size_t>(table.cols(), 1);
    const std::size_t row = flat / cols;
    const std::size_t col = flat % cols;
    if (labeler) return labeler(row, col);
    return "(row " + std::to_string(row) + ", col " + std::to_string(col) + ")";
}

}  // namespace stochdp
