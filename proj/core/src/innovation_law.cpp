#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <boost/math/distributions/normal.hpp>

#include "stochdp/error.hpp"
#include "stochdp/shock_kernels.hpp"

namespace stochdp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double normal_cdf(double x) { return boost::math::cdf(boost::math::normal_distribution<double>(), x); }

double normal_quantile(double p) {
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

}  // namespace

InnovationLaw InnovationLaw::point_mass(Shock value) {
    require(!value.empty(), "point mass innovation needs at least one coordinate");
    for (double v : value) require(std::isfinite(v), "point mass innovation must be finite");
    InnovationLaw law;
    law.kind_ = Kind::point_mass;
    law.dim_ = value.size();
    law.atoms_.push_back({std::move(value), 1.0});
    return law;
}

InnovationLaw InnovationLaw::atoms(std::vector<WeightedShock> atoms) {
    require(!atoms.empty(), "atom innovation needs at least one atom");
    const std::size_t dim = atoms.front().value.size();
    require(dim > 0, "atoms need at least one coordinate");
    double total = 0.0;
    for (const auto& a : atoms) {
        require(a.value.size() == dim, "all atoms must have the same dimension");
        require(a.weight >= 0.0 && std::isfinite(a.weight), "atom weights must be finite and nonnegative");
        for (double v : a.value) require(std::isfinite(v), "atom values must be finite");
        total += a.weight;
    }
    require(std::abs(total - 1.0) <= 1e-12, "atom weights must sum to 1");
    InnovationLaw law;
    law.kind_ = Kind::atoms;
    law.dim_ = dim;
    law.atoms_ = std::move(atoms);
    return law;
}

InnovationLaw InnovationLaw::rectified_lognormal(std::vector<double> mu, std::vector<double> s) {
    require(!mu.empty() && mu.size() == s.size(), "rectified lognormal needs matching mu and s vectors");
    for (std::size_t i = 0; i < mu.size(); ++i) {
        require(std::isfinite(mu[i]), "rectified lognormal mu must be finite");
        require(std::isfinite(s[i]) && s[i] >= 0.0, "rectified lognormal s must be finite and nonnegative");
    }
    InnovationLaw law;
    law.kind_ = Kind::rectified_lognormal;
    law.dim_ = mu.size();
    law.a_ = std::move(mu);
    law.b_ = std::move(s);
    return law;
}

InnovationLaw InnovationLaw::mean_shifted_lognormal(double s, double rho) {
    require(rho > -1.0, "mean-shifted lognormal needs rho > -1");
    return rectified_lognormal({-s * s / (2.0 * (1.0 + rho))}, {s});
}

InnovationLaw InnovationLaw::pareto(std::vector<double> shape) {
    require(!shape.empty(), "pareto innovation needs at least one coordinate");
    for (double a : shape) require(std::isfinite(a) && a > 0.0, "pareto shape must be positive");
    InnovationLaw law;
    law.kind_ = Kind::pareto;
    law.dim_ = shape.size();
    law.a_ = std::move(shape);
    return law;
}

std::string InnovationLaw::kind_name() const {
    switch (kind_) {
        case Kind::point_mass: return "point_mass";
        case Kind::atoms: return "atoms";
        case Kind::rectified_lognormal: return "rectified_lognormal";
        case Kind::pareto: return "pareto";
    }
    return "unknown";
}

std::optional<double> InnovationLaw::moment(std::size_t i, double q) const {
    if (i >= dim_) throw ConfigError("innovation coordinate out of range");
    switch (kind_) {
        case Kind::point_mass:
        case Kind::atoms: {
            double total = 0.0;
            for (const auto& a : atoms_) {
                if (a.weight == 0.0) continue;
                const double v = a.value[i];
                if (v == 0.0 && q < 0.0) return kInf;
                const double term = std::pow(v, q);
                if (std::isnan(term)) return std::nullopt;
                total += a.weight * term;
            }
            return total;
        }
        case Kind::rectified_lognormal: {
            const double mu = a_[i];
            const double s = b_[i];
            if (s == 0.0) return std::exp(q * std::max(mu, 0.0));
            return normal_cdf(-mu / s) + std::exp(q * mu + 0.5 * q * q * s * s) * normal_cdf(mu / s + q * s);
        }
        case Kind::pareto: {
            const double a = a_[i];
            if (q >= a) return kInf;
            return a / (a - q);
        }
    }
    return std::nullopt;
}

Shock InnovationLaw::mean() const {
    Shock m(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
        const auto value = moment(i, 1.0);
        m[i] = value ? *value : kInf;
    }
    return m;
}

double InnovationLaw::lower_support(std::size_t i) const {
    switch (kind_) {
        case Kind::point_mass:
        case Kind::atoms: {
            double low = kInf;
            for (const auto& a : atoms_) {
                if (a.weight > 0.0) low = std::min(low, a.value[i]);
            }
            return low;
        }
        case Kind::rectified_lognormal:
            return b_[i] == 0.0 ? std::exp(std::max(a_[i], 0.0)) : 1.0;
        case Kind::pareto:
            return 1.0;
    }
    return 0.0;
}

double InnovationLaw::quantile(std::size_t i, double u) const {
    switch (kind_) {
        case Kind::rectified_lognormal: {
            const double mu = a_[i];
            const double s = b_[i];
            if (s == 0.0) return std::exp(std::max(mu, 0.0));
            if (u <= normal_cdf(-mu / s)) return 1.0;
            return std::exp(mu + s * normal_quantile(u));
        }
        case Kind::pareto:
            return std::pow(1.0 - u, -1.0 / a_[i]);
        default:
            throw NumericalError("quantile is only defined for continuous innovation laws");
    }
}

Shock InnovationLaw::sample(Rng& rng) const {
    switch (kind_) {
        case Kind::point_mass:
            return atoms_.front().value;
        case Kind::atoms: {
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            const double u = unit(rng);
            double acc = 0.0;
            for (const auto& a : atoms_) {
                acc += a.weight;
                if (u < acc) return a.value;
            }
            for (auto it = atoms_.rbegin(); it != atoms_.rend(); ++it) {
                if (it->weight > 0.0) return it->value;
            }
            return atoms_.back().value;
        }
        case Kind::rectified_lognormal: {
            std::normal_distribution<double> normal(0.0, 1.0);
            Shock w(dim_);
            for (std::size_t i = 0; i < dim_; ++i) w[i] = std::exp(std::max(a_[i] + b_[i] * normal(rng), 0.0));
            return w;
        }
        case Kind::pareto: {
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            Shock w(dim_);
            for (std::size_t i = 0; i < dim_; ++i) w[i] = std::pow(1.0 - unit(rng), -1.0 / a_[i]);
            return w;
        }
    }
    return {};
}

std::vector<WeightedShock> InnovationLaw::quadrature(const QuadratureRule& rule) const {
    if (kind_ == Kind::point_mass || kind_ == Kind::atoms) {
        std::vector<WeightedShock> nodes;
        for (const auto& a : atoms_) {
            if (a.weight > 0.0) nodes.push_back(a);
        }
        return nodes;
    }
    if (rule.nodes == 0) throw ConfigError("quadrature needs at least one node");
    const std::size_t n = rule.nodes;
    Rng rng(rule.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<std::vector<double>> coords(dim_, std::vector<double>(n));
    for (std::size_t i = 0; i < dim_; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double offset = rule.scheme == QuadratureScheme::stratified ? unit(rng) : 0.5;
            coords[i][j] = quantile(i, (static_cast<double>(j) + offset) / static_cast<double>(n));
        }
        if (i > 0) std::shuffle(coords[i].begin(), coords[i].end(), rng);
    }

    std::vector<WeightedShock> nodes;
    nodes.reserve(n);
    const double weight = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
        Shock w(dim_);
        for (std::size_t i = 0; i < dim_; ++i) w[i] = coords[i][j];
        if (dim_ == 1 && !nodes.empty() && nodes.back().value == w) {
            nodes.back().weight += weight;
        } else {
            nodes.push_back({std::move(w), weight});
        }
    }
    return nodes;
}

MomentEstimate monte_carlo_moment(const InnovationLaw& w, std::size_t i, double q, std::size_t draws,
                                  std::uint64_t seed) {
    if (draws < 2) throw ConfigError("monte-carlo moment needs at least two draws");
    Rng rng(seed);
    double sum = 0.0;
    double sum_sq = 0.0;
    double largest = 0.0;
    for (std::size_t d = 0; d < draws; ++d) {
        const double x = std::pow(w.sample(rng)[i], q);
        if (!std::isfinite(x)) throw DivergenceError("monte-carlo moment: non-finite draw");
        sum += x;
        sum_sq += x * x;
        largest = std::max(largest, std::abs(x));
    }
    const double n = static_cast<double>(draws);
    const double mean = sum / n;
    const double var = std::max(sum_sq / n - mean * mean, 0.0) * n / (n - 1.0);
    if (!std::isfinite(sum_sq) || (sum > 0.0 && largest > 0.01 * sum)) {
        throw DivergenceError("monte-carlo moment of order " + std::to_string(q) +
                              " is dominated by a single draw; the moment is likely infinite");
    }
    return {mean, std::sqrt(var / n), "monte_carlo"};
}

MomentEstimate moment_theta(double sigma, double rho, const InnovationLaw& w, const MomentOptions& options) {
    if (!(sigma >= 0.0 && sigma < 1.0)) throw ConfigError("moment_theta: sigma must lie in [0, 1)");
    if (!(rho >= 0.0 && rho < 1.0)) throw ConfigError("moment_theta: rho must lie in [0, 1)");
    const double q = (1.0 - sigma) / (1.0 - rho);
    if (options.method == MomentOptions::Method::automatic) {
        if (const auto exact = w.moment(0, q)) {
            if (!std::isfinite(*exact)) {
                throw DivergenceError("moment_theta: E[w^" + std::to_string(q) + "] is infinite");
            }
            return {*exact, 0.0, "closed_form"};
        }
    }
    return monte_carlo_moment(w, 0, q, options.draws, options.seed);
}

}  // namespace stochdp
