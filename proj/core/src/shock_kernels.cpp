#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "stochdp/error.hpp"
#include "stochdp/shock_kernels.hpp"

namespace stochdp {

namespace {

double integrate(const std::function<double(double)>& f, double a, double b) {
    if (b <= a) return 0.0;
    double error = 0.0;
    const double value =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-12, &error);
    if (!std::isfinite(value) || error > 1e-10 * std::max(1.0, std::abs(value))) {
        throw NumericalError("adaptive quadrature on [" + std::to_string(a) + ", " + std::to_string(b) +
                             "] did not converge (error estimate " + std::to_string(error) + ")");
    }
    return value;
}

}  // namespace

std::string format_shock(std::span<const double> z) {
    std::string out = "(";
    for (std::size_t i = 0; i < z.size(); ++i) {
        char buf[32];
        auto res = std::to_chars(buf, buf + sizeof buf, z[i]);
        if (i > 0) out += ", ";
        out.append(buf, res.ptr);
    }
    return out + ")";
}

double power_iteration_norm(const Eigen::MatrixXd& B, std::size_t steps, double tol) {
    if (B.size() == 0 || B.norm() == 0.0) return 0.0;
    const Eigen::MatrixXd G = B.transpose() * B;
    Eigen::VectorXd v = Eigen::VectorXd::Ones(B.cols()).normalized();
    double lambda = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
        Eigen::VectorXd next = G * v;
        const double n = next.norm();
        if (n == 0.0) return 0.0;
        next /= n;
        const double estimate = (B * next).norm();
        v = std::move(next);
        if (std::abs(estimate - lambda) <= tol * estimate) return estimate;
        lambda = estimate;
    }
    return lambda;
}

TransitionKernel TransitionKernel::linear_ar(Eigen::MatrixXd B, InnovationLaw w, QuadratureRule rule) {
    if (B.rows() != B.cols() || static_cast<std::size_t>(B.rows()) != w.dim()) {
        throw ConfigError("linear_ar: B must be k x k with k the innovation dimension");
    }
    TransitionKernel Q;
    Q.kind_ = Kind::linear_ar;
    Q.dim_ = w.dim();
    Q.B_ = std::move(B);
    Q.rule_ = rule;
    Q.nodes_ = w.quadrature(rule);
    Q.w_ = std::move(w);
    return Q;
}

TransitionKernel TransitionKernel::log_log_ar(std::vector<double> rho, InnovationLaw w, QuadratureRule rule) {
    if (rho.size() != w.dim()) throw ConfigError("log_log_ar: rho must have one entry per innovation coordinate");
    TransitionKernel Q;
    Q.kind_ = Kind::log_log_ar;
    Q.dim_ = w.dim();
    Q.rho_ = std::move(rho);
    Q.rule_ = rule;
    Q.nodes_ = w.quadrature(rule);
    Q.w_ = std::move(w);
    return Q;
}

TransitionKernel TransitionKernel::degenerate(std::size_t dim) {
    if (dim == 0) throw ConfigError("degenerate kernel needs a positive dimension");
    TransitionKernel Q;
    Q.kind_ = Kind::degenerate;
    Q.dim_ = dim;
    return Q;
}

TransitionKernel TransitionKernel::piecewise_jump() {
    TransitionKernel Q;
    Q.kind_ = Kind::piecewise_jump;
    Q.dim_ = 1;
    return Q;
}

std::string TransitionKernel::kind_name() const {
    switch (kind_) {
        case Kind::linear_ar: return "linear_ar";
        case Kind::log_log_ar: return "log_log_ar";
        case Kind::degenerate: return "degenerate";
        case Kind::piecewise_jump: return "piecewise_jump";
    }
    return "unknown";
}

const InnovationLaw& TransitionKernel::innovation() const {
    if (!w_) throw ConfigError(kind_name() + " kernel has no innovation law");
    return *w_;
}

std::vector<WeightedShock> TransitionKernel::successors(std::span<const double> z) const {
    if (z.size() != dim_) throw ConfigError("shock " + format_shock(z) + " has the wrong dimension");
    std::vector<WeightedShock> out;
    switch (kind_) {
        case Kind::degenerate:
            out.push_back({Shock(z.begin(), z.end()), 1.0});
            break;
        case Kind::linear_ar: {
            Eigen::VectorXd zv = Eigen::Map<const Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
            const Eigen::VectorXd drift = B_ * zv;
            out.reserve(nodes_.size());
            for (const auto& node : nodes_) {
                Shock next(dim_);
                for (std::size_t i = 0; i < dim_; ++i) next[i] = drift[static_cast<Eigen::Index>(i)] + node.value[i];
                out.push_back({std::move(next), node.weight});
            }
            break;
        }
        case Kind::log_log_ar: {
            Shock base(dim_);
            for (std::size_t i = 0; i < dim_; ++i) {
                if (!(z[i] > 0.0)) throw NumericalError("log_log_ar needs positive shocks, got " + format_shock(z));
                base[i] = rho_[i] == 0.0 ? 1.0 : std::pow(z[i], rho_[i]);
            }
            out.reserve(nodes_.size());
            for (const auto& node : nodes_) {
                Shock next(dim_);
                for (std::size_t i = 0; i < dim_; ++i) next[i] = base[i] * node.value[i];
                out.push_back({std::move(next), node.weight});
            }
            break;
        }
        case Kind::piecewise_jump:
            if (z[0] == 0.0) {
                out.push_back({Shock{0.0}, 1.0});
                break;
            }
            throw NumericalError("piecewise_jump kernel has no finite successor set at z = " + format_shock(z));
    }
    return out;
}

double TransitionKernel::conditional_expectation(const std::function<double(std::span<const double>)>& f,
                                                 std::span<const double> z) const {
    if (kind_ == Kind::piecewise_jump) {
        if (z.size() != 1) throw ConfigError("piecewise_jump kernel is one-dimensional");
        auto scalar = [&f](double x) {
            const double value = f(std::span<const double>(&x, 1));
            if (!std::isfinite(value)) {
                throw NumericalError("non-finite integrand at z' = " + format_shock(std::span<const double>(&x, 1)));
            }
            return value;
        };
        const double zz = z[0];
        if (zz < 0.0) throw ConfigError("piecewise_jump kernel lives on [0, inf)");
        if (zz == 0.0) return scalar(0.0);
        if (zz < 1.0) {
            const double upper = 1.0 / zz;
            double inner = integrate(scalar, 0.0, std::min(1.0, upper));
            if (upper > 1.0) inner += integrate(scalar, 1.0, upper);
            return scalar(0.0) * (1.0 - zz) + zz * zz * inner;
        }
        return integrate(scalar, 0.0, 1.0);
    }
    double total = 0.0;
    for (const auto& s : successors(z)) {
        const double value = f(s.value);
        if (!std::isfinite(value)) {
            throw NumericalError("non-finite integrand at successor " + format_shock(s.value) + " of " +
                                 format_shock(z));
        }
        total += s.weight * value;
    }
    return total;
}

Shock TransitionKernel::conditional_mean(std::span<const double> z) const {
    if (z.size() != dim_) throw ConfigError("shock " + format_shock(z) + " has the wrong dimension");
    switch (kind_) {
        case Kind::degenerate:
            return Shock(z.begin(), z.end());
        case Kind::linear_ar: {
            const Shock m = w_->mean();
            Shock out(dim_);
            for (std::size_t i = 0; i < dim_; ++i) {
                double acc = m[i];
                for (std::size_t j = 0; j < dim_; ++j) {
                    acc += B_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * z[j];
                }
                out[i] = acc;
            }
            return out;
        }
        case Kind::log_log_ar: {
            const Shock m = w_->mean();
            Shock out(dim_);
            for (std::size_t i = 0; i < dim_; ++i) out[i] = std::pow(z[i], rho_[i]) * m[i];
            return out;
        }
        case Kind::piecewise_jump:
            return Shock{z[0] == 0.0 ? 0.0 : 0.5};
    }
    return {};
}

Shock TransitionKernel::sample(std::span<const double> z, Rng& rng) const {
    switch (kind_) {
        case Kind::degenerate:
            return Shock(z.begin(), z.end());
        case Kind::linear_ar: {
            Shock w = w_->sample(rng);
            for (std::size_t i = 0; i < dim_; ++i) {
                for (std::size_t j = 0; j < dim_; ++j) {
                    w[i] += B_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * z[j];
                }
            }
            return w;
        }
        case Kind::log_log_ar: {
            Shock w = w_->sample(rng);
            for (std::size_t i = 0; i < dim_; ++i) w[i] *= std::pow(z[i], rho_[i]);
            return w;
        }
        case Kind::piecewise_jump: {
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            const double zz = z[0];
            if (zz == 0.0) return Shock{0.0};
            if (zz < 1.0) {
                if (unit(rng) < 1.0 - zz) return Shock{0.0};
                return Shock{unit(rng) / zz};
            }
            return Shock{unit(rng)};
        }
    }
    return {};
}

double TransitionKernel::spectral_norm() const {
    if (kind_ != Kind::linear_ar) throw ConfigError("spectral_norm is defined for linear_ar kernels");
    return power_iteration_norm(B_);
}

void TransitionKernel::validate() const {
    switch (kind_) {
        case Kind::linear_ar: {
            if ((B_.array() < 0.0).any()) throw ConditionError("linear_ar: B must be entrywise nonnegative");
            const double norm = spectral_norm();
            if (!(norm < 1.0)) {
                throw ConditionError("linear_ar: spectral norm of B is " + std::to_string(norm) + ", must be < 1");
            }
            for (std::size_t i = 0; i < dim_; ++i) {
                if (w_->lower_support(i) < 0.0) throw ConditionError("linear_ar: innovation support must be >= 0");
                const auto m = w_->moment(i, 1.0);
                if (m && !std::isfinite(*m)) throw ConditionError("linear_ar: innovation mean must be finite");
            }
            break;
        }
        case Kind::log_log_ar:
            for (std::size_t i = 0; i < dim_; ++i) {
                if (!(rho_[i] >= 0.0 && rho_[i] <= 1.0)) {
                    throw ConditionError("log_log_ar: rho_" + std::to_string(i + 1) + " must lie in [0, 1]");
                }
                if (w_->lower_support(i) < 1.0) {
                    throw ConditionError("log_log_ar: innovation support must lie in [1, inf)");
                }
            }
            break;
        case Kind::degenerate:
        case Kind::piecewise_jump:
            break;
    }
}

void TransitionKernel::validate_discount(double beta) const {
    validate();
    if (kind_ != Kind::log_log_ar) return;
    for (std::size_t i = 0; i < dim_; ++i) {
        if (rho_[i] != 1.0) continue;
        const auto m = w_->moment(i, 1.0);
        const double mean = m ? *m : std::numeric_limits<double>::infinity();
        if (!(beta * mean < 1.0)) {
            throw ConditionError("unit-root shock " + std::to_string(i + 1) + " needs beta * E[w] < 1, got " +
                                 std::to_string(beta * mean));
        }
    }
}

std::vector<Shock> sample_path(const TransitionKernel& Q, Shock z0, std::size_t horizon, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Shock> path;
    path.reserve(horizon + 1);
    path.push_back(std::move(z0));
    for (std::size_t t = 0; t < horizon; ++t) path.push_back(Q.sample(path.back(), rng));
    return path;
}

}  // namespace stochdp
