#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace stochdp {

using Shock = std::vector<double>;
using Rng = std::mt19937_64;

struct WeightedShock {
    Shock value;
    double weight = 0.0;
};

enum class QuadratureScheme { midpoint, stratified };

/// How continuous innovation laws are replaced by finitely many nodes.
struct QuadratureRule {
    std::size_t nodes = 256;
    QuadratureScheme scheme = QuadratureScheme::midpoint;
    std::uint64_t seed = 0;
};

/// Law of the i.i.d. innovation w. Continuous kinds have independent coordinates.
class InnovationLaw {
public:
    enum class Kind { point_mass, atoms, rectified_lognormal, pareto };

    static InnovationLaw point_mass(Shock value);
    static InnovationLaw atoms(std::vector<WeightedShock> atoms);
    /// w_i = exp(max(mu_i + s_i * eps_i, 0)), eps_i standard normal: support [1, inf).
    static InnovationLaw rectified_lognormal(std::vector<double> mu, std::vector<double> s);
    /// One-dimensional rectified law with mu = -s^2 / (2 (1 + rho)), the usual mean-one shift.
    static InnovationLaw mean_shifted_lognormal(double s, double rho);
    /// w_i Pareto on [1, inf) with shape a_i > 0.
    static InnovationLaw pareto(std::vector<double> shape);

    Kind kind() const noexcept { return kind_; }
    std::string kind_name() const;
    std::size_t dim() const noexcept { return dim_; }

    /// E[w_i^q]: a value, +inf when the moment diverges, nullopt when no closed form exists.
    std::optional<double> moment(std::size_t i, double q) const;
    Shock mean() const;
    double lower_support(std::size_t i) const;

    Shock sample(Rng& rng) const;
    std::vector<WeightedShock> quadrature(const QuadratureRule& rule) const;

    const std::vector<WeightedShock>& atom_list() const noexcept { return atoms_; }
    const std::vector<double>& first_parameter() const noexcept { return a_; }
    const std::vector<double>& second_parameter() const noexcept { return b_; }

private:
    double quantile(std::size_t i, double u) const;

    Kind kind_ = Kind::point_mass;
    std::size_t dim_ = 0;
    std::vector<WeightedShock> atoms_;
    std::vector<double> a_;  // mu (lognormal) or shape (pareto)
    std::vector<double> b_;  // s (lognormal)
};

/// One-step transition law Q(z, .) on the shock space.
class TransitionKernel {
public:
    enum class Kind { linear_ar, log_log_ar, degenerate, piecewise_jump };

    /// z' = B z + w, w >= 0.
    static TransitionKernel linear_ar(Eigen::MatrixXd B, InnovationLaw w, QuadratureRule rule = {});
    /// z'_i = z_i^{rho_i} w_i, w >= 1.
    static TransitionKernel log_log_ar(std::vector<double> rho, InnovationLaw w, QuadratureRule rule = {});
    static TransitionKernel degenerate(std::size_t dim);
    /// Q(0, .) = delta_0; for 0 < z < 1 mass 1 - z at 0 plus density z^2 on [0, 1/z];
    /// for z >= 1 uniform on [0, 1].
    static TransitionKernel piecewise_jump();

    Kind kind() const noexcept { return kind_; }
    std::string kind_name() const;
    std::size_t dim() const noexcept { return dim_; }
    const QuadratureRule& rule() const noexcept { return rule_; }
    const InnovationLaw& innovation() const;
    const Eigen::MatrixXd& matrix() const noexcept { return B_; }
    const std::vector<double>& rho() const noexcept { return rho_; }

    /// Quadrature successors of z. Deterministic; weights sum to one.
    std::vector<WeightedShock> successors(std::span<const double> z) const;

    double conditional_expectation(const std::function<double(std::span<const double>)>& f,
                                   std::span<const double> z) const;
    Shock conditional_mean(std::span<const double> z) const;
    Shock sample(std::span<const double> z, Rng& rng) const;

    /// Largest singular value of B by power iteration on B^T B.
    double spectral_norm() const;

    /// Regime checks: ||B|| < 1 and E w finite for linear_ar, rho_i <= 1 for log_log_ar,
    /// support constraints. Throws ConditionError.
    void validate() const;
    /// Adds the discount-dependent clause: rho_i = 1 requires beta E[w_i] < 1.
    void validate_discount(double beta) const;

private:
    Kind kind_ = Kind::degenerate;
    std::size_t dim_ = 0;
    Eigen::MatrixXd B_;
    std::vector<double> rho_;
    std::optional<InnovationLaw> w_;
    QuadratureRule rule_;
    std::vector<WeightedShock> nodes_;  // cached innovation quadrature
};

struct MomentOptions {
    enum class Method { automatic, monte_carlo };
    Method method = Method::automatic;
    std::size_t draws = 1000000;
    std::uint64_t seed = 0;
};

struct MomentEstimate {
    double value = 0.0;
    double standard_error = 0.0;
    std::string method;
};

/// Theta = E[w^{(1 - sigma) / (1 - rho)}] for the first innovation coordinate.
MomentEstimate moment_theta(double sigma, double rho, const InnovationLaw& w, const MomentOptions& options = {});

/// Monte-Carlo E[w_i^q]; throws DivergenceError when the estimate is unstable.
MomentEstimate monte_carlo_moment(const InnovationLaw& w, std::size_t i, double q, std::size_t draws,
                                  std::uint64_t seed);

std::vector<Shock> sample_path(const TransitionKernel& Q, Shock z0, std::size_t horizon, std::uint64_t seed);

double power_iteration_norm(const Eigen::MatrixXd& B, std::size_t steps = 200, double tol = 1e-10);

std::string format_shock(std::span<const double> z);

}  // namespace stochdp
