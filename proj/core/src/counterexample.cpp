#include "stochdp/counterexample.hpp"

#include <algorithm>
#include <cmath>

#include "stochdp/error.hpp"
#include "stochdp/io.hpp"
#include "stochdp/shock_kernels.hpp"

namespace stochdp {

namespace {

void require_currency(double m, double y, double beta) {
    if (!(m >= 0.0)) throw ConfigError("currency economy: holdings m must be >= 0");
    if (!(y > 0.0) || !std::isfinite(y)) throw ConfigError("currency economy: endowment y must be positive");
    if (!(beta >= 0.0 && 1.5 * beta < 1.0)) throw ConfigError("currency economy: need beta >= 0 and 1.5 beta < 1");
}

const TransitionKernel& kernel() {
    static const TransitionKernel Q = TransitionKernel::piecewise_jump();
    return Q;
}

}  // namespace

double markov_image(const ScalarFn& f, double z) {
    if (!(z >= 0.0) || !std::isfinite(z)) throw ConfigError("markov_image: z must be a finite number >= 0");
    const double at[1] = {z};
    return kernel().conditional_expectation([&f](std::span<const double> s) { return f(s[0]); }, at);
}

double discontinuity_gap(const ScalarFn& f, double z_small) {
    if (!(z_small > 0.0 && z_small <= 0.1)) throw ConfigError("discontinuity_gap: z_small must lie in (0, 0.1]");
    return std::abs(markov_image(f, z_small) - markov_image(f, 0.0));
}

double currency_value(double m, double z, double y, double beta) {
    require_currency(m, y, beta);
    if (!(z >= 0.0)) throw ConfigError("currency economy: z must be >= 0");
    if (z == 0.0) return m + y + y * beta / (1.0 - beta);
    return (1.0 + z) * (m + y) + 1.5 * y * beta / (1.0 - beta);
}

double currency_value_exact(double m, double z, double y, double beta) {
    require_currency(m, y, beta);
    if (!(z >= 0.0)) throw ConfigError("currency economy: z must be >= 0");
    const double c0 = beta * y / (1.0 - beta);
    const double I = (1.5 * beta * y + 0.5 * beta * c0 + 0.25 * beta * beta * y) /
                     (1.0 - beta / 3.0 - beta * beta / 6.0);
    const double c1 = beta * (1.5 * y + I);
    double c = c1;
    if (z == 0.0) {
        c = c0;
    } else if (z < 1.0) {
        c = beta * (1.5 * y + (1.0 - z) * c0 + z * z * I + (z - z * z) * c1);
    }
    return (1.0 + z) * (m + y) + c;
}

double currency_bellman(const std::function<double(double, double)>& v, double m, double z, double y, double beta) {
    require_currency(m, y, beta);
    const auto objective = [&](double next) {
        const double continuation = markov_image([&](double zp) { return v(next, zp); }, z);
        return (1.0 + z) * (m + y - next) + beta * continuation;
    };
    return std::max(objective(0.0), objective(m + y));
}

double currency_residual(const std::function<double(double, double)>& v, double m, double z, double y,
                         double beta) {
    return currency_bellman(v, m, z, y, beta) - v(m, z);
}

std::vector<JumpRow> jump_profile(const ScalarFn& f, std::size_t points, double z_min) {
    if (points < 2) throw ConfigError("jump_profile: need at least two points");
    if (!(z_min > 0.0 && z_min < 2.0)) throw ConfigError("jump_profile: z_min must lie in (0, 2)");
    std::vector<double> zs{0.0, 0.5};
    const double lo = std::log(z_min);
    const double hi = std::log(2.0);
    for (std::size_t j = 0; j < points; ++j) {
        zs.push_back(std::exp(lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(points - 1)));
    }
    zs[2] = z_min;
    zs.back() = 2.0;
    std::sort(zs.begin(), zs.end());
    zs.erase(std::unique(zs.begin(), zs.end()), zs.end());
    std::vector<JumpRow> rows;
    rows.reserve(zs.size());
    for (double z : zs) rows.push_back({z, markov_image(f, z)});
    return rows;
}

void write_jump_csv(std::ostream& out, const std::vector<JumpRow>& rows) {
    out << "z,Mg\n";
    for (const auto& r : rows) out << format_double(r.z) << ',' << format_double(r.value) << '\n';
}

}  // namespace stochdp
