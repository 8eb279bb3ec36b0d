#pragma once

#include <functional>
#include <ostream>
#include <vector>

namespace stochdp {

using ScalarFn = std::function<double(double)>;

/// (M f)(z) under the piecewise kernel: f(0) at z = 0,
/// f(0)(1 - z) + z^2 int_0^{1/z} f for 0 < z < 1, int_0^1 f for z >= 1.
/// The integrals use adaptive Gauss-Kronrod quadrature; non-convergence raises NumericalError.
double markov_image(const ScalarFn& f, double z);

/// |(M f)(z_small) - (M f)(0)| for z_small in (0, 0.1].
double discontinuity_gap(const ScalarFn& f, double z_small);

/// Currency economy with shock-dependent linear utility (1 + z) c, endowment y and
/// holdings choice m' in [0, m + y]. Requires m >= 0, y > 0, beta >= 0 and 1.5 beta < 1.
/// Closed form: m + y + y beta / (1 - beta) at z = 0, (1 + z)(m + y) + 1.5 y beta / (1 - beta) for z > 0.
double currency_value(double m, double z, double y, double beta);

/// Exact fixed point (1 + z)(m + y) + c(z), where c is constant on [1, inf), quadratic on (0, 1)
/// and c(0) = beta y / (1 - beta). Agrees with currency_value at z = 0 only.
double currency_value_exact(double m, double z, double y, double beta);

/// (T v)(m, z) = max_{m' in [0, m + y]} (1 + z)(m + y - m') + beta (M v(m', .))(z).
/// v must be affine in m, so the maximum is taken at an endpoint.
double currency_bellman(const std::function<double(double, double)>& v, double m, double z, double y, double beta);

/// (T v)(m, z) - v(m, z).
double currency_residual(const std::function<double(double, double)>& v, double m, double z, double y,
                         double beta);

struct JumpRow {
    double z = 0.0;
    double value = 0.0;
};

/// (z, (M f)(z)) at z = 0, at `points` log-spaced shocks in [z_min, 2] and at z = 0.5, sorted by z.
std::vector<JumpRow> jump_profile(const ScalarFn& f, std::size_t points = 25, double z_min = 1e-6);

/// Header "z,Mg" and one row per entry, shortest round-trip numbers.
void write_jump_csv(std::ostream& out, const std::vector<JumpRow>& rows);

}  // namespace stochdp
