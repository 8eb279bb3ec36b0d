#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "stochdp/counterexample.hpp"
#include "stochdp/error.hpp"

using namespace stochdp;

namespace {

double identity(double z) { return z; }

std::function<double(double, double)> displayed(double y, double beta) {
    return [=](double m, double z) { return currency_value(m, z, y, beta); };
}

std::function<double(double, double)> exact(double y, double beta) {
    return [=](double m, double z) { return currency_value_exact(m, z, y, beta); };
}

}  // namespace

TEST_SUITE("counterexample") {
    TEST_CASE("Markov image of the identity jumps at zero") {
        CHECK(markov_image(identity, 0.0) == 0.0);
        CHECK(markov_image(identity, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
        for (double z : {1e-6, 1e-3, 0.01, 0.3, 0.99}) {
            CHECK(markov_image(identity, z) == doctest::Approx(0.5).epsilon(1e-9));
        }
        CHECK(markov_image(identity, 3.0) == doctest::Approx(0.5).epsilon(1e-12));
    }

    TEST_CASE("Markov image of bounded functions is continuous at zero") {
        const auto one = [](double) { return 1.0; };
        CHECK(discontinuity_gap(one, 0.01) <= 1e-12);
        CHECK(discontinuity_gap(identity, 0.01) == doctest::Approx(0.5).epsilon(1e-9));
        const auto capped = [](double z) { return std::min(z, 10.0); };
        CHECK(discontinuity_gap(capped, 0.01) == doctest::Approx(10.0 * 0.01 - 50.0 * 1e-4).epsilon(1e-9));
    }

    TEST_CASE("kernel is a probability measure") {
        const auto one = [](double) { return 1.0; };
        for (double z : {0.0, 0.25, 0.5, 0.99, 1.0, 7.0}) CHECK(markov_image(one, z) == doctest::Approx(1.0).epsilon(1e-12));
    }

    TEST_CASE("strong Feller on bounded functions") {
        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int trial = 0; trial < 20; ++trial) {
            const double a = u(rng), b = u(rng), c = u(rng);
            const auto f = [=](double x) { return a + b * std::tanh(x) + c / (1.0 + x * x); };
            const double sup = std::abs(a) + std::abs(b) + std::abs(c);
            for (int j = 4; j <= 16; j += 4) {
                const double z = std::ldexp(1.0, -j);
                CHECK(discontinuity_gap(f, z) <= 2.0 * sup * z + 1e-9);
            }
        }
    }

    TEST_CASE("currency value examples") {
        CHECK(currency_value(1.0, 0.0, 1.0, 0.5) == doctest::Approx(3.0).epsilon(1e-15));
        CHECK(currency_value(0.0, 1.0, 1.0, 0.5) == doctest::Approx(3.5).epsilon(1e-15));
        CHECK(currency_value_exact(1.0, 0.0, 1.0, 0.5) == doctest::Approx(3.0).epsilon(1e-15));
        CHECK(currency_value_exact(0.0, 1.0, 1.0, 0.5) == doctest::Approx(65.0 / 19.0).epsilon(1e-14));
        CHECK(currency_value_exact(0.0, 4.0, 1.0, 0.5) - currency_value_exact(0.0, 1.0, 1.0, 0.5) ==
              doctest::Approx(3.0).epsilon(1e-14));
    }

    TEST_CASE("displayed value solves the Bellman equation off (0, 1)") {
        const double y = 1.0, beta = 0.5;
        const auto v = displayed(y, beta);
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> mu(0.0, 10.0);
        std::uniform_real_distribution<double> zu(1.0, 20.0);
        for (int s = 0; s < 50; ++s) {
            const double m = mu(rng);
            const double z = s % 5 == 0 ? 0.0 : zu(rng);
            CHECK(std::abs(currency_residual(v, m, z, y, beta)) <= 1e-8);
        }
    }

    TEST_CASE("exact value solves the Bellman equation everywhere") {
        for (double beta : {0.3, 0.5, 0.6}) {
            const double y = 2.0;
            const auto v = exact(y, beta);
            std::mt19937_64 rng(9);
            std::uniform_real_distribution<double> mu(0.0, 10.0);
            std::uniform_real_distribution<double> zu(0.0, 3.0);
            for (int s = 0; s < 50; ++s) {
                const double m = mu(rng);
                const double z = s % 10 == 0 ? 0.0 : zu(rng);
                CHECK(std::abs(currency_residual(v, m, z, y, beta)) <= 1e-8);
            }
        }
    }

    TEST_CASE("displayed value misses the Bellman equation on (0, 1) by a closed amount") {
        const double y = 1.5, beta = 0.4;
        const auto v = displayed(y, beta);
        for (double z : {0.01, 0.2, 0.5, 0.9}) {
            const double expected = -0.5 * beta * beta * y * (1.0 - z) / (1.0 - beta);
            CHECK(currency_residual(v, 2.0, z, y, beta) == doctest::Approx(expected).epsilon(1e-9));
        }
    }

    TEST_CASE("parameter validation") {
        CHECK_THROWS_AS(currency_value(-1.0, 0.0, 1.0, 0.5), ConfigError);
        CHECK_THROWS_AS(currency_value(1.0, 0.0, 0.0, 0.5), ConfigError);
        CHECK_THROWS_AS(currency_value(1.0, 0.0, 1.0, 0.7), ConfigError);
        CHECK_THROWS_AS(currency_value(1.0, -0.1, 1.0, 0.5), ConfigError);
        CHECK_THROWS_AS(markov_image(identity, -1.0), ConfigError);
        CHECK_THROWS_AS(discontinuity_gap(identity, 0.5), ConfigError);
        CHECK_THROWS_AS(jump_profile(identity, 1), ConfigError);
    }

    TEST_CASE("jump profile rows") {
        const auto rows = jump_profile(identity, 25, 1e-6);
        REQUIRE(rows.size() == 27);
        CHECK(rows.front().z == 0.0);
        CHECK(rows.front().value == 0.0);
        CHECK(rows[1].z == 1e-6);
        CHECK(rows.back().z == 2.0);
        for (std::size_t i = 1; i < rows.size(); ++i) {
            CHECK(rows[i].z > rows[i - 1].z);
            CHECK(rows[i].value == doctest::Approx(0.5).epsilon(1e-9));
        }
        std::ostringstream csv;
        write_jump_csv(csv, {{0.0, 0.0}, {0.5, 0.5}});
        CHECK(csv.str() == "z,Mg\n0,0\n0.5,0.5\n");
    }
}
