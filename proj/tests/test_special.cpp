#include <cse/special.hpp>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <doctest.h>

#include <cmath>
#include <tuple>

using namespace cse;

TEST_CASE("normal functions agree with Boost") {
    const boost::math::normal_distribution<double> n01;
    for (double x = -8.0; x <= 8.0; x += 0.37) {
        CHECK(normal_pdf(x) == doctest::Approx(boost::math::pdf(n01, x)).epsilon(1e-14));
        CHECK(normal_cdf(x) == doctest::Approx(boost::math::cdf(n01, x)).epsilon(1e-13));
        CHECK(normal_sf(x) == doctest::Approx(boost::math::cdf(boost::math::complement(n01, x))).epsilon(1e-13));
    }
    for (double p : {1e-300, 1e-20, 1e-10, 1e-4, 0.01, 0.025, 0.3, 0.5, 0.77, 0.975, 0.999999, 1.0 - 1e-15}) {
        CHECK(normal_quantile(p) == doctest::Approx(boost::math::quantile(n01, p)).epsilon(1e-14));
    }
    CHECK(std::isinf(normal_quantile(0.0)));
    CHECK_THROWS(normal_quantile(1.5));
}

TEST_CASE("regularized incomplete beta agrees with Boost") {
    for (double a : {0.5, 1.0, 3.0, 26.0, 101.0, 5000.0}) {
        for (double b : {0.5, 1.0, 7.0, 975.0, 99900.0}) {
            for (double x : {1e-6, 1e-3, 0.01, 0.03, 0.2, 0.5, 0.9, 0.999}) {
                const double expected = boost::math::ibeta(a, b, x);
                CHECK(ibeta(a, b, x) == doctest::Approx(expected).epsilon(1e-11).scale(1e-300));
            }
        }
    }
    CHECK(ibeta(2.0, 3.0, 0.0) == 0.0);
    CHECK(ibeta(2.0, 3.0, 1.0) == 1.0);
    CHECK_THROWS(ibeta(0.0, 1.0, 0.5));
}

TEST_CASE("log beta agrees with Boost across the Stirling switch") {
    for (double a : {0.3, 2.0, 9.99, 10.0, 57.0, 1e5}) {
        for (double b : {0.7, 9.0, 10.5, 3000.0, 2e6}) {
            const double expected = std::log(boost::math::beta(a, b));
            if (!std::isfinite(expected)) continue;
            CHECK(log_beta(a, b) == doctest::Approx(expected).epsilon(1e-12).scale(1.0));
        }
    }
}

TEST_CASE("beta quantile bisection brackets the Boost inverse") {
    for (auto [p, a, b] : {std::tuple{0.95, 26.0, 975.0}, std::tuple{0.95, 1.0, 100.0}, std::tuple{0.05, 3.0, 40.0},
                           std::tuple{0.5, 0.5, 0.5}}) {
        const double exact = boost::math::ibeta_inv(a, b, p);
        const double up = beta_quantile(p, a, b, Rounding::up);
        const double down = beta_quantile(p, a, b, Rounding::down);
        CHECK(up >= exact - 1e-14);
        CHECK(down <= exact + 1e-14);
        CHECK(up - down <= 1e-12);
    }
}

TEST_CASE("softplus and its increment") {
    for (double x : {-40.0, -3.0, 0.0, 2.0, 35.0}) {
        CHECK(softplus(x) == doctest::Approx(std::log1p(std::exp(x))).epsilon(1e-14));
        CHECK(sigmoid(x) == doctest::Approx(1.0 / (1.0 + std::exp(-x))).epsilon(1e-14));
        for (double h : {-2.0, -0.3, 0.3, 4.0}) {
            const long double ref = std::log1p(std::exp(static_cast<long double>(x) + h)) -
                                    std::log1p(std::exp(static_cast<long double>(x)));
            CHECK(softplus_increment(x, h) == doctest::Approx(static_cast<double>(ref)).epsilon(1e-9).scale(1e-30));
        }
        // tiny h: first-order expansion h * sigmoid(x), error O(h^2)
        for (double h : {-1e-9, 1e-12}) {
            CHECK(softplus_increment(x, h) == doctest::Approx(h * sigmoid(x)).epsilon(1e-8).scale(1e-300));
        }
    }
}
