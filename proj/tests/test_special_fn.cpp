#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "berrywave/quadrature.hpp"
#include "berrywave/special_fn.hpp"

#include "oracles.hpp"

using namespace berrywave;

using oracle::bessel_series;

TEST_SUITE("special_fn") {
  TEST_CASE("bessel at zero") {
    CHECK(bessel_j(bessel_order(0), 0.0) == 1.0);
    CHECK(bessel_j(bessel_order(1), 0.0) == 0.0);
    CHECK(bessel_j(bessel_order(2), 0.0) == 0.0);
  }

  TEST_CASE("only orders 0..2") {
    CHECK_THROWS_AS(bessel_order(3), std::domain_error);
    CHECK_THROWS_AS(bessel_order(-1), std::domain_error);
  }

  TEST_CASE("domain errors") {
    CHECK_THROWS_AS(bessel_j(bessel_order(0), -1e-9), std::domain_error);
    CHECK_THROWS_AS(bessel_j(bessel_order(0), NAN), std::domain_error);
    CHECK_THROWS_AS(bessel_j(bessel_order(1), INFINITY), std::domain_error);
    CHECK_THROWS_AS(bessel_envelope(bessel_order(0), 0.0), std::domain_error);
    CHECK_THROWS_AS(hermite_degree(9), std::domain_error);
    CHECK_THROWS_AS(hermite_degree(-1), std::domain_error);
  }

#ifdef BERRYWAVE_HAVE_BOOST_MP
  TEST_CASE("J0(1) against the series") {
    CHECK(std::fabs(bessel_j(bessel_order(0), 1.0) - bessel_series(0, 1.0)) <= 1e-12);
  }

  TEST_CASE("absolute error 1e-12 on [0, 50]") {
    double worst[3] = {0, 0, 0};
    for (int o = 0; o < 3; ++o) {
      int n = o == 0 ? 10000 : 2000;
      for (int i = 0; i <= n; ++i) {
        double x = 50.0 * i / n;
        worst[o] = std::max(worst[o], std::fabs(bessel_j(bessel_order(o), x) - bessel_series(o, x)));
      }
    }
    CHECK(worst[0] <= 1e-12);
    CHECK(worst[1] <= 1e-12);
    CHECK(worst[2] <= 1e-12);
  }

  TEST_CASE("both branches agree across the crossover") {
    for (double x = bessel_crossover - 0.5; x <= bessel_crossover + 0.5; x += 0.01) {
      for (int o = 0; o < 3; ++o) {
        CHECK(std::fabs(bessel_j(bessel_order(o), x) - bessel_series(o, x)) <= 1e-12);
      }
    }
  }
#endif

  TEST_CASE("large arguments stay within 1e-9 relative of the envelope expansion") {
    // Beyond 50 compare with the three-term Hankel form, whose error is far below 1e-9 at 1e5.
    for (double x : {1e5, 3.3e5, 1e6}) {
      double p = 1.0 - 9.0 / (128.0 * x * x);
      double q = -1.0 / (8.0 * x);
      double w = x - std::numbers::pi / 4;
      double ref = std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(w) - q * std::sin(w));
      double v = bessel_j(bessel_order(0), x);
      CHECK(std::fabs(v - ref) <= 1e-9 * std::sqrt(2.0 / (std::numbers::pi * x)));
    }
  }

  TEST_CASE("recurrence J0 + J2 = (2/x) J1") {
    double worst = 0.0;
    for (int i = 0; i <= 20000; ++i) {
      double x = 0.1 * std::pow(1e4, i / 20000.0);
      auto b = bessel_j012(x);
      worst = std::max(worst, std::fabs(b.j0 + b.j2 - 2.0 / x * b.j1));
    }
    CHECK(worst <= 1e-9);
  }

  TEST_CASE("bessel_j012 matches bessel_j") {
    for (double x : {0.0, 0.3, 7.0, 17.99, 18.0, 18.01, 40.0, 1234.5}) {
      auto b = bessel_j012(x);
      CHECK(b.j0 == doctest::Approx(bessel_j(bessel_order(0), x)).epsilon(1e-14));
      CHECK(std::fabs(b.j1 - bessel_j(bessel_order(1), x)) <= 1e-15);
      CHECK(std::fabs(b.j2 - bessel_j(bessel_order(2), x)) <= 1e-15);
    }
  }

  TEST_CASE("envelope values") {
    double pi = std::numbers::pi;
    CHECK(bessel_envelope(bessel_order(0), pi / 4) == doctest::Approx(std::sqrt(8.0 / (pi * pi))).epsilon(1e-15));
    CHECK(bessel_envelope(bessel_order(0), pi / 4) == doctest::Approx(0.9003).epsilon(1e-4));
    CHECK(bessel_envelope(bessel_order(1), 3 * pi / 4) ==
          doctest::Approx(std::sqrt(2.0 / (pi * 3 * pi / 4))).epsilon(1e-15));
    double d = std::fabs(bessel_j(bessel_order(0), 20.0) - bessel_envelope(bessel_order(0), 20.0));
    CHECK(d <= 0.8 * 0.25 * std::pow(20.0, -1.5));
  }

  TEST_CASE("uniform envelope bound") {
    for (int o = 0; o < 3; ++o) {
      double mu = std::fabs(o * o - 0.25);
      double worst = 0.0;
      for (int i = 1; i <= 20000; ++i) {
        double x = 1e-3 * std::pow(1e7, i / 20000.0);
        double d = std::fabs(bessel_j(bessel_order(o), x) - bessel_envelope(bessel_order(o), x));
        worst = std::max(worst, std::pow(x, 1.5) * d);
      }
      CAPTURE(o);
      CHECK(worst <= 0.8 * mu);
    }
  }

  TEST_CASE("hermite values") {
    CHECK(hermite(hermite_degree(2), 0.0) == -1.0);
    CHECK(hermite(hermite_degree(4), 2.0) == -5.0);
    CHECK(hermite(hermite_degree(0), 7.3) == 1.0);
    CHECK(hermite(hermite_degree(3), 1.5) == doctest::Approx(1.5 * 1.5 * 1.5 - 4.5));
    for (double t : {-2.0, -0.3, 0.0, 1.1, 3.7}) {
      CHECK(hermite(4, t) == doctest::Approx(t * t * t * t - 6 * t * t + 3).epsilon(1e-13));
    }
  }

  TEST_CASE("hermite orthogonality under Gauss-Hermite") {
    const auto& gh = quadrature::gauss_hermite(24);
    double fact[5] = {1, 1, 2, 6, 24};
    for (int n = 0; n <= 4; ++n) {
      for (int m = 0; m <= 4; ++m) {
        double s = 0.0;
        for (std::size_t i = 0; i < gh.size(); ++i) {
          s += gh.weights[i] * hermite(n, gh.nodes[i]) * hermite(m, gh.nodes[i]);
        }
        CHECK(std::fabs(s - (n == m ? fact[n] : 0.0)) <= 1e-8);
      }
    }
  }
}
