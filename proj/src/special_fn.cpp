#include "berrywave/special_fn.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace berrywave {

namespace {

void check_argument(double x) {
  if (!std::isfinite(x) || x < 0.0) {
    throw std::domain_error("bessel_j: argument must be finite and >= 0, got " + std::to_string(x));
  }
}

// Power series in extended precision; terms peak near 1e6 at the crossover.
double series(int nu, double xd) {
  long double x = xd;
  long double half = x / 2.0L;
  long double q = half * half;
  long double term = 1.0L;
  for (int i = 1; i <= nu; ++i) {
    term *= half / i;
  }
  long double sum = term;
  for (int m = 1; m < 120; ++m) {
    term *= -q / (static_cast<long double>(m) * (m + nu));
    sum += term;
    if (std::fabs(term) < 1e-24L * (1.0L + std::fabs(sum))) {
      break;
    }
  }
  return static_cast<double>(sum);
}

struct hankel_pq {
  double p;
  double q;
};

// P and Q of the Hankel expansion, hankel_terms terms each.
hankel_pq hankel(int nu, double x) {
  double mu = 4.0 * nu * nu;
  double z = 8.0 * x;
  double p = 0.0;
  double q = 0.0;
  double a = 1.0;  // a_k(nu) / (8x)^k
  for (int k = 0; k < 2 * hankel_terms; ++k) {
    if (k % 2 == 0) {
      p += ((k / 2) % 2 == 0 ? a : -a);
    } else {
      q += ((k / 2) % 2 == 0 ? a : -a);
    }
    double odd = 2.0 * k + 1.0;
    a *= (mu - odd * odd) / ((k + 1) * z);
  }
  return {p, q};
}

// cos(x - w) and sin(x - w) with w = (2nu+1)pi/4, without forming x - w.
void shifted_trig(int nu, double cx, double sx, double& c, double& s) {
  constexpr double r = std::numbers::sqrt2 / 2.0;
  // w = pi/4, 3pi/4, 5pi/4
  double cw = nu == 0 ? r : (nu == 1 ? -r : -r);
  double sw = nu == 0 ? r : (nu == 1 ? r : -r);
  c = cx * cw + sx * sw;
  s = sx * cw - cx * sw;
}

double asymptotic(int nu, double x, double cx, double sx) {
  auto [p, q] = hankel(nu, x);
  double c = 0.0;
  double s = 0.0;
  shifted_trig(nu, cx, sx, c, s);
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * c - q * s);
}

}  // namespace

bessel_order::bessel_order(int order) : order_(order) {
  if (order < 0 || order > 2) {
    throw std::domain_error("bessel_order: only orders 0, 1, 2 are supported");
  }
}

hermite_degree::hermite_degree(int degree, int max_degree) : degree_(degree) {
  if (degree < 0 || degree > max_degree) {
    throw std::domain_error("hermite_degree: degree out of range");
  }
}

double bessel_j(bessel_order order, double x) {
  check_argument(x);
  int nu = order.value();
  if (x <= bessel_crossover) {
    return series(nu, x);
  }
  return asymptotic(nu, x, std::cos(x), std::sin(x));
}

bessel_values bessel_j012(double x) {
  check_argument(x);
  if (x <= bessel_crossover) {
    return {series(0, x), series(1, x), series(2, x)};
  }
  double cx = std::cos(x);
  double sx = std::sin(x);
  return {asymptotic(0, x, cx, sx), asymptotic(1, x, cx, sx), asymptotic(2, x, cx, sx)};
}

double bessel_envelope(bessel_order order, double x) {
  if (!std::isfinite(x) || x <= 0.0) {
    throw std::domain_error("bessel_envelope: argument must be > 0");
  }
  double c = 0.0;
  double s = 0.0;
  shifted_trig(order.value(), std::cos(x), std::sin(x), c, s);
  return std::sqrt(2.0 / (std::numbers::pi * x)) * c;
}

double hermite(hermite_degree degree, double t) {
  return hermite(degree.value(), t);
}

}  // namespace berrywave
