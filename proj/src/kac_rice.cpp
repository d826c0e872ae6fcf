#include "berrywave/kac_rice.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "berrywave/errors.hpp"
#include "berrywave/quadrature.hpp"
#include "berrywave/special_fn.hpp"

namespace berrywave {

namespace {

using std::numbers::pi;

constexpr int series_terms = 24;
using poly = std::array<long double, series_terms>;

poly mul(const poly& a, const poly& b) {
  poly out{};
  for (int i = 0; i < series_terms; ++i) {
    for (int j = 0; i + j < series_terms; ++j) {
      out[i + j] += a[i] * b[j];
    }
  }
  return out;
}

poly shift(const poly& a) {
  poly out{};
  for (int i = 0; i + 1 < series_terms; ++i) {
    out[i + 1] = a[i];
  }
  return out;
}

long double eval(const poly& p, long double y) {
  long double s = 0.0L;
  for (int i = series_terms - 1; i >= 0; --i) {
    s = s * y + p[i];
  }
  return s;
}

// Coefficients in y = (x/2)^2 of 1 - J0^2, 1 - J0^2 - 2 J1^2 and (J0 - J2)(1 - J0^2) - 2 J0 J1^2.
// The leading terms cancel exactly here instead of in floating point.
struct small_argument_series {
  poly den;
  poly n1;
  poly m1;

  small_argument_series() {
    poly a{};
    poly b{};
    poly c{};
    long double f = 1.0L;  // m!
    for (int m = 0; m < series_terms; ++m) {
      if (m > 0) {
        f *= m;
      }
      long double sign = m % 2 == 0 ? 1.0L : -1.0L;
      a[m] = sign / (f * f);
      b[m] = sign / (f * f * (m + 1));
      c[m] = sign / (f * f * (m + 1) * (m + 2));
    }
    poly a2 = mul(a, a);
    poly j1sq = shift(mul(b, b));  // J1^2 = y (b*b)
    for (int i = 0; i < series_terms; ++i) {
      den[i] = i == 0 ? 0.0L : -a2[i];
      n1[i] = den[i] - 2.0L * j1sq[i];
    }
    poly j0_minus_j2 = a;
    poly yc = shift(c);
    for (int i = 0; i < series_terms; ++i) {
      j0_minus_j2[i] -= yc[i];
    }
    poly t1 = mul(j0_minus_j2, den);
    poly t2 = mul(a, j1sq);
    for (int i = 0; i < series_terms; ++i) {
      m1[i] = t1[i] - 2.0L * t2[i];
    }
    n1[0] = n1[1] = 0.0L;
    m1[0] = m1[1] = 0.0L;
  }
};

const small_argument_series& series() {
  static const small_argument_series s;
  return s;
}

// Double-exponential nodes for integrals over (0, inf): s = scale exp(pi/2 sinh u).
struct de_nodes {
  std::vector<double> s;
  std::vector<double> w;  // ds weight times s^{-3/2}
};

constexpr double de_step = 1.0 / 32.0;
constexpr double de_limit = 4.75;

de_nodes make_nodes(double scale) {
  de_nodes out;
  int n = static_cast<int>(std::ceil(de_limit / de_step));
  for (int m = -n; m <= n; ++m) {
    double u = m * de_step;
    double s = scale * std::exp(0.5 * pi * std::sinh(u));
    double ds = s * 0.5 * pi * std::cosh(u) * de_step;
    out.s.push_back(s);
    out.w.push_back(ds / (s * std::sqrt(s)));
  }
  return out;
}

}  // namespace

double kac_rice_mean(const energy_level& e, const domain& d, statistic_kind kind) {
  double lam = e.gradient_variance();
  if (kind == statistic_kind::length) {
    // E||grad B|| for covariance lam I2 is sqrt(lam) sqrt(pi/2); the level density at 0 is 1/sqrt(2 pi).
    return d.area() * std::sqrt(lam) * std::sqrt(0.5 * pi) / std::sqrt(2.0 * pi);
  }
  // E|det| of a 2x2 matrix with i.i.d. N(0, lam) entries is lam; density of (B, B^) at 0 is 1/(2 pi).
  return d.area() * lam / (2.0 * pi);
}

conditional_gradients conditional_structure(const energy_level& e, double rho) {
  if (!(rho > 0.0)) {
    throw degenerate_error("conditional_structure: separation must be positive");
  }
  double lam = e.gradient_variance();
  double x = e.k() * rho;
  auto b = bessel_j012(x);
  double den;
  double n1;
  double m1;
  if (x <= 2.0) {
    const auto& s = series();
    long double y = 0.25L * x * x;
    den = static_cast<double>(eval(s.den, y));
    n1 = static_cast<double>(eval(s.n1, y));
    m1 = static_cast<double>(eval(s.m1, y));
  } else {
    den = 1.0 - b.j0 * b.j0;
    n1 = den - 2.0 * b.j1 * b.j1;
    m1 = (b.j0 - b.j2) * den - 2.0 * b.j0 * b.j1 * b.j1;
  }
  if (den < 1e-300) {
    throw degenerate_error("conditional_structure: 1 - r^2 vanishes");
  }
  return {lam * n1 / den, lam * m1 / den, lam, lam * (b.j0 + b.j2), 1.0 / (2.0 * pi * std::sqrt(den))};
}

double expected_norm_product(double var1, double cov1, double var2, double cov2) {
  if (!(var1 >= 0.0) || !(var2 >= 0.0) || !(var1 + var2 > 0.0)) {
    throw std::invalid_argument("expected_norm_product: variances must be nonnegative");
  }
  if (std::fabs(cov1) >= std::max(var1, 1e-300) || std::fabs(cov2) >= std::max(var2, 1e-300)) {
    throw std::invalid_argument("expected_norm_product: |cov| must be below the variance");
  }
  // ||x|| = (2 sqrt(pi))^{-1} int_0^inf (1 - exp(-s |x|^2)) s^{-3/2} ds, applied to X and Y.
  auto nodes = make_nodes(1.0 / (var1 + var2));
  const std::size_t n = nodes.s.size();
  std::vector<double> A(n);
  std::vector<double> p1(n);
  std::vector<double> p2(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = nodes.s[i];
    A[i] = -std::expm1(-0.5 * (std::log1p(2.0 * s * var1) + std::log1p(2.0 * s * var2)));
    p1[i] = 2.0 * s * cov1 / (1.0 + 2.0 * s * var1);
    p2[i] = 2.0 * s * cov2 / (1.0 + 2.0 * s * var2);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j <= i; ++j) {
      double C = std::expm1(-0.5 * (std::log1p(-p1[i] * p1[j]) + std::log1p(-p2[i] * p2[j])));
      double v = nodes.w[j] * (A[i] * A[j] + (1.0 - A[i]) * (1.0 - A[j]) * C);
      row += j == i ? 0.5 * v : v;
    }
    sum += 2.0 * nodes.w[i] * row;
  }
  return sum / (4.0 * pi);
}

double two_point_length_density(const energy_level& e, double rho) {
  auto c = conditional_structure(e, rho);
  return c.density * expected_norm_product(c.var1, c.cov1, c.var2, c.cov2);
}

kac_rice_variance_result kac_rice_variance_length(const energy_level& e, const domain& d) {
  double E = e.E();
  double diam = d.diameter();
  double h0 = 1e-3 / std::sqrt(E);
  double width = 1.0 / (8.0 * std::sqrt(E));
  double mu = pi * std::sqrt(0.5 * E);

  // Geometric panels from h0, then uniform ones with breaks at the covariogram kinks.
  std::vector<double> breaks{h0};
  for (double b = 2.0 * h0; b < std::min(width, diam); b *= 2.0) {
    breaks.push_back(b);
  }
  std::vector<double> kinks{diam};
  if (d.kind() == domain_kind::rectangle) {
    kinks.push_back(d.width());
    kinks.push_back(d.height());
  }
  for (double k : kinks) {
    if (k > breaks.back()) {
      breaks.push_back(k);
    }
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  quadrature::rule radial;
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    auto r = quadrature::composite_gauss_legendre(breaks[s], breaks[s + 1], width, 8);
    radial.nodes.insert(radial.nodes.end(), r.nodes.begin(), r.nodes.end());
    radial.weights.insert(radial.weights.end(), r.weights.begin(), r.weights.end());
  }
  if (radial.size() > kac_rice_node_budget) {
    throw budget_error("kac_rice_variance_length: radial node budget exceeded");
  }

  const long n = static_cast<long>(radial.size());
  std::vector<double> excess(static_cast<std::size_t>(n));
  std::vector<double> second(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic, 4)
  for (long i = 0; i < n; ++i) {
    auto iu = static_cast<std::size_t>(i);
    double rho = radial.nodes[iu];
    double g = radial.weights[iu] * rho * d.isotropic_covariogram(rho);
    double k2 = two_point_length_density(e, rho);
    excess[iu] = g * (k2 - mu * mu);
    second[iu] = g * k2;
  }
  double var = 0.0;
  double m2 = 0.0;
  for (long i = 0; i < n; ++i) {
    var += excess[static_cast<std::size_t>(i)];
    m2 += second[static_cast<std::size_t>(i)];
  }
  // Below h0: G(rho) ~ 2 pi area - 2 perimeter rho and K2 ~ sqrt(E/2)/rho.
  double area = d.area();
  double k2_part = std::sqrt(0.5 * E) * (2.0 * pi * area * h0 - d.perimeter() * h0 * h0);
  double patch = k2_part - mu * mu * pi * area * h0 * h0;
  return {var + patch, patch, h0, m2 + k2_part, radial.size()};
}

}  // namespace berrywave
