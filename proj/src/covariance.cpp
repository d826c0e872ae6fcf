#include "berrywave/covariance.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "berrywave/errors.hpp"
#include "berrywave/special_fn.hpp"

namespace berrywave {

namespace {

void check_axis(int i) {
  if (i != 1 && i != 2) {
    throw std::invalid_argument("axis must be 1 or 2");
  }
}

double component(vec2 v, int i) { return i == 1 ? v.x : v.y; }

double nonzero_norm(vec2 dx, const char* what) {
  double rho = norm(dx);
  if (!(rho > 0.0)) {
    throw degenerate_error(std::string(what) + ": separation must be nonzero");
  }
  return rho;
}

}  // namespace

energy_level::energy_level(double energy) : energy_(energy), k_(2.0 * std::numbers::pi * std::sqrt(energy)) {
  if (!(energy > 0.0) || !std::isfinite(energy)) {
    throw std::invalid_argument("energy must be positive and finite");
  }
}

double cov_kernel::kernel(vec2 dx) const {
  return bessel_j(bessel_order(0), energy_.k() * norm(dx));
}

double cov_kernel::d1(int i, vec2 dx) const {
  check_axis(i);
  double rho = nonzero_norm(dx, "kernel_d1");
  double k = energy_.k();
  return k * (component(dx, i) / rho) * bessel_j(bessel_order(1), k * rho);
}

double cov_kernel::d2(int i, int j, vec2 dx) const {
  check_axis(i);
  check_axis(j);
  double rho = nonzero_norm(dx, "kernel_d2");
  double k = energy_.k();
  auto b = bessel_j012(k * rho);
  double lam = energy_.gradient_variance();
  double ui = component(dx, i) / rho;
  if (i == j) {
    return lam * (b.j0 + (1.0 - 2.0 * ui * ui) * b.j2);
  }
  double uj = component(dx, j) / rho;
  return -2.0 * lam * ui * uj * b.j2;
}

double cov_kernel::d2_at_zero(int i, int j) const {
  check_axis(i);
  check_axis(j);
  return i == j ? energy_.gradient_variance() : 0.0;
}

normalized_block normalized_from_polar(double psi, double c, double s) {
  auto b = bessel_j012(psi);
  constexpr double r2 = std::numbers::sqrt2;
  normalized_block out{};
  auto& r = out.r;
  r[0][0] = b.j0;
  r[0][1] = r2 * c * b.j1;
  r[0][2] = r2 * s * b.j1;
  r[1][0] = -r[0][1];
  r[2][0] = -r[0][2];
  r[1][1] = b.j0 + (1.0 - 2.0 * c * c) * b.j2;
  r[2][2] = b.j0 + (1.0 - 2.0 * s * s) * b.j2;
  r[1][2] = -2.0 * c * s * b.j2;
  r[2][1] = r[1][2];
  return out;
}

normalized_block cov_kernel::normalized_all(vec2 dx) const {
  double rho = nonzero_norm(dx, "normalized_cov");
  return normalized_from_polar(energy_.k() * rho, dx.x / rho, dx.y / rho);
}

double cov_kernel::normalized(int k, int l, vec2 dx) const {
  if (k < 0 || k > 2 || l < 0 || l > 2) {
    throw std::invalid_argument("normalized_cov: indices must be in 0..2");
  }
  if (k == 0 && l == 0) {
    return kernel(dx);
  }
  return normalized_all(dx).r[k][l];
}

sigma_matrix cov_kernel::sigma_at_zero() const {
  sigma_matrix s{};
  double lam = energy_.gradient_variance();
  s.m[0][0] = 1.0;
  s.m[1][1] = 1.0;
  for (int i = 2; i < 6; ++i) {
    s.m[i][i] = lam;
  }
  return s;
}

sigma_matrix cov_kernel::sigma(vec2 dx) const {
  nonzero_norm(dx, "sigma_matrix");
  sigma_matrix s = sigma_at_zero();
  auto& m = s.m;
  double r = kernel(dx);
  m[0][1] = m[1][0] = r;
  // Same-point value/gradient covariances vanish.
  for (int i = 1; i <= 2; ++i) {
    double r0i = d1(i, dx);
    // Cov(B(x), d_i B(y)) = r_{0,i}; Cov(B(y), d_i B(x)) = r_{i,0} = -r_{0,i}.
    m[0][3 + i] = m[3 + i][0] = r0i;
    m[1][1 + i] = m[1 + i][1] = -r0i;
  }
  for (int i = 1; i <= 2; ++i) {
    for (int j = 1; j <= 2; ++j) {
      double rij = d2(i, j, dx);
      m[1 + i][3 + j] = rij;
      m[3 + j][1 + i] = rij;
    }
  }
  return s;
}

omega_matrix cov_kernel::omega(vec2 dx) const {
  nonzero_norm(dx, "omega_matrix");
  double r = kernel(dx);
  double one_minus = 1.0 - r * r;
  if (one_minus < 1e-12) {
    throw degenerate_error("omega_matrix: 1 - r^2 below 1e-12, points too close");
  }
  double lam = energy_.gradient_variance();
  vec2 g{d1(1, dx), d1(2, dx)};
  omega_matrix out{};
  out.omega[0][0] = lam - g.x * g.x / one_minus;
  out.omega[1][1] = lam - g.y * g.y / one_minus;
  out.omega[0][1] = out.omega[1][0] = -g.x * g.y / one_minus;
  double det = out.omega[0][0] * out.omega[1][1] - out.omega[0][1] * out.omega[1][0];
  out.psi = std::fabs(det) / one_minus;
  return out;
}

}  // namespace berrywave
