#pragma once

#include <array>

#include "berrywave/geometry.hpp"

namespace berrywave {

class energy_level {
 public:
  explicit energy_level(double energy);

  double E() const { return energy_; }
  double k() const { return k_; }
  // 2 pi^2 E, the variance of each gradient component.
  double gradient_variance() const { return 0.5 * k_ * k_; }

 private:
  double energy_;
  double k_;
};

using mat2 = std::array<std::array<double, 2>, 2>;
using mat6 = std::array<std::array<double, 6>, 6>;

// Ordering: B(x), B(y), d1B(x), d2B(x), d1B(y), d2B(y).
struct sigma_matrix {
  mat6 m;

  const std::array<double, 6>& operator[](int i) const { return m[i]; }
};

struct omega_matrix {
  mat2 omega;  // conditional covariance of grad B(x) given B(x) = B(y) = 0
  double psi;  // |det omega| / (1 - r^2)
};

// Normalized covariances r~_{k,l}, k,l in {0,1,2}, at one separation.
struct normalized_block {
  std::array<std::array<double, 3>, 3> r;
};

class cov_kernel {
 public:
  explicit cov_kernel(energy_level e) : energy_(e) {}

  const energy_level& energy() const { return energy_; }

  // J0(k |dx|).
  double kernel(vec2 dx) const;
  // r_{0,i}(dx) = Cov(B(x), d_i B(y)), dx = x - y, axis i in {1,2}; r_{i,0} = -r_{0,i}.
  double d1(int i, vec2 dx) const;
  // r_{i,j}(dx) = Cov(d_i B(x), d_j B(y)).
  double d2(int i, int j, vec2 dx) const;
  static double d1_at_zero() { return 0.0; }
  double d2_at_zero(int i, int j) const;

  // Derivative indices scaled by 1/sqrt(2 pi^2 E); (0,0) is the kernel.
  double normalized(int k, int l, vec2 dx) const;
  normalized_block normalized_all(vec2 dx) const;

  sigma_matrix sigma(vec2 dx) const;
  sigma_matrix sigma_at_zero() const;
  omega_matrix omega(vec2 dx) const;

 private:
  energy_level energy_;
};

// Normalized covariances from the scaled argument psi = k |dx| and direction (c, s).
normalized_block normalized_from_polar(double psi, double c, double s);

}  // namespace berrywave
