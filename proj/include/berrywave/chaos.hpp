#pragma once

#include <array>
#include <map>
#include <span>
#include <vector>

#include "berrywave/geometry.hpp"
#include "berrywave/synthesis.hpp"

namespace berrywave {

struct chaos_coeffs {
  // Dirac mass at 0.
  double beta0, beta2, beta4;
  // Euclidean norm on R^2.
  double alpha00, alpha20, alpha02, alpha40, alpha04, alpha22;
  // Absolute Jacobian, keyed by (i2, i3, j2, j3); unlisted combinations are zero.
  std::map<std::array<int, 4>, double> gamma;

  double beta(int n) const;
  double alpha(int n, int m) const;
  double gamma_at(int i2, int i3, int j2, int j3) const;
};

const chaos_coeffs& coefficients();

struct second_chaos_forms {
  double interior_form;  // exact area integral of the plane-wave pair expansion
  double interior_grid;  // trapezoid on the node grid (NaN if no grid given)
  double boundary_form;  // Green-identity boundary integral
};

// Boundary form alone: (1/(8 pi sqrt(2E))) sum w B <grad B, n>.
double second_chaos_boundary(const wave_sample& w, const std::vector<boundary_node>& nodes);

// (pi sqrt(2E)/8) integral of (-2 B^2 + |grad~ B|^2) over the domain, in closed form.
double second_chaos_interior_exact(const wave_sample& w, const domain& d);

// Same integrand with trapezoid node weights over the inside cells.
double second_chaos_interior_grid(const field_grid& f);

second_chaos_forms second_chaos_length(const wave_sample& w, const domain& d, const field_grid* grid,
                                       const std::vector<boundary_node>& nodes);

// sqrt(2E) (L[2](re) + L[2](im)), boundary forms.
double second_chaos_count(const complex_wave_sample& c, const std::vector<boundary_node>& nodes);

struct fourth_chaos_terms_l {
  std::array<double, 6> a;
};

struct fourth_chaos_length_result {
  fourth_chaos_terms_l terms;
  double value;
};

struct fourth_chaos_count_result {
  fourth_chaos_terms_l re_terms;
  fourth_chaos_terms_l im_terms;
  std::array<double, 10> b;
  double a_e;
  double a_hat_e;
  double b_e;
  double value;
};

// Weights of the a_i combination: L[4] = sqrt(2 pi^2 E)/128 * sum w_i a_i.
inline constexpr std::array<double, 6> l4_weights = {8.0, -1.0, -1.0, -2.0, -8.0, -8.0};
// b_E = (pi E / 8) * sum w_j b_j.
inline constexpr std::array<double, 10> b_weights = {2.0, -1.0, -1.0, -1.0, -1.0, -0.25, -0.25, 1.25, 1.25, -3.0};

fourth_chaos_terms_l fourth_chaos_terms(const field_grid& f, execution ex = execution::parallel);
fourth_chaos_length_result fourth_chaos_length(const field_grid& f, execution ex = execution::parallel);
fourth_chaos_count_result fourth_chaos_count(const field_grid& re, const field_grid& im,
                                             execution ex = execution::parallel);

// Sample variance of total - 2nd - 4th (the mean drops out of a variance).
double residual_variance(std::span<const double> total, std::span<const double> second,
                         std::span<const double> fourth);

}  // namespace berrywave
