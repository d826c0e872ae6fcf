#pragma once

#include <array>
#include <compare>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "berrywave/covariance.hpp"
#include "berrywave/geometry.hpp"

namespace berrywave {

// Exponents q_{i,j} of the normalized covariances r~_{i,j}, i,j in {0,1,2}.
struct q_exponent {
  std::array<std::array<int, 3>, 3> q{};

  q_exponent() = default;
  // Entries (i, j, power); repeated (i, j) pairs accumulate.
  q_exponent(std::initializer_list<std::array<int, 3>> entries);

  int total() const;
  int& operator()(int i, int j) { return q[i][j]; }
  int operator()(int i, int j) const { return q[i][j]; }
  auto operator<=>(const q_exponent&) const = default;
};

// h_{i,j}(theta): angular part of the large-argument form of r~_{i,j} at unit energy.
double angular_factor(int i, int j, double theta);
// g_{i,j}(psi): the matching radial part, cos or sin of (2 pi psi - pi/4) over sqrt(psi).
double radial_factor(int i, int j, double psi);

// Integral over [0, 2 pi] of prod h_{i,j}^{q_{i,j}}; periodic trapezoid with 32 nodes.
double angular_moment(const q_exponent& q);
// The same from the power-reduction formula for cos^a sin^b.
double angular_moment_closed_form(const q_exponent& q);

struct radial_moment_result {
  double integral;         // integral over [1, upper] of psi prod g^q
  double log_coefficient;  // period mean of the trig product (slope in log(upper) for total 4)
};

radial_moment_result radial_moment(const q_exponent& q, double upper);

// c in integral ~ c area/pi^3 log E/E for one monomial (total 4).
double leading_constant(const q_exponent& q);

struct moment_prediction {
  double leading;  // c, in units of area/pi^3 log E/E
  double value;    // integral over D x D of prod r~^q(x - y)
  double error;    // difference between two radial orders on the final panels
};

inline constexpr double moment_tolerance = 1e-4;
inline constexpr int max_panel_halvings = 4;

// Exact radial reduction with the true Bessel kernels. Throws budget_error if the tolerance is
// not met after max_panel_halvings refinements.
moment_prediction covariance_integral(const q_exponent& q, const energy_level& e, const domain& d);
// Batched: all monomials share the kernel evaluations.
std::vector<moment_prediction> covariance_integrals(std::span<const q_exponent> qs, const energy_level& e,
                                                    const domain& d);

// area(D) times the integral over the disk of radius diam(D) of prod r~^q.
double radial_reduction(const q_exponent& q, const energy_level& e, const domain& d);

// Hermite monomial prod H_{n_a}(V_a) over a point; variables 0..2 are B, d~1 B, d~2 B of the
// real field and 3..5 the same for an independent copy.
struct chaos_monomial {
  std::vector<std::pair<int, int>> factors;  // (variable, degree)
};

struct q_term {
  double coef;
  q_exponent q;
};

// E[F(x) G(y)] = sum coef prod r~^q(x - y), by the diagram formula. Identical q are merged.
std::vector<q_term> diagram_expansion(const chaos_monomial& f, const chaos_monomial& g);

const std::array<chaos_monomial, 6>& a_monomials();
const std::array<chaos_monomial, 10>& b_monomials();

// Constants as printed in the source tables, upper triangles in row order.
const std::array<double, 21>& printed_a_constants();
const std::array<double, 55>& printed_b_constants();

struct table_entry {
  std::string entry;
  double numeric;           // the double integral at E
  double paper_constant;    // leading constant from the asymptotic kernels
  double printed_constant;  // as printed
  double ratio;             // numeric / (paper_constant area/pi^3 log E/E)
  double E;
};

struct appendix_b {
  double E;
  std::vector<table_entry> entries;  // 21 a entries then 55 b entries
  std::array<std::array<double, 6>, 6> a{};
  std::array<std::array<double, 10>, 10> b{};
  std::array<std::array<double, 6>, 6> a_constant{};
  std::array<std::array<double, 10>, 10> b_constant{};
};

appendix_b appendix_b_table(const energy_level& e, const domain& d);

void write_appendix_b_csv(std::ostream& os, const appendix_b& t);

struct fourth_variances {
  double var_l4;  // Var L[4]
  double var_n4;  // Var N[4] = 2 Var(a_E) + Var(b_E)
  double var_a_e;
  double var_b_e;
};

fourth_variances predicted_fourth_variances(const appendix_b& t);
fourth_variances predicted_fourth_variances(const energy_level& e, const domain& d);

// Leading asymptotics: area log E/(512 pi), 11 area E log E/(32 pi), area E log E/(256 pi),
// 43 area E log E/(128 pi).
fourth_variances asymptotic_fourth_variances(const energy_level& e, const domain& d);

}  // namespace berrywave
