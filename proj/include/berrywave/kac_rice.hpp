#pragma once

#include <cstddef>

#include "berrywave/covariance.hpp"
#include "berrywave/geometry.hpp"

namespace berrywave {

enum class statistic_kind { length, count };

// One-point formula: area pi sqrt(E/2) for length, area pi E for the singularity count.
double kac_rice_mean(const energy_level& e, const domain& d, statistic_kind kind);

// Gradients at x and y conditioned on B(x) = B(y) = 0, with x - y along the first axis.
// Each axis block is exchangeable: Var X_i = Var Y_i = var_i, Cov(X_i, Y_i) = cov_i.
struct conditional_gradients {
  double var1;
  double cov1;
  double var2;
  double cov2;
  double density;  // p_{(B(x), B(y))}(0, 0)
};

conditional_gradients conditional_structure(const energy_level& e, double rho);

// E ||X|| ||Y|| for the block structure above (Laplace-transform double integral); needs |cov_i| < var_i.
double expected_norm_product(double var1, double cov1, double var2, double cov2);

// K2(rho) = p(0,0) E[||X|| ||Y|| | B(x) = B(y) = 0].
double two_point_length_density(const energy_level& e, double rho);

struct kac_rice_variance_result {
  double variance;
  double patch;  // analytic contribution of separations below h0
  double h0;
  double second_moment;  // E[L^2]
  std::size_t radial_nodes;
};

inline constexpr std::size_t kac_rice_node_budget = 2'000'000;

// Var of the nodal length: radial integral of G(rho)(K2 - mean density^2), separations below
// h0 = 1e-3/sqrt(E) replaced by the leading small-rho term K2 ~ sqrt(E/2)/rho.
kac_rice_variance_result kac_rice_variance_length(const energy_level& e, const domain& d);

}  // namespace berrywave
