#pragma once

#include <cstddef>
#include <vector>

namespace berrywave::quadrature {

struct rule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

// Gauss-Legendre on [-1, 1].
const rule& gauss_legendre(int order);

// Gauss-Legendre mapped to [a, b].
rule gauss_legendre(int order, double a, double b);

// Gauss-Hermite for the standard normal weight (probabilists'); weights sum to 1.
const rule& gauss_hermite(int order);

// Splits [a, b] into equal panels no wider than max_width, each with an order-point rule.
rule composite_gauss_legendre(double a, double b, double max_width, int order);

}  // namespace berrywave::quadrature
