#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "berrywave/geometry.hpp"
#include "berrywave/synthesis.hpp"

namespace berrywave {

struct nodal_length_result {
  double length;
  std::size_t cells_crossed;
  double h;
};

struct singularity_count {
  std::size_t count;
  std::vector<std::size_t> cells;  // cell index iy * (nx - 1) + ix, ascending
  long total_winding;              // signed sum over inside cells
  long boundary_winding;           // winding along the outer edges of the inside cells
  bool ambiguous;                  // some corner had re = im = 0
};

struct epsilon_length_result {
  double value;
  bool undersampled;  // eps < 2 h max |grad|
};

// Field value at a cell center; used to resolve saddle cells.
using center_sampler = std::function<double(vec2)>;

// Marching squares over inside cells. Without a sampler the saddle rule uses the corner mean.
nodal_length_result nodal_length(std::span<const double> values, const grid_spec& g,
                                 const center_sampler& center = {}, execution ex = execution::parallel);

singularity_count count_singularities(std::span<const double> re, std::span<const double> im, const grid_spec& g,
                                      execution ex = execution::parallel);

epsilon_length_result epsilon_nodal_length(std::span<const double> values, std::span<const double> grad_x,
                                           std::span<const double> grad_y, double eps, const grid_spec& g);

// Replacement for exact zeros: 1e-12 times the RMS over the grid (0 if no zero occurs).
double tie_value(std::span<const double> values);

}  // namespace berrywave
