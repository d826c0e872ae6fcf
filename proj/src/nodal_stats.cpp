#include "berrywave/nodal_stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "berrywave/errors.hpp"

namespace berrywave {

namespace {

void check_grid(std::span<const double> values, const grid_spec& g) {
  if (values.size() != g.node_count()) {
    throw std::invalid_argument("grid values do not match the grid size");
  }
  if (auto ppw = g.points_per_wavelength(); ppw && *ppw < grid_spec::min_points_per_wavelength) {
    throw resolution_error("points_per_wavelength below 4");
  }
}

struct tied {
  std::span<const double> v;
  double tie;
  double operator[](std::size_t i) const { return v[i] == 0.0 ? tie : v[i]; }
};

vec2 crossing(vec2 a, vec2 b, double va, double vb) {
  double t = va / (va - vb);
  return a + t * (b - a);
}

// Quadrant of (re, im): 0..3 counterclockwise, -1 at the origin.
int quadrant(double re, double im) {
  if (re > 0.0 && im >= 0.0) {
    return 0;
  }
  if (re <= 0.0 && im > 0.0) {
    return 1;
  }
  if (re < 0.0 && im <= 0.0) {
    return 2;
  }
  if (re >= 0.0 && im < 0.0) {
    return 3;
  }
  return -1;
}

// Signed quarter turns from a to b; antisymmetric in (a, b).
int quarter_turns(double ra, double ia, double rb, double ib, bool& ambiguous) {
  int qa = quadrant(ra, ia);
  int qb = quadrant(rb, ib);
  if (qa < 0 || qb < 0) {
    ambiguous = true;
    return 0;
  }
  int d = ((qb - qa) % 4 + 4) % 4;
  if (d == 0) {
    return 0;
  }
  if (d == 1) {
    return 1;
  }
  if (d == 3) {
    return -1;
  }
  double c = ra * ib - ia * rb;
  if (c == 0.0) {
    ambiguous = true;
    return 2;
  }
  return c > 0.0 ? 2 : -2;
}

template <class Body>
void for_rows(long rows, execution ex, Body body) {
  if (ex == execution::parallel) {
#pragma omp parallel for schedule(dynamic, 8)
    for (long r = 0; r < rows; ++r) {
      body(r);
    }
  } else {
    for (long r = 0; r < rows; ++r) {
      body(r);
    }
  }
}

}  // namespace

double tie_value(std::span<const double> values) {
  bool any_zero = std::any_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
  if (!any_zero) {
    return 0.0;
  }
  double ss = 0.0;
  for (double v : values) {
    ss += v * v;
  }
  double rms = std::sqrt(ss / static_cast<double>(values.size()));
  return rms > 0.0 ? 1e-12 * rms : std::numeric_limits<double>::min();
}

nodal_length_result nodal_length(std::span<const double> values, const grid_spec& g, const center_sampler& center,
                                 execution ex) {
  check_grid(values, g);
  tied v{values, tie_value(values)};
  std::size_t cx = g.nx() - 1;
  std::size_t cy = g.ny() - 1;
  std::vector<double> row_length(cy, 0.0);
  std::vector<std::size_t> row_cells(cy, 0);

  for_rows(static_cast<long>(cy), ex, [&](long r) {
    auto iy = static_cast<std::size_t>(r);
    double len = 0.0;
    std::size_t crossed = 0;
    for (std::size_t ix = 0; ix < cx; ++ix) {
      if (!g.cell_inside(ix, iy)) {
        continue;
      }
      // Corners counterclockwise from lower left.
      vec2 p[4] = {g.node(ix, iy), g.node(ix + 1, iy), g.node(ix + 1, iy + 1), g.node(ix, iy + 1)};
      double f[4] = {v[g.index(ix, iy)], v[g.index(ix + 1, iy)], v[g.index(ix + 1, iy + 1)],
                     v[g.index(ix, iy + 1)]};
      vec2 cut[4];
      bool has[4];
      int n = 0;
      for (int e = 0; e < 4; ++e) {
        int a = e;
        int b = (e + 1) % 4;
        has[e] = (f[a] > 0.0) != (f[b] > 0.0);
        if (has[e]) {
          cut[e] = crossing(p[a], p[b], f[a], f[b]);
          ++n;
        }
      }
      if (n == 0) {
        continue;
      }
      ++crossed;
      if (n == 2) {
        int first = -1;
        for (int e = 0; e < 4; ++e) {
          if (has[e]) {
            if (first < 0) {
              first = e;
            } else {
              len += norm(cut[e] - cut[first]);
            }
          }
        }
        continue;
      }
      // Saddle: corners 0 and 2 share a sign opposite to 1 and 3.
      vec2 mid = 0.5 * (p[0] + p[2]);
      double fc = center ? center(mid) : 0.25 * (f[0] + f[1] + f[2] + f[3]);
      if (fc == 0.0) {
        fc = v.tie != 0.0 ? v.tie : std::numeric_limits<double>::min();
      }
      if ((fc > 0.0) == (f[0] > 0.0)) {
        // 0 and 2 joined through the center; cut off corners 1 and 3.
        len += norm(cut[1] - cut[0]) + norm(cut[3] - cut[2]);
      } else {
        len += norm(cut[0] - cut[3]) + norm(cut[2] - cut[1]);
      }
    }
    row_length[iy] = len;
    row_cells[iy] = crossed;
  });

  nodal_length_result out{0.0, 0, g.h()};
  for (std::size_t iy = 0; iy < cy; ++iy) {
    out.length += row_length[iy];
    out.cells_crossed += row_cells[iy];
  }
  return out;
}

singularity_count count_singularities(std::span<const double> re, std::span<const double> im, const grid_spec& g,
                                      execution ex) {
  check_grid(re, g);
  check_grid(im, g);
  tied vr{re, tie_value(re)};
  tied vi{im, tie_value(im)};
  std::size_t cx = g.nx() - 1;
  std::size_t cy = g.ny() - 1;
  std::vector<std::vector<std::size_t>> row_hits(cy);
  std::vector<long> row_total(cy, 0);
  std::vector<long> row_boundary(cy, 0);
  std::vector<unsigned char> row_ambiguous(cy, 0);

  auto inside = [&](long ix, long iy) {
    return ix >= 0 && iy >= 0 && ix < static_cast<long>(cx) && iy < static_cast<long>(cy) &&
           g.cell_inside(static_cast<std::size_t>(ix), static_cast<std::size_t>(iy));
  };

  for_rows(static_cast<long>(cy), ex, [&](long r) {
    auto iy = static_cast<std::size_t>(r);
    bool amb = false;
    long total = 0;
    long boundary = 0;
    for (std::size_t ix = 0; ix < cx; ++ix) {
      if (!g.cell_inside(ix, iy)) {
        continue;
      }
      std::size_t idx[4] = {g.index(ix, iy), g.index(ix + 1, iy), g.index(ix + 1, iy + 1), g.index(ix, iy + 1)};
      // Neighbour across edge e (bottom, right, top, left).
      const long nb[4][2] = {{0, -1}, {1, 0}, {0, 1}, {-1, 0}};
      int turns = 0;
      for (int e = 0; e < 4; ++e) {
        std::size_t a = idx[e];
        std::size_t b = idx[(e + 1) % 4];
        int t = quarter_turns(vr[a], vi[a], vr[b], vi[b], amb);
        turns += t;
        if (!inside(static_cast<long>(ix) + nb[e][0], r + nb[e][1])) {
          boundary += t;
        }
      }
      int winding = turns / 4;
      if (winding != 0) {
        row_hits[iy].push_back(iy * cx + ix);
      }
      total += winding;
    }
    row_total[iy] = total;
    row_boundary[iy] = boundary;
    row_ambiguous[iy] = amb ? 1 : 0;
  });

  singularity_count out{0, {}, 0, 0, false};
  long boundary_turns = 0;
  for (std::size_t iy = 0; iy < cy; ++iy) {
    out.cells.insert(out.cells.end(), row_hits[iy].begin(), row_hits[iy].end());
    out.total_winding += row_total[iy];
    boundary_turns += row_boundary[iy];
    out.ambiguous = out.ambiguous || row_ambiguous[iy] != 0;
  }
  out.count = out.cells.size();
  out.boundary_winding = boundary_turns / 4;
  return out;
}

namespace {

// Fraction of a triangle where a linear function with vertex values f is <= t.
double below_fraction(std::array<double, 3> f, double t) {
  std::sort(f.begin(), f.end());
  if (t <= f[0]) {
    return 0.0;
  }
  if (t >= f[2]) {
    return 1.0;
  }
  if (t <= f[1]) {
    return (t - f[0]) * (t - f[0]) / ((f[1] - f[0]) * (f[2] - f[0]));
  }
  return 1.0 - (f[2] - t) * (f[2] - t) / ((f[2] - f[1]) * (f[2] - f[0]));
}

}  // namespace

epsilon_length_result epsilon_nodal_length(std::span<const double> values, std::span<const double> grad_x,
                                           std::span<const double> grad_y, double eps, const grid_spec& g) {
  if (!(eps > 0.0)) {
    throw std::invalid_argument("epsilon_nodal_length: eps must be positive");
  }
  check_grid(values, g);
  check_grid(grad_x, g);
  check_grid(grad_y, g);
  // Each inside cell is split into two triangles; on each, B is linear and the band area
  // {|B| <= eps} is exact. The gradient norm is averaged over the triangle's vertices.
  const double half_cell = 0.5 * g.h() * g.h();
  double sum = 0.0;
  double max_grad = 0.0;
  for (std::size_t iy = 0; iy + 1 < g.ny(); ++iy) {
    for (std::size_t ix = 0; ix + 1 < g.nx(); ++ix) {
      if (!g.cell_inside(ix, iy)) {
        continue;
      }
      std::size_t c[4] = {g.index(ix, iy), g.index(ix + 1, iy), g.index(ix + 1, iy + 1), g.index(ix, iy + 1)};
      double gn[4];
      for (int k = 0; k < 4; ++k) {
        gn[k] = std::hypot(grad_x[c[k]], grad_y[c[k]]);
        max_grad = std::max(max_grad, gn[k]);
      }
      for (const auto& t : {std::array<int, 3>{0, 1, 2}, std::array<int, 3>{0, 2, 3}}) {
        std::array<double, 3> f{values[c[t[0]]], values[c[t[1]]], values[c[t[2]]]};
        double band = below_fraction(f, eps) - below_fraction(f, -eps);
        if (band > 0.0) {
          sum += half_cell * band * (gn[t[0]] + gn[t[1]] + gn[t[2]]) / 3.0;
        }
      }
    }
  }
  return {sum / (2.0 * eps), eps < 2.0 * g.h() * max_grad};
}

}  // namespace berrywave
