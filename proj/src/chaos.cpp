#include "berrywave/chaos.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "berrywave/errors.hpp"
#include "berrywave/special_fn.hpp"

namespace berrywave {

namespace {

constexpr double pi = std::numbers::pi;

double sinc(double z) {
  if (std::fabs(z) < 1e-4) {
    double z2 = z * z;
    return 1.0 - z2 / 6.0 + z2 * z2 / 120.0;
  }
  return std::sin(z) / z;
}

// Integral over the domain of cos(<omega, x> + c).
double cos_integral(const domain& d, vec2 omega, double c) {
  vec2 m = d.center();
  double phase = c + dot(omega, m);
  if (d.kind() == domain_kind::rectangle) {
    double w = d.width();
    double h = d.height();
    return w * h * sinc(0.5 * omega.x * w) * sinc(0.5 * omega.y * h) * std::cos(phase);
  }
  double r = d.radius();
  double s = norm(omega) * r;
  // 2 pi R J1(|w| R)/|w| = pi R^2 * 2 J1(s)/s
  double jinc = s < 1e-6 ? 1.0 - s * s / 8.0 : 2.0 * bessel_j(bessel_order(1), s) / s;
  return pi * r * r * jinc * std::cos(phase);
}

double h2(double t) { return t * t - 1.0; }
double h4(double t) {
  double t2 = t * t;
  return t2 * t2 - 6.0 * t2 + 3.0;
}

template <class Body>
void for_rows(long rows, execution ex, Body body) {
  if (ex == execution::parallel) {
#pragma omp parallel for schedule(static)
    for (long r = 0; r < rows; ++r) {
      body(r);
    }
  } else {
    for (long r = 0; r < rows; ++r) {
      body(r);
    }
  }
}

// Trapezoid weight of node (ix, iy): h^2/4 per incident inside cell.
double node_weight(const grid_spec& g, std::size_t ix, std::size_t iy) {
  std::size_t cx = g.nx() - 1;
  std::size_t cy = g.ny() - 1;
  int cells = 0;
  if (ix < cx && iy < cy && g.cell_inside(ix, iy)) {
    ++cells;
  }
  if (ix > 0 && iy < cy && g.cell_inside(ix - 1, iy)) {
    ++cells;
  }
  if (ix < cx && iy > 0 && g.cell_inside(ix, iy - 1)) {
    ++cells;
  }
  if (ix > 0 && iy > 0 && g.cell_inside(ix - 1, iy - 1)) {
    ++cells;
  }
  return 0.25 * g.h() * g.h() * cells;
}

void require_gradient(const field_grid& f) {
  if (!f.has_gradient()) {
    throw std::invalid_argument("chaos integrals need gradients on the grid");
  }
}

// Row-parallel weighted sum of N integrands; rows reduced in order.
template <std::size_t N, class Integrand>
std::array<double, N> grid_integrals(const grid_spec& g, execution ex, Integrand integrand) {
  std::vector<std::array<double, N>> rows(g.ny(), std::array<double, N>{});
  for_rows(static_cast<long>(g.ny()), ex, [&](long r) {
    auto iy = static_cast<std::size_t>(r);
    std::array<double, N> acc{};
    std::array<double, N> vals{};
    for (std::size_t ix = 0; ix < g.nx(); ++ix) {
      double w = node_weight(g, ix, iy);
      if (w == 0.0) {
        continue;
      }
      integrand(g.index(ix, iy), vals);
      for (std::size_t q = 0; q < N; ++q) {
        acc[q] += w * vals[q];
      }
    }
    rows[iy] = acc;
  });
  std::array<double, N> total{};
  for (const auto& row : rows) {
    for (std::size_t q = 0; q < N; ++q) {
      total[q] += row[q];
    }
  }
  return total;
}

}  // namespace

double chaos_coeffs::beta(int n) const {
  switch (n) {
    case 0:
      return beta0;
    case 2:
      return beta2;
    case 4:
      return beta4;
    default:
      throw std::out_of_range("beta: only orders 0, 2, 4 are tabulated");
  }
}

double chaos_coeffs::alpha(int n, int m) const {
  if (n == 0 && m == 0) {
    return alpha00;
  }
  if (n == 2 && m == 0) {
    return alpha20;
  }
  if (n == 0 && m == 2) {
    return alpha02;
  }
  if (n == 4 && m == 0) {
    return alpha40;
  }
  if (n == 0 && m == 4) {
    return alpha04;
  }
  if (n == 2 && m == 2) {
    return alpha22;
  }
  throw std::out_of_range("alpha: index pair not tabulated");
}

double chaos_coeffs::gamma_at(int i2, int i3, int j2, int j3) const {
  auto it = gamma.find({i2, i3, j2, j3});
  return it == gamma.end() ? 0.0 : it->second;
}

const chaos_coeffs& coefficients() {
  static const chaos_coeffs table = [] {
    const double s = std::sqrt(2.0 * pi);
    chaos_coeffs c{};
    c.beta0 = 1.0 / s;
    c.beta2 = -1.0 / (2.0 * s);
    c.beta4 = 1.0 / (8.0 * s);
    c.alpha00 = s / 2.0;
    c.alpha20 = c.alpha02 = s / 8.0;
    c.alpha40 = c.alpha04 = -s / 128.0;
    c.alpha22 = -s / 64.0;
    c.gamma = {
        {{0, 0, 0, 0}, 1.0},
        {{2, 0, 0, 0}, 0.25},         {{0, 2, 0, 0}, 0.25},         {{0, 0, 2, 0}, 0.25},
        {{0, 0, 0, 2}, 0.25},         {{1, 1, 1, 1}, -3.0 / 8.0},   {{2, 2, 0, 0}, -1.0 / 32.0},
        {{0, 0, 2, 2}, -1.0 / 32.0},  {{2, 0, 2, 0}, -1.0 / 32.0},  {{0, 2, 0, 2}, -1.0 / 32.0},
        {{2, 0, 0, 2}, 5.0 / 32.0},   {{0, 2, 2, 0}, 5.0 / 32.0},   {{4, 0, 0, 0}, -3.0 / 192.0},
        {{0, 4, 0, 0}, -3.0 / 192.0}, {{0, 0, 4, 0}, -3.0 / 192.0}, {{0, 0, 0, 4}, -3.0 / 192.0},
    };
    return c;
  }();
  return table;
}

double second_chaos_boundary(const wave_sample& w, const std::vector<boundary_node>& nodes) {
  double sum = 0.0;
  for (const boundary_node& n : nodes) {
    field_eval f = eval(w, n.point);
    sum += n.weight * f.value * dot(f.gradient, n.normal);
  }
  return sum / (8.0 * pi * std::sqrt(2.0 * w.energy().E()));
}

double second_chaos_interior_exact(const wave_sample& w, const domain& d) {
  // -2B^2 + |grad~ B|^2 = sum_{j,l} A_j A_l [(c_jl - 1) cos(a_j - a_l) - (1 + c_jl) cos(a_j + a_l)]
  const auto& kc = w.kc();
  const auto& ks = w.ks();
  const auto& ph = w.phases();
  const auto& amp = w.amplitudes();
  const auto& dir = w.directions();
  std::size_t m = w.size();
  std::vector<double> rows(m, 0.0);
#pragma omp parallel for schedule(dynamic, 8)
  for (long jj = 0; jj < static_cast<long>(m); ++jj) {
    auto j = static_cast<std::size_t>(jj);
    double acc = 0.0;
    for (std::size_t l = j; l < m; ++l) {
      double c = std::cos(dir[j] - dir[l]);
      double diff = l == j ? 0.0
                           : (c - 1.0) * cos_integral(d, {kc[j] - kc[l], ks[j] - ks[l]}, ph[j] - ph[l]);
      double sum = -(1.0 + c) * cos_integral(d, {kc[j] + kc[l], ks[j] + ks[l]}, ph[j] + ph[l]);
      double mult = l == j ? 1.0 : 2.0;
      acc += mult * amp[j] * amp[l] * (diff + sum);
    }
    rows[j] = acc;
  }
  double total = 0.0;
  for (double r : rows) {
    total += r;
  }
  return pi * std::sqrt(2.0 * w.energy().E()) / 8.0 * total;
}

double second_chaos_interior_grid(const field_grid& f) {
  require_gradient(f);
  energy_level e(f.energy);
  double inv_lam = 1.0 / e.gradient_variance();
  auto sums = grid_integrals<1>(f.grid, execution::parallel, [&](std::size_t i, std::array<double, 1>& v) {
    double b = f.value[i];
    double gx = f.grad_x[i];
    double gy = f.grad_y[i];
    v[0] = -2.0 * b * b + (gx * gx + gy * gy) * inv_lam;
  });
  return pi * std::sqrt(2.0 * e.E()) / 8.0 * sums[0];
}

second_chaos_forms second_chaos_length(const wave_sample& w, const domain& d, const field_grid* grid,
                                       const std::vector<boundary_node>& nodes) {
  second_chaos_forms out{};
  out.interior_form = second_chaos_interior_exact(w, d);
  out.interior_grid = grid ? second_chaos_interior_grid(*grid) : std::numeric_limits<double>::quiet_NaN();
  out.boundary_form = second_chaos_boundary(w, nodes);
  return out;
}

double second_chaos_count(const complex_wave_sample& c, const std::vector<boundary_node>& nodes) {
  double e = c.re.energy().E();
  return std::sqrt(2.0 * e) * (second_chaos_boundary(c.re, nodes) + second_chaos_boundary(c.im, nodes));
}

namespace {

// H4(B), H4(d1), H4(d2), H2(d1)H2(d2), H2(B)H2(d1), H2(B)H2(d2) at one node.
void a_integrands(double b, double d1, double d2, double* out) {
  double hb = h2(b);
  double h1 = h2(d1);
  double h2v = h2(d2);
  out[0] = h4(b);
  out[1] = h4(d1);
  out[2] = h4(d2);
  out[3] = h1 * h2v;
  out[4] = hb * h1;
  out[5] = hb * h2v;
}

double l4_combination(const fourth_chaos_terms_l& t) {
  double s = 0.0;
  for (std::size_t i = 0; i < 6; ++i) {
    s += l4_weights[i] * t.a[i];
  }
  return s;
}

}  // namespace

fourth_chaos_terms_l fourth_chaos_terms(const field_grid& f, execution ex) {
  require_gradient(f);
  double inv_sd = 1.0 / std::sqrt(energy_level(f.energy).gradient_variance());
  auto sums = grid_integrals<6>(f.grid, ex, [&](std::size_t i, std::array<double, 6>& v) {
    a_integrands(f.value[i], f.grad_x[i] * inv_sd, f.grad_y[i] * inv_sd, v.data());
  });
  fourth_chaos_terms_l t{};
  t.a = sums;
  return t;
}

fourth_chaos_length_result fourth_chaos_length(const field_grid& f, execution ex) {
  fourth_chaos_length_result out{};
  out.terms = fourth_chaos_terms(f, ex);
  double lam = energy_level(f.energy).gradient_variance();
  out.value = std::sqrt(lam) / 128.0 * l4_combination(out.terms);
  return out;
}

fourth_chaos_count_result fourth_chaos_count(const field_grid& re, const field_grid& im, execution ex) {
  require_gradient(re);
  require_gradient(im);
  if (re.grid.node_count() != im.grid.node_count() || re.energy != im.energy) {
    throw std::invalid_argument("fourth_chaos_count: fields differ in grid or energy");
  }
  double e = re.energy;
  double inv_sd = 1.0 / std::sqrt(energy_level(e).gradient_variance());
  // 6 a-terms of re, 6 of im, 10 b-terms.
  auto sums = grid_integrals<22>(re.grid, ex, [&](std::size_t i, std::array<double, 22>& v) {
    double b = re.value[i];
    double b1 = re.grad_x[i] * inv_sd;
    double b2 = re.grad_y[i] * inv_sd;
    double c = im.value[i];
    double c1 = im.grad_x[i] * inv_sd;
    double c2 = im.grad_y[i] * inv_sd;
    a_integrands(b, b1, b2, v.data());
    a_integrands(c, c1, c2, v.data() + 6);
    double hb = h2(b), hb1 = h2(b1), hb2 = h2(b2);
    double hc = h2(c), hc1 = h2(c1), hc2 = h2(c2);
    double* q = v.data() + 12;
    q[0] = hb * hc;
    q[1] = hb * hc1;
    q[2] = hb * hc2;
    q[3] = hb1 * hc;
    q[4] = hb2 * hc;
    q[5] = hb1 * hc1;
    q[6] = hb2 * hc2;
    q[7] = hb1 * hc2;
    q[8] = hb2 * hc1;
    q[9] = b1 * b2 * c1 * c2;
  });
  fourth_chaos_count_result out{};
  for (std::size_t i = 0; i < 6; ++i) {
    out.re_terms.a[i] = sums[i];
    out.im_terms.a[i] = sums[6 + i];
  }
  for (std::size_t j = 0; j < 10; ++j) {
    out.b[j] = sums[12 + j];
  }
  double pref = pi * e / 64.0;
  out.a_e = pref * l4_combination(out.re_terms);
  out.a_hat_e = pref * l4_combination(out.im_terms);
  double bs = 0.0;
  for (std::size_t j = 0; j < 10; ++j) {
    bs += b_weights[j] * out.b[j];
  }
  out.b_e = pi * e / 8.0 * bs;
  out.value = out.a_e + out.a_hat_e + out.b_e;
  return out;
}

double residual_variance(std::span<const double> total, std::span<const double> second,
                         std::span<const double> fourth) {
  if (total.size() != second.size() || total.size() != fourth.size()) {
    throw std::invalid_argument("residual_variance: samples differ in length");
  }
  if (total.size() < 100) {
    throw sample_size_error("residual_variance: need at least 100 paired samples");
  }
  std::size_t n = total.size();
  std::vector<double> r(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = total[i] - second[i] - fourth[i];
    mean += r[i];
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : r) {
    ss += (x - mean) * (x - mean);
  }
  return ss / static_cast<double>(n - 1);
}

}  // namespace berrywave
