#include "berrywave/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "berrywave/errors.hpp"
#include "berrywave/rng.hpp"

namespace berrywave {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
  a = std::fmod(a, two_pi);
  return a < 0.0 ? a + two_pi : a;
}

void check_budget(const grid_spec& g, std::size_t budget) {
  if (g.node_count() > budget) {
    throw budget_error("eval_grid: " + std::to_string(g.node_count()) + " nodes exceed the budget of " +
                       std::to_string(budget));
  }
}

constexpr std::size_t tile_cols = 128;
constexpr std::size_t tile_rows = 4;

// Per-wave separable tables: amp cos/sin of the x-phase and cos/sin of the y-phase.
struct wave_tables {
  std::vector<double> pa;  // [j * nx + ix]
  std::vector<double> qa;
  std::vector<double> cb;  // [j * ny + iy]
  std::vector<double> sb;
};

wave_tables build_tables(const wave_sample& w, const grid_spec& g) {
  std::size_t m = w.size();
  std::size_t nx = g.nx();
  std::size_t ny = g.ny();
  wave_tables t;
  t.pa.resize(m * nx);
  t.qa.resize(m * nx);
  t.cb.resize(m * ny);
  t.sb.resize(m * ny);
  const auto& kc = w.kc();
  const auto& ks = w.ks();
  const auto& ph = w.phases();
  const auto& amp = w.amplitudes();
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      double a = kc[j] * g.x(ix) + ph[j];
      t.pa[j * nx + ix] = amp[j] * std::cos(a);
      t.qa[j * nx + ix] = amp[j] * std::sin(a);
    }
    for (std::size_t iy = 0; iy < ny; ++iy) {
      double b = ks[j] * g.y(iy);
      t.cb[j * ny + iy] = std::cos(b);
      t.sb[j * ny + iy] = std::sin(b);
    }
  }
  return t;
}

// One block of up to tile_rows rows and tile_cols columns; same per-node operation order as eval().
void accumulate_block(const wave_sample& w, const wave_tables& t, const grid_spec& g, std::size_t row0,
                      std::size_t rows, std::size_t col0, std::size_t cols, bool with_gradient, field_grid& out) {
  double v[tile_rows][tile_cols] = {};
  double gx[tile_rows][tile_cols] = {};
  double gy[tile_rows][tile_cols] = {};
  std::size_t nx = g.nx();
  std::size_t ny = g.ny();
  const auto& kc = w.kc();
  const auto& ks = w.ks();
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double* pa = t.pa.data() + j * nx + col0;
    const double* qa = t.qa.data() + j * nx + col0;
    double kcj = kc[j];
    double ksj = ks[j];
    for (std::size_t r = 0; r < rows; ++r) {
      double cbv = t.cb[j * ny + row0 + r];
      double sbv = t.sb[j * ny + row0 + r];
      double* vr = v[r];
      if (with_gradient) {
        double* gxr = gx[r];
        double* gyr = gy[r];
        for (std::size_t c = 0; c < cols; ++c) {
          double val = pa[c] * cbv - qa[c] * sbv;
          double sn = qa[c] * cbv + pa[c] * sbv;
          vr[c] += val;
          gxr[c] += kcj * sn;
          gyr[c] += ksj * sn;
        }
      } else {
        for (std::size_t c = 0; c < cols; ++c) {
          vr[c] += pa[c] * cbv - qa[c] * sbv;
        }
      }
    }
  }
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t base = (row0 + r) * nx + col0;
    for (std::size_t c = 0; c < cols; ++c) {
      out.value[base + c] = v[r][c];
      if (with_gradient) {
        out.grad_x[base + c] = -gx[r][c];
        out.grad_y[base + c] = -gy[r][c];
      }
    }
  }
}

field_grid allocate(const grid_spec& g, double energy, bool with_gradient) {
  field_grid out{g, energy, {}, {}, {}};
  out.value.assign(g.node_count(), 0.0);
  if (with_gradient) {
    out.grad_x.assign(g.node_count(), 0.0);
    out.grad_y.assign(g.node_count(), 0.0);
  }
  return out;
}

}  // namespace

wave_sample::wave_sample(energy_level e, std::vector<double> directions, std::vector<double> phases,
                         std::vector<double> amplitudes)
    : energy_(e),
      directions_(std::move(directions)),
      phases_(std::move(phases)),
      amplitudes_(std::move(amplitudes)) {
  if (directions_.empty()) {
    throw std::invalid_argument("wave_sample: need at least one wave");
  }
  if (phases_.size() != directions_.size() || amplitudes_.size() != directions_.size()) {
    throw std::invalid_argument("wave_sample: directions, phases and amplitudes differ in length");
  }
  kc_.resize(size());
  ks_.resize(size());
  for (std::size_t j = 0; j < size(); ++j) {
    if (!(directions_[j] >= 0.0 && directions_[j] <= two_pi) || !(phases_[j] >= 0.0 && phases_[j] <= two_pi)) {
      throw std::invalid_argument("wave_sample: angles must lie in [0, 2 pi]");
    }
    if (!std::isfinite(amplitudes_[j])) {
      throw std::invalid_argument("wave_sample: amplitudes must be finite");
    }
    kc_[j] = energy_.k() * std::cos(directions_[j]);
    ks_[j] = energy_.k() * std::sin(directions_[j]);
  }
}

wave_sample wave_sample::rotated(double angle) const {
  std::vector<double> dirs(directions_);
  for (double& d : dirs) {
    d = wrap_angle(d + angle);
  }
  return wave_sample(energy_, std::move(dirs), phases_, amplitudes_);
}

wave_sample sample_wave(energy_level e, std::size_t J, std::uint64_t seed, std::uint32_t replication,
                        std::uint32_t field) {
  if (J < 1) {
    throw std::invalid_argument("sample_wave: J must be >= 1");
  }
  counter_stream s(seed, replication, field, tag_of(e.E()));
  std::vector<double> dirs(J);
  std::vector<double> phases(J);
  std::vector<double> amps(J, std::sqrt(2.0 / static_cast<double>(J)));
  for (std::size_t j = 0; j < J; ++j) {
    auto i = static_cast<std::uint32_t>(j);
    dirs[j] = two_pi * s.uniform(i, 0);
    phases[j] = two_pi * s.uniform(i, 1);
  }
  return wave_sample(e, std::move(dirs), std::move(phases), std::move(amps));
}

wave_sample sample_gaussian_wave(energy_level e, std::size_t M, std::uint64_t seed, std::uint32_t replication,
                                 std::uint32_t field) {
  if (M < 1) {
    throw std::invalid_argument("sample_gaussian_wave: M must be >= 1");
  }
  // Tag differs from the i.i.d. sampler so the two never share draws.
  counter_stream s(seed, replication, field, tag_of(e.E()) ^ 0x5a5a5a5au);
  double offset = s.uniform(0, 0);
  double scale = 1.0 / static_cast<double>(M);
  std::vector<double> dirs(M);
  std::vector<double> phases(M);
  std::vector<double> amps(M);
  for (std::size_t m = 0; m < M; ++m) {
    auto i = static_cast<std::uint32_t>(m + 1);
    dirs[m] = std::numbers::pi * (static_cast<double>(m) + offset) * scale;
    amps[m] = std::sqrt(-2.0 * std::log(s.uniform_open0(i, 0)) * scale);
    phases[m] = two_pi * s.uniform(i, 1);
  }
  return wave_sample(e, std::move(dirs), std::move(phases), std::move(amps));
}

std::size_t gaussian_directions_for(const energy_level& e, const domain& d, std::size_t at_least) {
  double x = e.k() * d.diameter();
  double order = x + 10.0 * std::cbrt(x) + 20.0;
  auto m = static_cast<std::size_t>(std::ceil(order / 2.0));
  m = (m + 7) / 8 * 8;
  return std::max(m, at_least);
}

field_eval eval(const wave_sample& w, vec2 x) {
  const auto& kc = w.kc();
  const auto& ks = w.ks();
  const auto& ph = w.phases();
  const auto& amp = w.amplitudes();
  double v = 0.0;
  double gx = 0.0;
  double gy = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    double a = kc[j] * x.x + ph[j];
    double b = ks[j] * x.y;
    double pa = amp[j] * std::cos(a);
    double qa = amp[j] * std::sin(a);
    double cbv = std::cos(b);
    double sbv = std::sin(b);
    double val = pa * cbv - qa * sbv;
    double sn = qa * cbv + pa * sbv;
    v += val;
    gx += kc[j] * sn;
    gy += ks[j] * sn;
  }
  return {v, {-gx, -gy}};
}

double eval_value(const wave_sample& w, vec2 x) {
  const auto& kc = w.kc();
  const auto& ks = w.ks();
  const auto& ph = w.phases();
  const auto& amp = w.amplitudes();
  double v = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    double a = kc[j] * x.x + ph[j];
    double b = ks[j] * x.y;
    double pa = amp[j] * std::cos(a);
    double qa = amp[j] * std::sin(a);
    v += pa * std::cos(b) - qa * std::sin(b);
  }
  return v;
}

field_grid eval_grid(const wave_sample& w, const grid_spec& g, bool with_gradient, execution ex,
                     std::size_t node_budget) {
  check_budget(g, node_budget);
  field_grid out = allocate(g, w.energy().E(), with_gradient);
  wave_tables t = build_tables(w, g);
  std::size_t nx = g.nx();
  std::size_t ny = g.ny();
  auto blocks = static_cast<long>((ny + tile_rows - 1) / tile_rows);
  auto body = [&](long b) {
    std::size_t row0 = static_cast<std::size_t>(b) * tile_rows;
    std::size_t rows = std::min(tile_rows, ny - row0);
    for (std::size_t col0 = 0; col0 < nx; col0 += tile_cols) {
      accumulate_block(w, t, g, row0, rows, col0, std::min(tile_cols, nx - col0), with_gradient, out);
    }
  };
  if (ex == execution::parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (long b = 0; b < blocks; ++b) {
      body(b);
    }
  } else {
    for (long b = 0; b < blocks; ++b) {
      body(b);
    }
  }
  return out;
}

field_grid eval_grid_serial(const wave_sample& w, const grid_spec& g, bool with_gradient, std::size_t node_budget) {
  check_budget(g, node_budget);
  field_grid out = allocate(g, w.energy().E(), with_gradient);
  for (std::size_t iy = 0; iy < g.ny(); ++iy) {
    for (std::size_t ix = 0; ix < g.nx(); ++ix) {
      std::size_t i = g.index(ix, iy);
      if (with_gradient) {
        field_eval f = eval(w, g.node(ix, iy));
        out.value[i] = f.value;
        out.grad_x[i] = f.gradient.x;
        out.grad_y[i] = f.gradient.y;
      } else {
        out.value[i] = eval_value(w, g.node(ix, iy));
      }
    }
  }
  return out;
}

std::vector<lag_covariance> empirical_covariance(energy_level e, std::size_t J, std::size_t n_samples,
                                                 const std::vector<vec2>& lags, std::uint64_t seed) {
  if (n_samples < 30) {
    throw sample_size_error("empirical_covariance: need at least 30 samples");
  }
  std::vector<lag_covariance> out;
  std::vector<std::vector<double>> products(lags.size(), std::vector<double>(n_samples));
  for (std::size_t s = 0; s < n_samples; ++s) {
    wave_sample w = sample_wave(e, J, seed, static_cast<std::uint32_t>(s));
    double at0 = eval_value(w, {0.0, 0.0});
    for (std::size_t l = 0; l < lags.size(); ++l) {
      products[l][s] = at0 * eval_value(w, lags[l]);
    }
  }
  auto n = static_cast<double>(n_samples);
  for (std::size_t l = 0; l < lags.size(); ++l) {
    double mean = 0.0;
    for (double p : products[l]) {
      mean += p;
    }
    mean /= n;
    double ss = 0.0;
    for (double p : products[l]) {
      ss += (p - mean) * (p - mean);
    }
    // Jackknife SE of a mean equals the usual s / sqrt(n).
    double se = std::sqrt(ss / (n - 1.0) / n);
    out.push_back({lags[l], mean, se});
  }
  return out;
}

}  // namespace berrywave
