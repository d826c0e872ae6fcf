#include "berrywave/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "berrywave/errors.hpp"

namespace berrywave {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

double mean_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) {
    s += v;
  }
  return s / static_cast<double>(x.size());
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double jackknife_variance_se(std::span<const double> x) {
  std::size_t n = x.size();
  if (n < 3) {
    return nan;
  }
  double m = mean_of(x);
  double ss = 0.0;
  for (double v : x) {
    ss += (v - m) * (v - m);
  }
  auto nd = static_cast<double>(n);
  // Removing x_i lowers the centered sum of squares by n/(n-1) (x_i - m)^2.
  std::vector<double> loo(n);
  double loo_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = x[i] - m;
    loo[i] = (ss - nd / (nd - 1.0) * d * d) / (nd - 2.0);
    loo_mean += loo[i];
  }
  loo_mean /= nd;
  double acc = 0.0;
  for (double v : loo) {
    acc += (v - loo_mean) * (v - loo_mean);
  }
  return std::sqrt((nd - 1.0) / nd * acc);
}

double ks_normal_distance(std::span<const double> x) {
  std::size_t n = x.size();
  if (n < 2) {
    throw sample_size_error("ks_normal_distance: need at least 2 samples");
  }
  double m = mean_of(x);
  double ss = 0.0;
  for (double v : x) {
    ss += (v - m) * (v - m);
  }
  double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) {
    return nan;
  }
  std::vector<double> z(x.begin(), x.end());
  std::sort(z.begin(), z.end());
  auto nd = static_cast<double>(n);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double f = normal_cdf((z[i] - m) / sd);
    d = std::max({d, f - static_cast<double>(i) / nd, static_cast<double>(i + 1) / nd - f});
  }
  return std::clamp(d, 0.0, 1.0);
}

summary_stats summarize(std::span<const double> x) {
  std::size_t n = x.size();
  if (n < 2) {
    throw sample_size_error("summarize: need at least 2 samples");
  }
  auto nd = static_cast<double>(n);
  double m = mean_of(x);
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (double v : x) {
    double d = v - m;
    double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  double var = m2 / (nd - 1.0);
  m2 /= nd;
  m3 /= nd;
  m4 /= nd;
  summary_stats s{};
  s.n = n;
  s.mean = m;
  s.variance = var;
  s.se_mean = std::sqrt(var / nd);
  s.se_variance = jackknife_variance_se(x);
  if (m2 > 0.0) {
    s.skewness = m3 / std::pow(m2, 1.5);
    s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    s.ks = ks_normal_distance(x);
  } else {
    s.skewness = s.excess_kurtosis = s.ks = nan;
  }
  return s;
}

clt_result clt_diagnostics(std::span<const double> x, const clt_bands& bands) {
  if (x.size() < clt_min_samples) {
    throw sample_size_error("clt_diagnostics: need at least 200 samples");
  }
  summary_stats s = summarize(x);
  if (!(s.variance > 0.0)) {
    throw degenerate_error("clt_diagnostics: sample standard deviation is zero");
  }
  return {s, bands, std::fabs(s.skewness) <= bands.skewness, std::fabs(s.excess_kurtosis) <= bands.excess_kurtosis,
          s.ks <= bands.ks};
}

double two_sample_z(double a, double se_a, double b, double se_b) {
  double se = std::hypot(se_a, se_b);
  if (!(se > 0.0)) {
    return a == b ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return (a - b) / se;
}

}  // namespace berrywave
