#pragma once

#include <cstddef>
#include <span>

namespace berrywave {

struct summary_stats {
  std::size_t n;
  double mean;
  double variance;     // unbiased
  double se_mean;      // jackknife (equals s/sqrt(n))
  double se_variance;  // jackknife; NaN below 3 samples
  double skewness;
  double excess_kurtosis;
  double ks;  // KS distance of the standardized sample to N(0, 1)
};

// n >= 2; skewness, kurtosis and KS are NaN when the sample SD is zero.
summary_stats summarize(std::span<const double> x);

// Leave-one-out jackknife SE of the unbiased variance, O(n).
double jackknife_variance_se(std::span<const double> x);

// Sup distance between the empirical CDF of (x - mean)/sd and the standard normal CDF.
// The parameters are fitted, so the usual KS null distribution does not apply (Lilliefors).
double ks_normal_distance(std::span<const double> x);

double normal_cdf(double z);

struct clt_bands {
  double skewness = 0.25;
  double excess_kurtosis = 0.5;
  double ks = 0.06;
};

struct clt_result {
  summary_stats stats;
  clt_bands bands;
  bool skewness_ok;
  bool kurtosis_ok;
  bool ks_ok;

  bool pass() const { return skewness_ok && kurtosis_ok && ks_ok; }
};

inline constexpr std::size_t clt_min_samples = 200;

// Throws sample_size_error below 200 samples and degenerate_error for a constant sample.
clt_result clt_diagnostics(std::span<const double> x, const clt_bands& bands = {});

// (a - b) over the combined standard error of two independent estimates.
double two_sample_z(double a, double se_a, double b, double se_b);

}  // namespace berrywave
