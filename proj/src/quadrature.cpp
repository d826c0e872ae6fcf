#include "berrywave/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace berrywave::quadrature {

namespace {

rule build_legendre(int n) {
  rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) {
        break;
      }
    }
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  return r;
}

// Physicists' Hermite roots by Newton on the orthonormal recurrence, then rescaled.
rule build_hermite(int n) {
  rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double pim4 = std::pow(std::numbers::pi, -0.25);
  double z = 0.0;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * r.nodes[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * r.nodes[1];
    } else {
      z = 2.0 * z - r.nodes[i - 2];
    }
    double pp = 0.0;
    for (int it = 0; it < 200; ++it) {
      double p1 = pim4;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      double dz = p1 / pp;
      z -= dz;
      if (std::fabs(dz) < 1e-15) {
        break;
      }
    }
    r.nodes[i] = z;
    r.nodes[n - 1 - i] = -z;
    r.weights[i] = 2.0 / (pp * pp);
    r.weights[n - 1 - i] = r.weights[i];
  }
  for (int i = 0; i < n; ++i) {
    r.nodes[i] *= std::numbers::sqrt2;
    r.weights[i] /= std::sqrt(std::numbers::pi);
  }
  return r;
}

template <class Builder>
const rule& cached(std::map<int, rule>& cache, std::mutex& mutex, int order, Builder build) {
  if (order < 1) {
    throw std::invalid_argument("quadrature order must be >= 1");
  }
  std::lock_guard lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) {
    it = cache.emplace(order, build(order)).first;
  }
  return it->second;
}

}  // namespace

const rule& gauss_legendre(int order) {
  static std::map<int, rule> cache;
  static std::mutex mutex;
  return cached(cache, mutex, order, build_legendre);
}

rule gauss_legendre(int order, double a, double b) {
  const rule& base = gauss_legendre(order);
  rule r;
  r.nodes.resize(base.size());
  r.weights.resize(base.size());
  double half = 0.5 * (b - a);
  double mid = 0.5 * (b + a);
  for (std::size_t i = 0; i < base.size(); ++i) {
    r.nodes[i] = mid + half * base.nodes[i];
    r.weights[i] = half * base.weights[i];
  }
  return r;
}

const rule& gauss_hermite(int order) {
  static std::map<int, rule> cache;
  static std::mutex mutex;
  return cached(cache, mutex, order, build_hermite);
}

rule composite_gauss_legendre(double a, double b, double max_width, int order) {
  rule out;
  if (!(b > a)) {
    return out;
  }
  auto panels = static_cast<std::size_t>(std::ceil((b - a) / max_width - 1e-9));
  panels = panels == 0 ? 1 : panels;
  const rule& base = gauss_legendre(order);
  out.nodes.reserve(panels * base.size());
  out.weights.reserve(panels * base.size());
  double width = (b - a) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    double lo = a + width * static_cast<double>(p);
    double hi = p + 1 == panels ? b : lo + width;
    double half = 0.5 * (hi - lo);
    double mid = 0.5 * (hi + lo);
    for (std::size_t i = 0; i < base.size(); ++i) {
      out.nodes.push_back(mid + half * base.nodes[i]);
      out.weights.push_back(half * base.weights[i]);
    }
  }
  return out;
}

}  // namespace berrywave::quadrature
