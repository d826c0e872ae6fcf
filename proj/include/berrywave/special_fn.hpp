#pragma once

namespace berrywave {

// Below this argument the power series is used, above it the Hankel expansion.
inline constexpr double bessel_crossover = 18.0;
inline constexpr int hankel_terms = 14;

class bessel_order {
 public:
  explicit bessel_order(int order);

  int value() const noexcept { return order_; }

 private:
  int order_;
};

class hermite_degree {
 public:
  static constexpr int default_max = 8;

  explicit hermite_degree(int degree, int max_degree = default_max);

  int value() const noexcept { return degree_; }

 private:
  int degree_;
};

struct bessel_values {
  double j0;
  double j1;
  double j2;
};

double bessel_j(bessel_order order, double x);

// J0, J1, J2 at one argument; shares the trig evaluation on the asymptotic branch.
bessel_values bessel_j012(double x);

// sqrt(2/(pi x)) cos(x - (2 order + 1) pi/4).
double bessel_envelope(bessel_order order, double x);

double hermite(hermite_degree degree, double t);

// Unchecked degree, for inner loops.
inline double hermite(int n, double t) {
  if (n == 0) {
    return 1.0;
  }
  double prev = 1.0;
  double cur = t;
  for (int i = 1; i < n; ++i) {
    double next = t * cur - i * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

}  // namespace berrywave
