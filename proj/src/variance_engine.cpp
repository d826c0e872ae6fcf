#include "berrywave/variance_engine.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "berrywave/errors.hpp"
#include "berrywave/quadrature.hpp"
#include "berrywave/special_fn.hpp"

namespace berrywave {

namespace {

using std::numbers::pi;

void check_index(int i, int j) {
  if (i < 0 || i > 2 || j < 0 || j > 2) {
    throw std::invalid_argument("covariance indices must be in 0..2");
  }
}

// r~_{i,j} with (i,j) in {(0,1),(0,2),(1,0),(2,0)} has a sine-type radial part.
bool sine_type(int i, int j) { return (i == 0) != (j == 0); }

// Exponents of cos(theta) and sin(theta) contributed by one factor, and its constant.
struct trig_factor {
  double coef;
  int cos_power;
  int sin_power;
};

trig_factor trig_of(int i, int j) {
  constexpr double r2 = std::numbers::sqrt2;
  if (i == 0 && j == 0) {
    return {1.0 / pi, 0, 0};
  }
  if (i == 0 || j == 0) {
    int axis = i + j;
    double sign = i == 0 ? 1.0 : -1.0;
    return {sign * r2 / pi, axis == 1 ? 1 : 0, axis == 2 ? 1 : 0};
  }
  if (i == 1 && j == 1) {
    return {2.0 / pi, 2, 0};
  }
  if (i == 2 && j == 2) {
    return {2.0 / pi, 0, 2};
  }
  return {2.0 / pi, 1, 1};
}

double double_factorial(int n) {
  double out = 1.0;
  for (int m = n; m > 1; m -= 2) {
    out *= m;
  }
  return out;
}

// (1/2pi) integral over a period of cos^a sin^b.
double trig_mean(int a, int b) {
  if (a % 2 != 0 || b % 2 != 0) {
    return 0.0;
  }
  return double_factorial(a - 1) * double_factorial(b - 1) / double_factorial(a + b);
}

double factorial(int n) {
  double out = 1.0;
  for (int m = 2; m <= n; ++m) {
    out *= m;
  }
  return out;
}

void fill_block(const bessel_values& b, double c, double s, double r[3][3]) {
  constexpr double r2 = std::numbers::sqrt2;
  r[0][0] = b.j0;
  r[0][1] = r2 * c * b.j1;
  r[0][2] = r2 * s * b.j1;
  r[1][0] = -r[0][1];
  r[2][0] = -r[0][2];
  r[1][1] = b.j0 + (1.0 - 2.0 * c * c) * b.j2;
  r[2][2] = b.j0 + (1.0 - 2.0 * s * s) * b.j2;
  r[1][2] = -2.0 * c * s * b.j2;
  r[2][1] = r[1][2];
}

struct compact_q {
  std::vector<std::array<int, 3>> factors;  // (i, j, power)
  int max_power = 0;
};

compact_q compact(const q_exponent& q) {
  compact_q out;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (q(i, j) < 0) {
        throw std::invalid_argument("q exponents must be nonnegative");
      }
      if (q(i, j) > 0) {
        out.factors.push_back({i, j, q(i, j)});
        out.max_power = std::max(out.max_power, q(i, j));
      }
    }
  }
  return out;
}

// Which weight function multiplies the kernel product on the circle of radius rho.
enum class weight_mode { covariogram, constant_area };

struct angular_node {
  double c;
  double s;
  double weight;  // d-theta weight times the covariogram value
};

// Angular nodes on the circle of radius rho carrying the covariogram.
void angular_nodes(const domain& d, double rho, weight_mode mode, std::vector<angular_node>& out) {
  out.clear();
  if (mode == weight_mode::constant_area || d.kind() == domain_kind::disk) {
    constexpr int n = 32;
    double g = mode == weight_mode::constant_area ? d.area() : d.covariogram({rho, 0.0});
    if (g <= 0.0) {
      return;
    }
    for (int m = 0; m < n; ++m) {
      double t = 2.0 * pi * m / n;
      out.push_back({std::cos(t), std::sin(t), 2.0 * pi / n * g});
    }
    return;
  }
  constexpr int order = 48;
  for (int quad = 0; quad < 4; ++quad) {
    // In odd quadrants |cos| and |sin| trade places, so the side lengths swap.
    double wa = quad % 2 == 0 ? d.width() : d.height();
    double wb = quad % 2 == 0 ? d.height() : d.width();
    double lo = rho > wa ? std::acos(wa / rho) : 0.0;
    double hi = rho > wb ? std::asin(wb / rho) : 0.5 * pi;
    if (!(hi > lo)) {
      continue;
    }
    auto rule = quadrature::gauss_legendre(order, lo, hi);
    for (std::size_t m = 0; m < rule.size(); ++m) {
      double t = rule.nodes[m];
      double g = (wa - rho * std::cos(t)) * (wb - rho * std::sin(t));
      double phi = t + 0.5 * pi * quad;
      out.push_back({std::cos(phi), std::sin(phi), rule.weights[m] * g});
    }
  }
}

std::vector<double> radial_breaks(const domain& d, weight_mode mode) {
  double diam = d.diameter();
  std::vector<double> b{0.0, diam};
  if (mode == weight_mode::covariogram && d.kind() == domain_kind::rectangle) {
    for (double side : {d.width(), d.height()}) {
      if (side < diam) {
        b.push_back(side);
      }
    }
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

// Integrals over D x D (or the area-weighted disk) of every monomial, one radial order.
std::vector<double> integrate(std::span<const compact_q> qs, const energy_level& e, const domain& d,
                              weight_mode mode, double panel_width, int order) {
  auto breaks = radial_breaks(d, mode);
  quadrature::rule radial;
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    auto r = quadrature::composite_gauss_legendre(breaks[s], breaks[s + 1], panel_width, order);
    radial.nodes.insert(radial.nodes.end(), r.nodes.begin(), r.nodes.end());
    radial.weights.insert(radial.weights.end(), r.weights.begin(), r.weights.end());
  }
  int max_power = 0;
  for (const auto& q : qs) {
    max_power = std::max(max_power, q.max_power);
  }
  const std::size_t nq = qs.size();
  const long nr = static_cast<long>(radial.size());
  std::vector<double> partial(static_cast<std::size_t>(nr) * nq, 0.0);

#pragma omp parallel
  {
    std::vector<angular_node> nodes;
    std::vector<double> pw(9 * static_cast<std::size_t>(max_power + 1));
#pragma omp for schedule(dynamic, 16)
    for (long ir = 0; ir < nr; ++ir) {
      double rho = radial.nodes[static_cast<std::size_t>(ir)];
      double wr = radial.weights[static_cast<std::size_t>(ir)] * rho;
      angular_nodes(d, rho, mode, nodes);
      if (nodes.empty()) {
        continue;
      }
      auto b = bessel_j012(e.k() * rho);
      double* out = &partial[static_cast<std::size_t>(ir) * nq];
      for (const auto& node : nodes) {
        double r[3][3];
        fill_block(b, node.c, node.s, r);
        for (int i = 0; i < 3; ++i) {
          for (int j = 0; j < 3; ++j) {
            double* p = &pw[static_cast<std::size_t>(3 * i + j) * (max_power + 1)];
            p[0] = 1.0;
            for (int m = 1; m <= max_power; ++m) {
              p[m] = p[m - 1] * r[i][j];
            }
          }
        }
        for (std::size_t iq = 0; iq < nq; ++iq) {
          double prod = node.weight;
          for (const auto& f : qs[iq].factors) {
            prod *= pw[static_cast<std::size_t>(3 * f[0] + f[1]) * (max_power + 1) + f[2]];
          }
          out[iq] += prod;
        }
      }
      for (std::size_t iq = 0; iq < nq; ++iq) {
        out[iq] *= wr;
      }
    }
  }

  std::vector<double> total(nq, 0.0);
  for (long ir = 0; ir < nr; ++ir) {
    for (std::size_t iq = 0; iq < nq; ++iq) {
      total[iq] += partial[static_cast<std::size_t>(ir) * nq + iq];
    }
  }
  return total;
}

std::vector<moment_prediction> adaptive(std::span<const q_exponent> qs, const energy_level& e, const domain& d,
                                        weight_mode mode) {
  std::vector<compact_q> cq;
  cq.reserve(qs.size());
  for (const auto& q : qs) {
    int t = q.total();
    if (t != 4 && t != 6) {
      throw std::invalid_argument("covariance_integral: total exponent must be 4 or 6");
    }
    cq.push_back(compact(q));
  }
  double E = e.E();
  double diam = d.diameter();
  // Natural size of these integrals: area/pi^3 log E/E.
  double scale = d.area() * std::max(1.0, std::log(E * diam * diam)) / (std::pow(pi, 3) * E);
  double width = 1.0 / (8.0 * std::sqrt(E));
  for (int attempt = 0; attempt <= max_panel_halvings; ++attempt) {
    auto fine = integrate(cq, e, d, mode, width, 12);
    auto coarse = integrate(cq, e, d, mode, width, 8);
    bool ok = true;
    std::vector<moment_prediction> out(qs.size());
    for (std::size_t i = 0; i < qs.size(); ++i) {
      double err = std::fabs(fine[i] - coarse[i]);
      out[i] = {qs[i].total() == 4 ? leading_constant(qs[i]) : 0.0, fine[i], err};
      if (err > moment_tolerance * std::max(std::fabs(fine[i]), scale)) {
        ok = false;
      }
    }
    if (ok) {
      return out;
    }
    width *= 0.5;
  }
  throw budget_error("covariance_integral: tolerance not met within the panel limit");
}

void enumerate(const std::vector<std::pair<int, int>>& rows, const std::vector<std::pair<int, int>>& cols,
               std::size_t a, std::vector<int>& col_left, q_exponent& q, double denom,
               std::map<q_exponent, double>& acc, double numer) {
  if (a == rows.size()) {
    for (int left : col_left) {
      if (left != 0) {
        return;
      }
    }
    acc[q] += numer / denom;
    return;
  }
  auto [va, da] = rows[a];
  // Distribute degree da over the columns of the same field, column by column.
  auto place = [&](auto&& self, std::size_t b, int left, double den) -> void {
    if (b == cols.size()) {
      if (left == 0) {
        enumerate(rows, cols, a + 1, col_left, q, den, acc, numer);
      }
      return;
    }
    int vb = cols[b].first;
    if (va / 3 != vb / 3) {
      self(self, b + 1, left, den);
      return;
    }
    int top = std::min(left, col_left[b]);
    for (int c = 0; c <= top; ++c) {
      col_left[b] -= c;
      q(va % 3, vb % 3) += c;
      self(self, b + 1, left - c, den * factorial(c));
      q(va % 3, vb % 3) -= c;
      col_left[b] += c;
    }
  };
  place(place, 0, da, denom);
}

chaos_monomial mono(std::initializer_list<std::pair<int, int>> f) { return chaos_monomial{f}; }

}  // namespace

q_exponent::q_exponent(std::initializer_list<std::array<int, 3>> entries) {
  for (const auto& e : entries) {
    check_index(e[0], e[1]);
    if (e[2] < 0) {
      throw std::invalid_argument("q exponents must be nonnegative");
    }
    q[e[0]][e[1]] += e[2];
  }
}

int q_exponent::total() const {
  int t = 0;
  for (const auto& row : q) {
    for (int v : row) {
      t += v;
    }
  }
  return t;
}

double angular_factor(int i, int j, double theta) {
  check_index(i, j);
  auto f = trig_of(i, j);
  return f.coef * std::pow(std::cos(theta), f.cos_power) * std::pow(std::sin(theta), f.sin_power);
}

double radial_factor(int i, int j, double psi) {
  check_index(i, j);
  double phase = 2.0 * pi * psi - 0.25 * pi;
  return (sine_type(i, j) ? std::sin(phase) : std::cos(phase)) / std::sqrt(psi);
}

double angular_moment(const q_exponent& q) {
  constexpr int n = 32;
  auto cq = compact(q);
  double sum = 0.0;
  for (int m = 0; m < n; ++m) {
    double t = 2.0 * pi * m / n;
    double prod = 1.0;
    for (const auto& f : cq.factors) {
      prod *= std::pow(angular_factor(f[0], f[1], t), f[2]);
    }
    sum += prod;
  }
  return sum * 2.0 * pi / n;
}

double angular_moment_closed_form(const q_exponent& q) {
  double coef = 1.0;
  int a = 0;
  int b = 0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (q(i, j) == 0) {
        continue;
      }
      auto f = trig_of(i, j);
      coef *= std::pow(f.coef, q(i, j));
      a += f.cos_power * q(i, j);
      b += f.sin_power * q(i, j);
    }
  }
  return coef * 2.0 * pi * trig_mean(a, b);
}

radial_moment_result radial_moment(const q_exponent& q, double upper) {
  if (!(upper > 1.0)) {
    throw std::invalid_argument("radial_moment: upper limit must exceed 1");
  }
  if (q.total() != 4) {
    throw std::invalid_argument("radial_moment: total exponent must be 4");
  }
  auto cq = compact(q);
  int cos_count = 0;
  int sin_count = 0;
  for (const auto& f : cq.factors) {
    (sine_type(f[0], f[1]) ? sin_count : cos_count) += f[2];
  }
  auto rule = quadrature::composite_gauss_legendre(1.0, upper, 1.0 / 16.0, 10);
  double sum = 0.0;
  for (std::size_t m = 0; m < rule.size(); ++m) {
    double psi = rule.nodes[m];
    double prod = psi;
    for (const auto& f : cq.factors) {
      prod *= std::pow(radial_factor(f[0], f[1], psi), f[2]);
    }
    sum += rule.weights[m] * prod;
  }
  return {sum, trig_mean(cos_count, sin_count)};
}

double leading_constant(const q_exponent& q) {
  if (q.total() != 4) {
    throw std::invalid_argument("leading_constant: total exponent must be 4");
  }
  int cos_count = 0;
  int sin_count = 0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      (sine_type(i, j) ? sin_count : cos_count) += q(i, j);
    }
  }
  // area integral of phi dphi over radius diam/sqrt(E) .. gives (1/2) log E/E times the period mean.
  return std::pow(pi, 3) * angular_moment_closed_form(q) * trig_mean(cos_count, sin_count) / 2.0;
}

moment_prediction covariance_integral(const q_exponent& q, const energy_level& e, const domain& d) {
  return covariance_integrals(std::span<const q_exponent>(&q, 1), e, d).front();
}

std::vector<moment_prediction> covariance_integrals(std::span<const q_exponent> qs, const energy_level& e,
                                                    const domain& d) {
  return adaptive(qs, e, d, weight_mode::covariogram);
}

double radial_reduction(const q_exponent& q, const energy_level& e, const domain& d) {
  return adaptive(std::span<const q_exponent>(&q, 1), e, d, weight_mode::constant_area).front().value;
}

std::vector<q_term> diagram_expansion(const chaos_monomial& f, const chaos_monomial& g) {
  double numer = 1.0;
  for (const auto& [v, n] : f.factors) {
    if (v < 0 || v > 5 || n < 0) {
      throw std::invalid_argument("diagram_expansion: bad factor");
    }
    numer *= factorial(n);
  }
  for (const auto& [v, n] : g.factors) {
    if (v < 0 || v > 5 || n < 0) {
      throw std::invalid_argument("diagram_expansion: bad factor");
    }
    numer *= factorial(n);
  }
  std::vector<int> col_left;
  for (const auto& c : g.factors) {
    col_left.push_back(c.second);
  }
  std::map<q_exponent, double> acc;
  q_exponent q;
  enumerate(f.factors, g.factors, 0, col_left, q, 1.0, acc, numer);
  std::vector<q_term> out;
  for (const auto& [key, coef] : acc) {
    if (coef != 0.0) {
      out.push_back({coef, key});
    }
  }
  return out;
}

const std::array<chaos_monomial, 6>& a_monomials() {
  static const std::array<chaos_monomial, 6> a = {
      mono({{0, 4}}),         mono({{1, 4}}),         mono({{2, 4}}),
      mono({{1, 2}, {2, 2}}), mono({{0, 2}, {1, 2}}), mono({{0, 2}, {2, 2}}),
  };
  return a;
}

const std::array<chaos_monomial, 10>& b_monomials() {
  static const std::array<chaos_monomial, 10> b = {
      mono({{0, 2}, {3, 2}}), mono({{0, 2}, {4, 2}}), mono({{0, 2}, {5, 2}}),
      mono({{1, 2}, {3, 2}}), mono({{2, 2}, {3, 2}}), mono({{1, 2}, {4, 2}}),
      mono({{2, 2}, {5, 2}}), mono({{1, 2}, {5, 2}}), mono({{2, 2}, {4, 2}}),
      mono({{1, 1}, {2, 1}, {4, 1}, {5, 1}}),
  };
  return b;
}

const std::array<double, 21>& printed_a_constants() {
  static const std::array<double, 21> c = {
      9.0,       27.0 / 2, 27.0 / 2, 9.0 / 2,  3.0,     3.0,       //
      315.0 / 8, 27.0 / 8, 45.0 / 8, 15.0 / 2, 3.0 / 2,            //
      315.0 / 8, 45.0 / 8, 3.0 / 2,  15.0 / 2,                     //
      27.0 / 8,  3.0 / 2,  3.0 / 2,                                //
      3.0 / 2,   1.0 / 2,                                          //
      3.0 / 2,
  };
  return c;
}

const std::array<double, 55>& printed_b_constants() {
  static const std::array<double, 55> c = {
      3.0 / 8,    1.0 / 8,   1.0 / 8,   1.0 / 8,   1.0 / 8,  9.0 / 16, 9.0 / 16, 3.0 / 16, 3.0 / 16, 3.0 / 16,
      9.0 / 16,   3.0 / 16,  9.0 / 16,  3.0 / 16,  5.0 / 16, 1.0 / 16, 1.0 / 16, 1.0 / 16, 1.0 / 16,  //
      9.0 / 16,   3.0 / 16,  9.0 / 16,  1.0 / 16,  5.0 / 16, 1.0 / 16, 1.0 / 16, 1.0 / 16,            //
      9.0 / 16,   3.0 / 16,  5.0 / 16,  1.0 / 16,  1.0 / 16, 1.0 / 16, 1.0 / 16,                      //
      9.0 / 16,   1.0 / 16,  5.0 / 16,  1.0 / 16,  1.0 / 16, 1.0 / 16,                                //
      105.0 / 64, 9.0 / 64,  15.0 / 64, 15.0 / 64, 15.0 / 64,                                         //
      105.0 / 64, 15.0 / 64, 15.0 / 64, 15.0 / 64,                                                    //
      9.0 / 64,   9.0 / 64,  9.0 / 64,                                                                //
      9.0 / 64,   9.0 / 64,                                                                           //
      9.0 / 64,
  };
  return c;
}

appendix_b appendix_b_table(const energy_level& e, const domain& d) {
  struct pending {
    std::string name;
    bool is_a;
    int i;
    int j;
    double printed;
    std::vector<q_term> terms;
  };
  std::vector<pending> work;
  auto add = [&](const auto& monos, const auto& printed, const char* tag, bool is_a) {
    int n = static_cast<int>(monos.size());
    int idx = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        std::string name = i == j ? "Var(" + std::string(tag) + std::to_string(i + 1) + ")"
                                  : "Cov(" + std::string(tag) + std::to_string(i + 1) + "," + tag +
                                        std::to_string(j + 1) + ")";
        work.push_back({name, is_a, i, j, printed[static_cast<std::size_t>(idx++)],
                        diagram_expansion(monos[static_cast<std::size_t>(i)], monos[static_cast<std::size_t>(j)])});
      }
    }
  };
  add(a_monomials(), printed_a_constants(), "a", true);
  add(b_monomials(), printed_b_constants(), "b", false);

  std::vector<q_exponent> unique;
  for (const auto& w : work) {
    for (const auto& t : w.terms) {
      unique.push_back(t.q);
    }
  }
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  auto values = covariance_integrals(unique, e, d);
  auto lookup = [&](const q_exponent& q) -> const moment_prediction& {
    auto it = std::lower_bound(unique.begin(), unique.end(), q);
    return values[static_cast<std::size_t>(it - unique.begin())];
  };

  double E = e.E();
  double unit = d.area() / std::pow(pi, 3) * std::log(E) / E;
  appendix_b out;
  out.E = E;
  for (const auto& w : work) {
    double numeric = 0.0;
    double constant = 0.0;
    for (const auto& t : w.terms) {
      const auto& m = lookup(t.q);
      numeric += t.coef * m.value;
      constant += t.coef * m.leading;
    }
    out.entries.push_back({w.name, numeric, constant, w.printed, numeric / (constant * unit), E});
    auto i = static_cast<std::size_t>(w.i);
    auto j = static_cast<std::size_t>(w.j);
    if (w.is_a) {
      out.a[i][j] = out.a[j][i] = numeric;
      out.a_constant[i][j] = out.a_constant[j][i] = constant;
    } else {
      out.b[i][j] = out.b[j][i] = numeric;
      out.b_constant[i][j] = out.b_constant[j][i] = constant;
    }
  }
  return out;
}

void write_appendix_b_csv(std::ostream& os, const appendix_b& t) {
  os << "entry,numeric,paper_constant,ratio,E\n";
  os << std::setprecision(17);
  for (const auto& r : t.entries) {
    os << r.entry << ',' << r.numeric << ',' << r.paper_constant << ',' << r.ratio << ',' << r.E << '\n';
  }
  if (!os) {
    throw std::runtime_error("write_appendix_b_csv: stream write failed");
  }
}

namespace {

template <std::size_t N>
double quadratic_form(const std::array<std::array<double, N>, N>& m, const std::array<double, N>& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      s += w[i] * m[i][j] * w[j];
    }
  }
  return s;
}

}  // namespace

fourth_variances predicted_fourth_variances(const appendix_b& t) {
  static constexpr std::array<double, 6> wa = {8.0, -1.0, -1.0, -2.0, -8.0, -8.0};
  static constexpr std::array<double, 10> wb = {2.0, -1.0, -1.0, -1.0, -1.0, -0.25, -0.25, 1.25, 1.25, -3.0};
  double E = t.E;
  double qa = quadratic_form(t.a, wa);
  double qb = quadratic_form(t.b, wb);
  fourth_variances v{};
  v.var_l4 = pi * pi * E / 8192.0 * qa;
  v.var_a_e = pi * pi * E * E / 4096.0 * qa;
  v.var_b_e = pi * pi * E * E / 64.0 * qb;
  v.var_n4 = 2.0 * v.var_a_e + v.var_b_e;
  return v;
}

fourth_variances predicted_fourth_variances(const energy_level& e, const domain& d) {
  return predicted_fourth_variances(appendix_b_table(e, d));
}

fourth_variances asymptotic_fourth_variances(const energy_level& e, const domain& d) {
  double E = e.E();
  double a = d.area();
  double logE = std::log(E);
  return {a * logE / (512.0 * pi), 11.0 * a * E * logE / (32.0 * pi), a * E * logE / (256.0 * pi),
          43.0 * a * E * logE / (128.0 * pi)};
}

}  // namespace berrywave
