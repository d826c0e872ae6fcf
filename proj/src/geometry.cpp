#include "berrywave/geometry.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>

#include "berrywave/errors.hpp"
#include "berrywave/quadrature.hpp"

namespace berrywave {

namespace {

constexpr double pi = std::numbers::pi;

// Integral over the first quadrant of (w - rho cos)(h - rho sin) where both factors are positive.
double rectangle_quadrant(double w, double h, double rho) {
  double lo = rho > w ? std::acos(w / rho) : 0.0;
  double hi = rho > h ? std::asin(h / rho) : pi / 2.0;
  if (hi <= lo) {
    return 0.0;
  }
  auto f = [&](double t) {
    double s = std::sin(t);
    return w * h * t + w * rho * std::cos(t) - h * rho * s + 0.5 * rho * rho * s * s;
  };
  return f(hi) - f(lo);
}

}  // namespace

domain::domain(domain_kind kind, double width, double height, double radius, vec2 center)
    : kind_(kind), width_(width), height_(height), radius_(radius), center_(center) {}

domain domain::rectangle(double width, double height, vec2 center) {
  if (!(width > 0.0) || !(height > 0.0) || !std::isfinite(width) || !std::isfinite(height)) {
    throw std::invalid_argument("rectangle: width and height must be positive");
  }
  if (std::fabs(center.x) >= width / 2.0 || std::fabs(center.y) >= height / 2.0) {
    throw std::invalid_argument("rectangle: origin must lie in the interior");
  }
  return domain(domain_kind::rectangle, width, height, 0.0, center);
}

domain domain::disk(double radius, vec2 center) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("disk: radius must be positive");
  }
  if (norm(center) >= radius) {
    throw std::invalid_argument("disk: origin must lie in the interior");
  }
  return domain(domain_kind::disk, 0.0, 0.0, radius, center);
}

double domain::area() const {
  return kind_ == domain_kind::disk ? pi * radius_ * radius_ : width_ * height_;
}

double domain::diameter() const {
  return kind_ == domain_kind::disk ? 2.0 * radius_ : std::hypot(width_, height_);
}

double domain::inradius() const {
  return kind_ == domain_kind::disk ? radius_ : 0.5 * std::min(width_, height_);
}

double domain::perimeter() const {
  return kind_ == domain_kind::disk ? 2.0 * pi * radius_ : 2.0 * (width_ + height_);
}

bool domain::contains(vec2 p, double tol) const {
  vec2 q = p - center_;
  if (kind_ == domain_kind::disk) {
    return q.x * q.x + q.y * q.y <= (radius_ + tol) * (radius_ + tol);
  }
  return std::fabs(q.x) <= width_ / 2.0 + tol && std::fabs(q.y) <= height_ / 2.0 + tol;
}

vec2 domain::lower() const {
  if (kind_ == domain_kind::disk) {
    return {center_.x - radius_, center_.y - radius_};
  }
  return {center_.x - width_ / 2.0, center_.y - height_ / 2.0};
}

vec2 domain::upper() const {
  if (kind_ == domain_kind::disk) {
    return {center_.x + radius_, center_.y + radius_};
  }
  return {center_.x + width_ / 2.0, center_.y + height_ / 2.0};
}

double domain::covariogram(vec2 z) const {
  if (kind_ == domain_kind::disk) {
    double rho = norm(z);
    double r = radius_;
    if (rho >= 2.0 * r) {
      return 0.0;
    }
    return 2.0 * r * r * std::acos(rho / (2.0 * r)) - 0.5 * rho * std::sqrt(4.0 * r * r - rho * rho);
  }
  double a = width_ - std::fabs(z.x);
  double b = height_ - std::fabs(z.y);
  return a > 0.0 && b > 0.0 ? a * b : 0.0;
}

double domain::isotropic_covariogram(double rho) const {
  if (kind_ == domain_kind::disk) {
    return 2.0 * pi * covariogram({rho, 0.0});
  }
  return 4.0 * rectangle_quadrant(width_, height_, rho);
}

domain domain::scaled(double factor) const {
  if (kind_ == domain_kind::disk) {
    return disk(radius_ * factor, factor * center_);
  }
  return rectangle(width_ * factor, height_ * factor, factor * center_);
}

domain domain::quarter_turn() const {
  vec2 c{-center_.y, center_.x};
  if (kind_ == domain_kind::disk) {
    return disk(radius_, c);
  }
  return rectangle(height_, width_, c);
}

domain_metrics_t domain_metrics(const domain& d) {
  return {d.area(), d.diameter(), d.inradius(), d.perimeter()};
}

grid_spec::grid_spec(const domain& d, double h, std::optional<double> ppw) : domain_(d), ppw_(ppw) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw std::invalid_argument("grid_spec: spacing must be positive");
  }
  vec2 lo = d.lower();
  vec2 hi = d.upper();
  double w = hi.x - lo.x;
  double ht = hi.y - lo.y;
  auto cells_x = static_cast<std::size_t>(std::ceil(w / h - 1e-9));
  cells_x = std::max<std::size_t>(cells_x, 1);
  h_ = w / static_cast<double>(cells_x);
  auto cells_y = static_cast<std::size_t>(std::ceil(ht / h_ - 1e-9));
  cells_y = std::max<std::size_t>(cells_y, 1);
  nx_ = cells_x + 1;
  ny_ = cells_y + 1;
  x0_ = lo.x;
  y0_ = d.center().y - 0.5 * static_cast<double>(cells_y) * h_;

  double tol = 1e-9 * h_;
  mask_.assign(cells_x * cells_y, 0);
  for (std::size_t iy = 0; iy < cells_y; ++iy) {
    for (std::size_t ix = 0; ix < cells_x; ++ix) {
      bool in = d.contains(node(ix, iy), tol) && d.contains(node(ix + 1, iy), tol) &&
                d.contains(node(ix, iy + 1), tol) && d.contains(node(ix + 1, iy + 1), tol);
      mask_[iy * cells_x + ix] = in ? 1 : 0;
    }
  }
}

grid_spec grid_spec::for_energy(const domain& d, double energy, double points_per_wavelength) {
  if (!(energy > 0.0)) {
    throw std::invalid_argument("grid_spec: energy must be positive");
  }
  if (!(points_per_wavelength >= min_points_per_wavelength)) {
    throw resolution_error("grid_spec: points_per_wavelength must be >= 4");
  }
  return grid_spec(d, 1.0 / (std::sqrt(energy) * points_per_wavelength), points_per_wavelength);
}

grid_spec grid_spec::with_spacing(const domain& d, double h) {
  return grid_spec(d, h, std::nullopt);
}

bool grid_spec::cell_inside(std::size_t ix, std::size_t iy) const {
  return mask_[iy * (nx_ - 1) + ix] != 0;
}

std::vector<double> grid_spec::node_weights() const {
  std::vector<double> w(node_count(), 0.0);
  double q = 0.25 * h_ * h_;
  for (std::size_t iy = 0; iy + 1 < ny_; ++iy) {
    for (std::size_t ix = 0; ix + 1 < nx_; ++ix) {
      if (!cell_inside(ix, iy)) {
        continue;
      }
      w[index(ix, iy)] += q;
      w[index(ix + 1, iy)] += q;
      w[index(ix, iy + 1)] += q;
      w[index(ix + 1, iy + 1)] += q;
    }
  }
  return w;
}

void grid_spec::require_resolution(double energy) const {
  double ppw = 1.0 / (h_ * std::sqrt(energy));
  if (ppw < min_points_per_wavelength * (1.0 - 1e-12)) {
    throw resolution_error("grid too coarse: " + std::to_string(ppw) + " points per wavelength");
  }
}

vec2 boundary_param::point(double t) const {
  const domain& d = domain_;
  double p = d.perimeter();
  t = std::fmod(t, p);
  if (t < 0.0) {
    t += p;
  }
  if (d.kind() == domain_kind::disk) {
    double a = t / d.radius();
    return d.center() + d.radius() * vec2{std::cos(a), std::sin(a)};
  }
  // Counterclockwise from the lower-left corner.
  double w = d.width();
  double h = d.height();
  vec2 lo = d.lower();
  if (t < w) {
    return {lo.x + t, lo.y};
  }
  if (t < w + h) {
    return {lo.x + w, lo.y + (t - w)};
  }
  if (t < 2.0 * w + h) {
    return {lo.x + w - (t - w - h), lo.y + h};
  }
  return {lo.x, lo.y + h - (t - 2.0 * w - h)};
}

vec2 boundary_param::tangent(double t) const {
  vec2 n = normal(t);
  return {-n.y, n.x};
}

vec2 boundary_param::normal(double t) const {
  const domain& d = domain_;
  double p = d.perimeter();
  t = std::fmod(t, p);
  if (t < 0.0) {
    t += p;
  }
  if (d.kind() == domain_kind::disk) {
    double a = t / d.radius();
    return {std::cos(a), std::sin(a)};
  }
  double w = d.width();
  double h = d.height();
  if (t < w) {
    return {0.0, -1.0};
  }
  if (t < w + h) {
    return {1.0, 0.0};
  }
  if (t < 2.0 * w + h) {
    return {0.0, 1.0};
  }
  return {-1.0, 0.0};
}

namespace {

struct side {
  vec2 start;
  vec2 direction;
  vec2 normal;
  double length;
};

std::vector<side> rectangle_sides(const domain& d) {
  vec2 lo = d.lower();
  double w = d.width();
  double h = d.height();
  return {
      {lo, {1.0, 0.0}, {0.0, -1.0}, w},
      {{lo.x + w, lo.y}, {0.0, 1.0}, {1.0, 0.0}, h},
      {{lo.x + w, lo.y + h}, {-1.0, 0.0}, {0.0, 1.0}, w},
      {{lo.x, lo.y + h}, {0.0, -1.0}, {-1.0, 0.0}, h},
  };
}

}  // namespace

std::vector<boundary_node> boundary_nodes(const boundary_param& b, std::size_t n) {
  if (n < 4) {
    throw std::invalid_argument("boundary_nodes: need at least 4 nodes");
  }
  const domain& d = b.dom();
  std::vector<boundary_node> out;
  out.reserve(n);
  if (d.kind() == domain_kind::disk) {
    double r = d.radius();
    double w = 2.0 * pi * r / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      double a = 2.0 * pi * static_cast<double>(i) / static_cast<double>(n);
      vec2 nrm{std::cos(a), std::sin(a)};
      out.push_back({d.center() + r * nrm, nrm, w});
    }
    return out;
  }
  auto sides = rectangle_sides(d);
  double perimeter = d.perimeter();
  std::vector<std::size_t> counts(4);
  std::size_t used = 0;
  for (int s = 0; s < 4; ++s) {
    counts[s] = std::max<std::size_t>(1, static_cast<std::size_t>(
                                             std::llround(static_cast<double>(n) * sides[s].length / perimeter)));
    used += counts[s];
  }
  // Fix rounding drift on the longest sides first.
  for (int s = 0; used != n; s = (s + 1) % 4) {
    if (used < n) {
      ++counts[s];
      ++used;
    } else if (counts[s] > 1) {
      --counts[s];
      --used;
    }
  }
  for (int s = 0; s < 4; ++s) {
    double step = sides[s].length / static_cast<double>(counts[s]);
    for (std::size_t i = 0; i < counts[s]; ++i) {
      double t = (static_cast<double>(i) + 0.5) * step;
      out.push_back({sides[s].start + t * sides[s].direction, sides[s].normal, step});
    }
  }
  return out;
}

std::vector<boundary_node> boundary_gauss_nodes(const domain& d, double max_panel, int order) {
  if (!(max_panel > 0.0)) {
    throw std::invalid_argument("boundary_gauss_nodes: panel length must be positive");
  }
  std::vector<boundary_node> out;
  if (d.kind() == domain_kind::disk) {
    // The trapezoid rule is spectrally accurate on a closed smooth curve.
    auto n = static_cast<std::size_t>(std::ceil(d.perimeter() / max_panel)) * order;
    return boundary_nodes(boundary_param(d), std::max<std::size_t>(n, 8));
  }
  for (const side& s : rectangle_sides(d)) {
    auto rule = quadrature::composite_gauss_legendre(0.0, s.length, max_panel, order);
    for (std::size_t i = 0; i < rule.size(); ++i) {
      out.push_back({s.start + rule.nodes[i] * s.direction, s.normal, rule.weights[i]});
    }
  }
  return out;
}

}  // namespace berrywave
