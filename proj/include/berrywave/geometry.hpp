#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace berrywave {

struct vec2 {
  double x = 0.0;
  double y = 0.0;

  friend vec2 operator+(vec2 a, vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend vec2 operator-(vec2 a, vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend vec2 operator*(double s, vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(vec2 a, vec2 b) = default;
};

inline double dot(vec2 a, vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(vec2 a, vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(vec2 a) { return std::hypot(a.x, a.y); }

enum class domain_kind { rectangle, disk };

struct domain_metrics_t {
  double area;
  double diameter;
  double inradius;
  double perimeter;
};

class domain {
 public:
  static domain rectangle(double width, double height, vec2 center = {});
  static domain disk(double radius, vec2 center = {});

  domain_kind kind() const { return kind_; }
  double width() const { return width_; }
  double height() const { return height_; }
  double radius() const { return radius_; }
  vec2 center() const { return center_; }

  double area() const;
  double diameter() const;
  double inradius() const;
  double perimeter() const;

  // Closed set; tol widens it (used for grid corners that round past the edge).
  bool contains(vec2 p, double tol = 0.0) const;

  vec2 lower() const;
  vec2 upper() const;

  // area(D intersect (D + z)).
  double covariogram(vec2 z) const;
  // Integral of the covariogram over the circle of radius rho.
  double isotropic_covariogram(double rho) const;

  domain scaled(double factor) const;
  // Rotation by pi/2 about the center.
  domain quarter_turn() const;

 private:
  domain(domain_kind kind, double width, double height, double radius, vec2 center);

  domain_kind kind_;
  double width_;
  double height_;
  double radius_;
  vec2 center_;
};

domain_metrics_t domain_metrics(const domain& d);

// Square-cell node grid covering the bounding box of a domain.
class grid_spec {
 public:
  static constexpr double min_points_per_wavelength = 4.0;

  static grid_spec for_energy(const domain& d, double energy, double points_per_wavelength);
  static grid_spec with_spacing(const domain& d, double h);

  const domain& dom() const { return domain_; }
  double h() const { return h_; }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t node_count() const { return nx_ * ny_; }
  std::optional<double> points_per_wavelength() const { return ppw_; }

  double x(std::size_t ix) const { return x0_ + static_cast<double>(ix) * h_; }
  double y(std::size_t iy) const { return y0_ + static_cast<double>(iy) * h_; }
  vec2 node(std::size_t ix, std::size_t iy) const { return {x(ix), y(iy)}; }
  std::size_t index(std::size_t ix, std::size_t iy) const { return iy * nx_ + ix; }

  // Cell (ix, iy) spans nodes ix..ix+1, iy..iy+1 and counts only if wholly inside.
  bool cell_inside(std::size_t ix, std::size_t iy) const;
  // Row-major mask over (nx-1) x (ny-1) cells.
  const std::vector<unsigned char>& cell_mask() const { return mask_; }

  // Trapezoid weights of each node over the inside cells (h^2/4 per incident cell).
  std::vector<double> node_weights() const;

  // Throws resolution_error when the grid is too coarse for the given energy.
  void require_resolution(double energy) const;

 private:
  grid_spec(const domain& d, double h, std::optional<double> ppw);

  domain domain_;
  double h_;
  std::optional<double> ppw_;
  std::size_t nx_;
  std::size_t ny_;
  double x0_;
  double y0_;
  std::vector<unsigned char> mask_;
};

struct boundary_node {
  vec2 point;
  vec2 normal;
  double weight;
};

// Unit-speed parameterization of the boundary, counterclockwise.
class boundary_param {
 public:
  explicit boundary_param(const domain& d) : domain_(d) {}

  double perimeter() const { return domain_.perimeter(); }
  vec2 point(double t) const;
  vec2 tangent(double t) const;
  vec2 normal(double t) const;
  const domain& dom() const { return domain_; }

 private:
  domain domain_;
};

// Equal-weight nodes: trapezoid on the circle, midpoints per side on rectangles.
std::vector<boundary_node> boundary_nodes(const boundary_param& b, std::size_t n);

// Gauss-Legendre panels no longer than max_panel (sides of rectangles never straddled).
std::vector<boundary_node> boundary_gauss_nodes(const domain& d, double max_panel, int order = 16);

}  // namespace berrywave
