#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "berrywave/errors.hpp"
#include "berrywave/geometry.hpp"
#include "berrywave/quadrature.hpp"

using namespace berrywave;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_SUITE("geometry") {
  TEST_CASE("metrics") {
    auto sq = domain_metrics(domain::rectangle(1, 1));
    CHECK(sq.area == 1.0);
    CHECK(sq.diameter == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(sq.inradius == 0.5);
    CHECK(sq.perimeter == 4.0);

    auto disk = domain_metrics(domain::disk(1));
    CHECK(disk.area == doctest::Approx(pi).epsilon(1e-15));
    CHECK(disk.diameter == 2.0);
    CHECK(disk.inradius == 1.0);
    CHECK(disk.perimeter == doctest::Approx(2 * pi).epsilon(1e-15));

    auto r = domain_metrics(domain::rectangle(2, 1));
    CHECK(r.area == 2.0);
    CHECK(r.diameter == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
    CHECK(r.inradius == 0.5);
    CHECK(r.perimeter == 6.0);
  }

  TEST_CASE("origin must be interior") {
    CHECK_THROWS_AS(domain::disk(1, {1.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(domain::rectangle(1, 1, {0.5, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(domain::rectangle(0, 1), std::invalid_argument);
    CHECK_NOTHROW(domain::rectangle(1, 1, {0.2, -0.3}));
  }

  TEST_CASE("inradius at most half the diameter") {
    for (auto d : {domain::rectangle(1, 1), domain::rectangle(3, 0.2), domain::disk(0.7)}) {
      auto m = domain_metrics(d);
      CHECK(m.area > 0);
      CHECK(m.inradius <= m.diameter / 2);
    }
  }

  TEST_CASE("contains") {
    auto d = domain::disk(1);
    CHECK(d.contains({0, 0}));
    CHECK(d.contains({1, 0}));
    CHECK_FALSE(d.contains({1.0001, 0}));
    auto s = domain::rectangle(1, 1);
    CHECK(s.contains({0.5, 0.5}));
    CHECK_FALSE(s.contains({0.5, 0.5000001}));
  }

  TEST_CASE("boundary_nodes") {
    auto unit = boundary_nodes(boundary_param(domain::disk(1)), 4);
    REQUIRE(unit.size() == 4);
    for (const auto& n : unit) {
      CHECK(n.weight == doctest::Approx(pi / 2).epsilon(1e-15));
      CHECK(norm(n.normal) == doctest::Approx(1.0));
      CHECK(std::fabs(cross(n.normal, n.point)) <= 1e-15);
      CHECK(dot(n.normal, n.point) > 0);
    }
    double s = 0;
    for (const auto& n : boundary_nodes(boundary_param(domain::rectangle(1, 1)), 8)) {
      s += n.weight;
    }
    CHECK(s == doctest::Approx(4.0).epsilon(1e-15));
    s = 0;
    for (const auto& n : boundary_nodes(boundary_param(domain::disk(2)), 100)) {
      s += n.weight;
    }
    CHECK(std::fabs(s - 4 * pi) <= 1e-12);
    CHECK_THROWS_AS(boundary_nodes(boundary_param(domain::disk(1)), 3), std::invalid_argument);
  }

  TEST_CASE("boundary weights sum to the perimeter for every n") {
    for (auto d : {domain::rectangle(1, 1), domain::rectangle(2, 0.5, {0.3, 0.1}), domain::disk(1.3)}) {
      for (std::size_t n = 8; n <= 300; n += 7) {
        auto nodes = boundary_nodes(boundary_param(d), n);
        CHECK(nodes.size() == n);
        double s = 0;
        for (const auto& b : nodes) {
          s += b.weight;
          CHECK(d.contains(b.point, 1e-12));
        }
        CHECK(std::fabs(s - d.perimeter()) <= 1e-12);
      }
    }
  }

  TEST_CASE("Gauss boundary nodes integrate smooth functions along the sides") {
    auto d = domain::rectangle(2, 1);
    auto nodes = boundary_gauss_nodes(d, 0.1);
    double s = 0;
    double fx = 0;
    for (const auto& b : nodes) {
      s += b.weight;
      fx += b.weight * b.point.x * b.point.x * b.normal.x;
    }
    CHECK(s == doctest::Approx(6.0).epsilon(1e-13));
    // Divergence theorem for F = (x^2, 0): integral of 2x over the rectangle is 0.
    CHECK(std::fabs(fx) <= 1e-12);
  }

  TEST_CASE("unit-speed parameterization with normal orthogonal to the tangent") {
    for (auto d : {domain::rectangle(1.5, 1), domain::disk(1)}) {
      boundary_param b(d);
      CHECK(b.perimeter() == doctest::Approx(d.perimeter()));
      for (int i = 0; i < 200; ++i) {
        double t = b.perimeter() * (i + 0.37) / 200;
        double step = 1e-6;
        vec2 fd = (1.0 / (2 * step)) * (b.point(t + step) - b.point(t - step));
        CHECK(norm(fd) == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(norm(b.tangent(t)) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(std::fabs(dot(b.normal(t), b.tangent(t))) <= 1e-14);
        // Outward: stepping along the normal leaves the domain.
        CHECK_FALSE(d.contains(b.point(t) + 1e-6 * b.normal(t)));
      }
    }
  }

  TEST_CASE("Monte Carlo area within 4 standard errors") {
    std::mt19937_64 rng(12345);
    for (auto d : {domain::disk(1), domain::rectangle(2, 1, {0.4, -0.2})}) {
      vec2 lo = d.lower();
      vec2 hi = d.upper();
      std::uniform_real_distribution<double> ux(lo.x, hi.x);
      std::uniform_real_distribution<double> uy(lo.y, hi.y);
      const int n = 1'000'000;
      int hit = 0;
      for (int i = 0; i < n; ++i) {
        hit += d.contains({ux(rng), uy(rng)}) ? 1 : 0;
      }
      double box = (hi.x - lo.x) * (hi.y - lo.y);
      double p = static_cast<double>(hit) / n;
      double se = box * std::sqrt(p * (1 - p) / n);
      CHECK(std::fabs(box * p - d.area()) <= 4 * se + 1e-15);
    }
  }

  TEST_CASE("grid spacing and coverage") {
    auto d = domain::rectangle(1, 1);
    auto g = grid_spec::for_energy(d, 25, 16);
    CHECK(g.h() <= 1.0 / (5 * 16) + 1e-15);
    CHECK(g.h() > 0.99 / (5 * 16));
    CHECK(g.x(0) <= d.lower().x);
    CHECK(g.x(g.nx() - 1) >= d.upper().x - 1e-12);
    CHECK(g.y(0) <= d.lower().y + 1e-12);
    CHECK(g.y(g.ny() - 1) >= d.upper().y - 1e-12);
    CHECK(g.points_per_wavelength().value() == 16.0);
    CHECK_THROWS_AS(grid_spec::for_energy(d, 25, 3.9), resolution_error);
    CHECK_THROWS_AS(grid_spec::with_spacing(d, 0.0), std::invalid_argument);
    CHECK_NOTHROW(grid_spec::for_energy(d, 25, 4.0).require_resolution(25));
    CHECK_THROWS_AS(grid_spec::with_spacing(d, 0.1).require_resolution(25), resolution_error);
  }

  TEST_CASE("node weights: exact area on an aligned rectangle, O(h) on a disk") {
    auto g = grid_spec::with_spacing(domain::rectangle(2, 1), 0.01);
    double s = 0;
    for (double w : g.node_weights()) {
      s += w;
    }
    CHECK(s == doctest::Approx(2.0).epsilon(1e-12));
    auto gd = grid_spec::with_spacing(domain::disk(1), 0.005);
    s = 0;
    for (double w : gd.node_weights()) {
      s += w;
    }
    CHECK(s < pi);
    CHECK(pi - s <= 2 * pi * 0.005 * std::sqrt(2.0));
  }

  TEST_CASE("covariogram") {
    auto sq = domain::rectangle(1, 1);
    CHECK(sq.covariogram({0, 0}) == 1.0);
    CHECK(sq.covariogram({0.25, 0.5}) == doctest::Approx(0.75 * 0.5));
    CHECK(sq.covariogram({1.1, 0}) == 0.0);
    auto disk = domain::disk(1);
    CHECK(disk.covariogram({0, 0}) == doctest::Approx(pi));
    CHECK(disk.covariogram({2.0, 0}) == doctest::Approx(0.0));
    // Lens area for two unit disks at distance 1.
    CHECK(disk.covariogram({0, 1}) == doctest::Approx(2 * pi / 3 - std::sqrt(3.0) / 2).epsilon(1e-12));
  }

  TEST_CASE("isotropic covariogram integrates to area squared") {
    for (auto d : {domain::rectangle(1, 1), domain::rectangle(2, 0.5), domain::disk(1)}) {
      auto rule = quadrature::composite_gauss_legendre(0.0, d.diameter(), 0.01, 10);
      double s = 0;
      for (std::size_t i = 0; i < rule.size(); ++i) {
        s += rule.weights[i] * rule.nodes[i] * d.isotropic_covariogram(rule.nodes[i]);
      }
      CHECK(s == doctest::Approx(d.area() * d.area()).epsilon(1e-6));
    }
  }

  TEST_CASE("scaled and quarter-turned domains") {
    auto d = domain::rectangle(2, 1, {0.1, 0.2});
    auto s = d.scaled(3);
    CHECK(s.area() == doctest::Approx(18));
    CHECK(s.center().x == doctest::Approx(0.3));
    auto q = d.quarter_turn();
    CHECK(q.width() == 1.0);
    CHECK(q.height() == 2.0);
    CHECK(q.area() == d.area());
  }
}
