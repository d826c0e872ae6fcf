#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "berrywave/covariance.hpp"
#include "berrywave/geometry.hpp"

namespace berrywave {

// Sum of amplitude_j cos(k <x, (cos t_j, sin t_j)> + phase_j).
class wave_sample {
 public:
  wave_sample(energy_level e, std::vector<double> directions, std::vector<double> phases,
              std::vector<double> amplitudes);

  const energy_level& energy() const { return energy_; }
  std::size_t size() const { return directions_.size(); }
  const std::vector<double>& directions() const { return directions_; }
  const std::vector<double>& phases() const { return phases_; }
  const std::vector<double>& amplitudes() const { return amplitudes_; }
  // k cos(t_j) and k sin(t_j).
  const std::vector<double>& kc() const { return kc_; }
  const std::vector<double>& ks() const { return ks_; }

  // All directions advanced by angle (wrapped to [0, 2 pi)).
  wave_sample rotated(double angle) const;

 private:
  energy_level energy_;
  std::vector<double> directions_;
  std::vector<double> phases_;
  std::vector<double> amplitudes_;
  std::vector<double> kc_;
  std::vector<double> ks_;
};

struct complex_wave_sample {
  wave_sample re;
  wave_sample im;
};

struct field_eval {
  double value;
  vec2 gradient;
};

enum class execution { serial, parallel };

// Nodes in row-major order (index iy * nx + ix).
struct field_grid {
  grid_spec grid;
  double energy;  // sets the derivative normalization 1/sqrt(2 pi^2 E)
  std::vector<double> value;
  std::vector<double> grad_x;
  std::vector<double> grad_y;

  bool has_gradient() const { return !grad_x.empty(); }
};

inline constexpr std::size_t default_node_budget = 100'000'000;

// Field ids inside one replication's stream.
inline constexpr std::uint32_t field_real = 0;
inline constexpr std::uint32_t field_imag = 1;

// I.i.d. uniform directions and phases, amplitude sqrt(2/J).
wave_sample sample_wave(energy_level e, std::size_t J, std::uint64_t seed, std::uint32_t replication = 0,
                        std::uint32_t field = field_real);

// M equispaced directions on [0, pi) with a uniform random rotation, Rayleigh amplitudes
// (scale 1/sqrt(M)) and uniform phases: exactly Gaussian given the rotation.
wave_sample sample_gaussian_wave(energy_level e, std::size_t M, std::uint64_t seed, std::uint32_t replication = 0,
                                 std::uint32_t field = field_real);

// Directions needed so that the aliasing term J_{2M}(k diam) is negligible.
std::size_t gaussian_directions_for(const energy_level& e, const domain& d, std::size_t at_least);

field_eval eval(const wave_sample& w, vec2 x);
double eval_value(const wave_sample& w, vec2 x);

field_grid eval_grid(const wave_sample& w, const grid_spec& g, bool with_gradient = true,
                     execution ex = execution::parallel, std::size_t node_budget = default_node_budget);

// Reference path: one eval() per node.
field_grid eval_grid_serial(const wave_sample& w, const grid_spec& g, bool with_gradient = true,
                            std::size_t node_budget = default_node_budget);

struct lag_covariance {
  vec2 lag;
  double mean;
  double standard_error;
};

std::vector<lag_covariance> empirical_covariance(energy_level e, std::size_t J, std::size_t n_samples,
                                                 const std::vector<vec2>& lags, std::uint64_t seed);

}  // namespace berrywave
