#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "diffrace/geometry.hpp"
#include "diffrace/orbits.hpp"

namespace diffrace::fixture {

inline SolenoidConfig two_solenoids(double d = 1.0, double a0 = 0.5, double a1 = 0.5) {
  return validate_config({{{0.0, 0.0}, {d, 0.0}}, {a0, a1}, {}});
}

/// Counterclockwise equilateral triangle with unit sides.
inline std::vector<Point> triangle_points() {
  return {{0.0, 0.0}, {1.0, 0.0}, {0.5, std::sqrt(3.0) / 2.0}};
}

inline SolenoidConfig triangle(double alpha = 0.5) {
  return validate_config({triangle_points(), {alpha, alpha, alpha}, {}});
}

/// Triangle plus a fourth solenoid at its centroid.
inline SolenoidConfig triangle_with_center(double alpha = 0.5, double center_alpha = 0.3) {
  auto p = triangle_points();
  p.push_back({0.5, std::sqrt(3.0) / 6.0});
  return validate_config({p, {alpha, alpha, alpha, center_alpha}, {}});
}

/// Random generic scene: points in [0, 2]^2, pairwise distance >= 0.3 and
/// every triple with |twice area| >= 0.02.
inline SolenoidConfig random_scene(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> coord(0.0, 2.0), flux(0.05, 0.95);
  for (;;) {
    SceneInput in;
    for (std::size_t i = 0; i < n; ++i) {
      in.positions.push_back({coord(rng), coord(rng)});
      in.fluxes.push_back(flux(rng));
    }
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i)
      for (std::size_t j = i + 1; j < n && ok; ++j) {
        ok = distance(in.positions[i], in.positions[j]) >= 0.3;
        for (std::size_t k = j + 1; k < n && ok; ++k)
          ok = std::abs(twice_signed_area(in.positions[i], in.positions[j], in.positions[k])) >= 0.02;
      }
    if (ok) return validate_config(in);
  }
}

inline double min_distance(const SolenoidConfig& c) {
  double d = INFINITY;
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j) d = std::min(d, distance(c.position(i), c.position(j)));
  return d;
}

/// A random closed orbit on `config`: a random admissible word of length 2..max_len.
inline ClosedOrbit random_orbit(std::mt19937_64& rng, const SolenoidConfig& config,
                                std::size_t max_len = 6) {
  std::uniform_int_distribution<std::size_t> len_dist(2, max_len), idx(0, config.size() - 1);
  for (;;) {
    const std::size_t m = len_dist(rng);
    std::vector<std::size_t> w{idx(rng)};
    while (w.size() < m) {
      const std::size_t c = idx(rng);
      if (c != w.back()) w.push_back(c);
    }
    if (w.front() == w.back()) continue;
    return orbit_geometry(config, w);
  }
}

}  // namespace diffrace::fixture
