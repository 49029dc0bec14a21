#pragma once

// Scene validation and the planar angle primitives shared by every other
// header. All angles leave this file reduced to (-pi, pi] through wrap_angle.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "diffrace/error.hpp"

namespace diffrace {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point operator+(Point a, Point b) noexcept { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point operator-(Point a, Point b) noexcept { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point operator*(double s, Point a) noexcept { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Point a, Point b) noexcept = default;
};

constexpr double dot(Point a, Point b) noexcept { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point a, Point b) noexcept { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) noexcept { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) noexcept { return norm(a - b); }

/// Twice the signed area of triangle (a, b, c); positive when counterclockwise.
constexpr double twice_signed_area(Point a, Point b, Point c) noexcept {
  return cross(b - a, c - a);
}

/// Distance from p to the closed segment [a, b].
inline double distance_to_segment(Point a, Point b, Point p) noexcept {
  const Point ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(a, p);
  double t = dot(p - a, ab) / len2;
  t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
  return distance(a + t * ab, p);
}

/// Reduces an angle to (-pi, pi]. The only wrap site in the library.
inline double wrap_angle(double theta) noexcept {
  double r = std::remainder(theta, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

struct Tolerances {
  double collinear = 1e-9;  // squared length units
  double angle = 1e-9;      // radians

  friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

/// Unvalidated scene as read from input.
struct SceneInput {
  std::vector<Point> positions;
  std::vector<double> fluxes;
  Tolerances tol;

  friend bool operator==(const SceneInput&, const SceneInput&) = default;
};

/// A validated scene: matching, non-empty position and flux lists, fluxes in
/// (0, 1), positions pairwise distinct and no three of them collinear.
/// Only validate_config constructs one.
class SolenoidConfig {
 public:
  std::size_t size() const noexcept { return positions_.size(); }
  const std::vector<Point>& positions() const noexcept { return positions_; }
  const std::vector<double>& fluxes() const noexcept { return fluxes_; }
  Point position(std::size_t k) const { return positions_.at(k); }
  double flux(std::size_t k) const { return fluxes_.at(k); }
  const Tolerances& tolerances() const noexcept { return tol_; }

 private:
  friend SolenoidConfig validate_config(const SceneInput& raw);
  SolenoidConfig(std::vector<Point> p, std::vector<double> f, Tolerances t)
      : positions_(std::move(p)), fluxes_(std::move(f)), tol_(t) {}

  std::vector<Point> positions_;
  std::vector<double> fluxes_;
  Tolerances tol_;
};

/// Checks every scene invariant and throws a ValidationError listing all of
/// the violations found, not just the first.
inline SolenoidConfig validate_config(const SceneInput& raw) {
  std::vector<Violation> found;
  const auto& pos = raw.positions;
  const auto& flux = raw.fluxes;

  if (!(raw.tol.collinear >= 0.0) || !(raw.tol.angle >= 0.0) || !(raw.tol.angle < kPi))
    found.push_back({ErrorCode::InvalidScene, "tolerances", "tolerances must be non-negative"});
  if (pos.empty())
    found.push_back({ErrorCode::InvalidScene, "solenoids", "at least one solenoid is required"});
  if (pos.size() != flux.size())
    found.push_back({ErrorCode::InvalidScene, "fluxes",
                     "expected " + std::to_string(pos.size()) + " fluxes, got " +
                         std::to_string(flux.size())});

  for (std::size_t i = 0; i < pos.size(); ++i)
    if (!std::isfinite(pos[i].x) || !std::isfinite(pos[i].y))
      found.push_back({ErrorCode::InvalidScene, std::to_string(i), "non-finite coordinate"});

  for (std::size_t i = 0; i < flux.size(); ++i)
    if (!(flux[i] > 0.0 && flux[i] < 1.0))
      found.push_back({ErrorCode::FluxOutOfRange, std::to_string(i),
                       "flux must lie strictly inside (0, 1)"});

  for (std::size_t i = 0; i < pos.size(); ++i)
    for (std::size_t j = i + 1; j < pos.size(); ++j)
      if (!(distance(pos[i], pos[j]) > raw.tol.collinear))
        found.push_back({ErrorCode::DuplicateSolenoid,
                         std::to_string(i) + "," + std::to_string(j), "coincident positions"});

  for (std::size_t i = 0; i < pos.size(); ++i)
    for (std::size_t j = i + 1; j < pos.size(); ++j)
      for (std::size_t k = j + 1; k < pos.size(); ++k)
        if (!(std::abs(twice_signed_area(pos[i], pos[j], pos[k])) > raw.tol.collinear))
          found.push_back({ErrorCode::CollinearTriple,
                           std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(k),
                           "three collinear solenoids"});

  if (!found.empty()) throw ValidationError(std::move(found));
  return SolenoidConfig(pos, flux, raw.tol);
}

/// Diffraction angle at a vertex, strictly away from the geometric values +-pi.
class DiffractionAngle {
 public:
  DiffractionAngle(double beta, double tol_angle) : beta_(wrap_angle(beta)) {
    if (!(std::abs(beta_) < kPi - tol_angle))
      throw Error(ErrorCode::GeometricAngle,
                  "diffraction angle " + std::to_string(beta_) + " is within tolerance of +-pi");
  }

  double value() const noexcept { return beta_; }
  operator double() const noexcept { return beta_; }

 private:
  double beta_;
};

/// theta_out - theta_in, where theta_in is the polar angle of (prev - vertex)
/// and theta_out that of (next - vertex). Evaluated as atan2(cross, dot) so the
/// result is exactly antisymmetric under swapping prev and next.
inline DiffractionAngle diffraction_angle(Point prev, Point vertex, Point next,
                                          double tol_angle = Tolerances{}.angle) {
  const Point in = prev - vertex;
  const Point out = next - vertex;
  if (in == Point{} || out == Point{})
    throw Error(ErrorCode::InvalidSequence, "diffraction vertex coincides with a neighbour");
  return DiffractionAngle(std::atan2(cross(in, out), dot(in, out)), tol_angle);
}

/// Continuous change of arg(z - p) as z runs along the segment a -> b.
inline double subtended_angle(Point a, Point b, Point p,
                              double tol = Tolerances{}.collinear) {
  if (!(distance_to_segment(a, b, p) > tol))
    throw Error(ErrorCode::PointOnSegment, "point lies on the segment");
  const Point u = a - p;
  const Point v = b - p;
  return wrap_angle(std::atan2(cross(u, v), dot(u, v)));
}

struct FreeReference {
  double total_flux;
  Point center;
};

/// Total flux and flux-weighted center of the solenoids; these define the
/// single-solenoid reference used to regularize the trace.
inline FreeReference free_reference_params(const SolenoidConfig& config) {
  double total = 0.0;
  Point weighted{};
  for (std::size_t k = 0; k < config.size(); ++k) {
    total += config.flux(k);
    weighted = weighted + config.flux(k) * config.position(k);
  }
  return {total, (1.0 / total) * weighted};
}

}  // namespace diffrace
