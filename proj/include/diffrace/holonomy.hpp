#pragma once

// Per-orbit complex coefficients: the diffraction factor at each corner and the
// Aharonov-Bohm holonomy built from fractional winding numbers.

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "diffrace/error.hpp"
#include "diffrace/geometry.hpp"
#include "diffrace/orbits.hpp"

namespace diffrace {

using Complex = std::complex<double>;

/// sin(pi alpha) e^{-i beta/2} / cos(beta/2).
inline Complex diffraction_coefficient(double alpha, DiffractionAngle beta) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error(ErrorCode::FluxOutOfRange, "flux must lie strictly inside (0, 1)");
  const double half = 0.5 * beta.value();
  return std::polar(std::sin(kPi * alpha) / std::cos(half), -half);
}

inline Complex diffraction_coefficient(double alpha, double beta,
                                       double tol_angle = Tolerances{}.angle) {
  return diffraction_coefficient(alpha, DiffractionAngle(beta, tol_angle));
}

/// Change of the gauge angle phi_j = arg(z - s_j) between a and b along the
/// straight segment.
inline double gauge_phase_increment(Point a, Point b, Point solenoid,
                                    double tol = Tolerances{}.collinear) {
  return subtended_angle(a, b, solenoid, tol);
}

struct WindingNumber {
  double value = 0.0;
  std::size_t solenoid = 0;
};

/// Principal-value winding number of the orbit about solenoid k. Segments with
/// an endpoint at s_k lie on rays from s_k and contribute nothing; every other
/// segment contributes the angle it subtends at s_k.
inline WindingNumber fractional_winding(const SolenoidConfig& config, const ClosedOrbit& orbit,
                                        std::size_t k) {
  if (k >= config.size()) throw Error(ErrorCode::BadParameter, "solenoid index out of range");
  const std::size_t m = orbit.corners();
  const Point sk = config.position(k);
  long double turned = 0.0L;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t a = orbit.vertices[i];
    const std::size_t b = orbit.vertices[(i + 1) % m];
    if (a == k || b == k) continue;
    turned += subtended_angle(config.position(a), config.position(b), sk,
                              config.tolerances().collinear);
  }
  return {static_cast<double>(turned / static_cast<long double>(kTwoPi)), k};
}

/// Product over all solenoids of e^{-2 pi i alpha_k w_k}.
inline Complex holonomy_factor(const SolenoidConfig& config, const ClosedOrbit& orbit) {
  long double phase = 0.0L;
  for (std::size_t k = 0; k < config.size(); ++k)
    phase += static_cast<long double>(config.flux(k)) * fractional_winding(config, orbit, k).value;
  return std::polar(1.0, static_cast<double>(-phase * static_cast<long double>(kTwoPi)));
}

struct OrbitCoefficient {
  Complex value;
  std::vector<Complex> factors;  // one diffraction factor per corner, orbit order
  Complex holonomy;
  std::vector<double> windings;  // w_k for every solenoid
};

/// Full coefficient d = (prod of corner factors) * holonomy. Magnitudes and
/// phases are accumulated separately in extended precision so long orbits
/// keep their phase.
inline OrbitCoefficient orbit_coefficient(const SolenoidConfig& config, const ClosedOrbit& orbit) {
  OrbitCoefficient out;
  const double tol = config.tolerances().angle;
  long double log_mag = 0.0L;
  long double phase = 0.0L;
  out.factors.reserve(orbit.corners());
  for (std::size_t l = 0; l < orbit.corners(); ++l) {
    const double alpha = config.flux(orbit.vertices[l]);
    const DiffractionAngle beta(orbit.angles[l], tol);
    out.factors.push_back(diffraction_coefficient(alpha, beta));
    log_mag += std::log(static_cast<long double>(std::sin(kPi * alpha))) -
               std::log(static_cast<long double>(std::cos(0.5 * beta.value())));
    phase -= 0.5L * static_cast<long double>(beta.value());
  }

  long double holonomy_phase = 0.0L;
  out.windings.reserve(config.size());
  for (std::size_t k = 0; k < config.size(); ++k) {
    const double w = fractional_winding(config, orbit, k).value;
    out.windings.push_back(w);
    holonomy_phase -= static_cast<long double>(kTwoPi) * config.flux(k) * w;
  }
  out.holonomy = std::polar(1.0, static_cast<double>(holonomy_phase));

  const long double total_phase = std::remainder(phase + holonomy_phase, 2.0L * std::acos(-1.0L));
  out.value = std::polar(static_cast<double>(std::exp(log_mag)), static_cast<double>(total_phase));
  return out;
}

}  // namespace diffrace
