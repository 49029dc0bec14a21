#pragma once

// Logarithmic resonance-strip coefficients implied by the leading trace
// singularities. n1 is an opaque positive constant from the underlying
// trace-to-resonance theorem; it is never inferred.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "diffrace/error.hpp"
#include "diffrace/geometry.hpp"
#include "diffrace/orbits.hpp"

namespace diffrace {

inline constexpr double kDefaultN1 = 1.0;

struct ResonanceStrip {
  double nu = 0.0;
  std::string source;            // canonical word, or "bounce(i,j)xk"
  std::size_t corners = 0;       // m of the source orbit
  double length = 0.0;           // L of the source orbit
  double n1 = kDefaultN1;
  double epsilon = 0.0;
};

inline std::string word_label(const std::vector<std::size_t>& word) {
  std::string s;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (i) s += '-';
    s += std::to_string(word[i]);
  }
  return s;
}

/// nu = (n1 + m/2) / (L - epsilon).
inline ResonanceStrip strip_threshold(double length, std::size_t corners, double n1,
                                      double epsilon, std::string source = {}) {
  if (!(n1 > 0.0)) throw Error(ErrorCode::BadParameter, "n1 must be positive");
  if (!(epsilon >= 0.0)) throw Error(ErrorCode::BadParameter, "epsilon must be non-negative");
  if (!(epsilon < length))
    throw Error(ErrorCode::EpsilonTooLarge, "epsilon must be smaller than the orbit length");
  ResonanceStrip r;
  r.nu = (n1 + 0.5 * static_cast<double>(corners)) / (length - epsilon);
  r.source = std::move(source);
  r.corners = corners;
  r.length = length;
  r.n1 = n1;
  r.epsilon = epsilon;
  return r;
}

inline ResonanceStrip strip_threshold(const ClosedOrbit& orbit, double n1, double epsilon) {
  return strip_threshold(orbit.total_length, orbit.corners(), n1, epsilon,
                         word_label(orbit.vertices));
}

struct StripReport {
  ResonanceStrip best;
  double d_max = 0.0;
  std::size_t far_i = 0, far_j = 0;   // the pair realizing d_max
  double limit = 0.0;                 // 1/(2 d_max) + epsilon
  double gap = 0.0;                   // best.nu - limit
  std::size_t orbits_considered = 0;
  std::uint64_t rep_max = 0;
};

/// Smallest strip coefficient over the enumerated orbits up to L_max and over
/// the k-fold bouncing orbit between the farthest pair, 1 <= k <= rep_max.
/// Bouncing repetitions are evaluated from L = 2 k d_max, m = 2 k directly.
inline StripReport best_strip(const SolenoidConfig& config, double n1, double epsilon,
                              std::uint64_t rep_max, double L_max = 0.0,
                              const EnumerationOptions& options = {}) {
  if (config.size() < 2)
    throw Error(ErrorCode::SingleSolenoid, "a single solenoid has no closed orbits");
  if (rep_max < 1) throw Error(ErrorCode::BadParameter, "rep_max must be at least 1");

  StripReport rep;
  rep.rep_max = rep_max;
  for (std::size_t i = 0; i < config.size(); ++i)
    for (std::size_t j = i + 1; j < config.size(); ++j) {
      const double d = distance(config.position(i), config.position(j));
      if (d > rep.d_max) {
        rep.d_max = d;
        rep.far_i = i;
        rep.far_j = j;
      }
    }
  rep.best.nu = std::numeric_limits<double>::infinity();

  if (L_max > 0.0) {
    for (const auto& orbit : enumerate_orbits(config, L_max, options).orbits) {
      if (!(epsilon < orbit.total_length)) continue;
      ++rep.orbits_considered;
      const auto s = strip_threshold(orbit, n1, epsilon);
      if (s.nu < rep.best.nu) rep.best = s;
    }
  }

  const std::string pair = std::to_string(rep.far_i) + "," + std::to_string(rep.far_j);
  for (std::uint64_t k = 1; k <= rep_max; ++k) {
    const double length = 2.0 * static_cast<double>(k) * rep.d_max;
    if (!(epsilon < length)) continue;
    ++rep.orbits_considered;
    const auto s = strip_threshold(length, static_cast<std::size_t>(2 * k), n1, epsilon,
                                   "bounce(" + pair + ")x" + std::to_string(k));
    if (s.nu < rep.best.nu) rep.best = s;
  }
  if (rep.orbits_considered == 0)
    throw Error(ErrorCode::EpsilonTooLarge, "epsilon exceeds every candidate orbit length");

  rep.limit = 1.0 / (2.0 * rep.d_max) + epsilon;
  rep.gap = rep.best.nu - rep.limit;
  return rep;
}

struct CountingBound {
  std::uint64_t count = 0;
  double nu = 0.0;
  double r = 0.0;
  double delta = 0.0;
  /// The threshold r(delta) beyond which the bound holds is known to exist but
  /// has no computable value.
  static constexpr const char* kValidity = "valid for r > r(delta); r(delta) unknown (existence only)";
};

/// floor(r^{1 - delta}).
inline CountingBound counting_lower_bound(double nu, double r, double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw Error(ErrorCode::BadDelta, "delta must lie strictly inside (0, 1)");
  if (!(r > 0.0)) throw Error(ErrorCode::BadParameter, "r must be positive");
  if (!(nu > 0.0)) throw Error(ErrorCode::BadParameter, "nu must be positive");
  CountingBound b;
  b.count = static_cast<std::uint64_t>(std::floor(std::pow(r, 1.0 - delta)));
  b.nu = nu;
  b.r = r;
  b.delta = delta;
  return b;
}

}  // namespace diffrace
