#pragma once

// Closed diffractive orbits: polygons whose corners are solenoids. An orbit is
// stored as the lexicographically smallest rotation of its cyclic vertex word.
// A trajectory and its reversal are distinct orbits unless the reversed word
// is a rotation of the original.

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "diffrace/error.hpp"
#include "diffrace/geometry.hpp"
#include "diffrace/parallel.hpp"

namespace diffrace {

/// Relative slack applied when comparing an orbit length against a bound, so
/// that lengths equal to the bound up to rounding (3 * 1.0 vs 3.0000000000000004)
/// are admitted consistently.
inline constexpr double kLengthSlack = 1e-12;

inline bool within_length(double length, double bound) noexcept {
  return length <= bound * (1.0 + kLengthSlack);
}

struct ClosedOrbit {
  std::vector<std::size_t> vertices;   // canonical cyclic word, size m >= 2
  std::vector<double> segment_lengths; // l_i = |s_{v_i} - s_{v_{i+1 mod m}}|
  double total_length = 0.0;
  std::size_t primitive_period = 0;    // smallest cyclic period of the word
  double primitive_length = 0.0;
  std::size_t repetition = 1;          // m / primitive_period
  std::vector<double> angles;          // diffraction angle at each vertex
  bool merged_with_reverse = false;    // stands for itself and its reversal

  std::size_t corners() const noexcept { return vertices.size(); }

  friend bool operator==(const ClosedOrbit&, const ClosedOrbit&) = default;
};

/// Index of the rotation giving the lexicographically smallest word.
inline std::size_t smallest_rotation(std::span<const std::size_t> word) {
  const std::size_t m = word.size();
  std::size_t best = 0;
  for (std::size_t r = 1; r < m; ++r) {
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t a = word[(r + i) % m];
      const std::size_t b = word[(best + i) % m];
      if (a != b) {
        if (a < b) best = r;
        break;
      }
    }
  }
  return best;
}

inline std::vector<std::size_t> canonical_word(std::span<const std::size_t> word) {
  const std::size_t r = smallest_rotation(word);
  std::vector<std::size_t> out(word.size());
  for (std::size_t i = 0; i < word.size(); ++i) out[i] = word[(r + i) % word.size()];
  return out;
}

inline bool is_canonical(std::span<const std::size_t> word) {
  return smallest_rotation(word) == 0;
}

inline std::size_t primitive_period(std::span<const std::size_t> word) {
  const std::size_t m = word.size();
  for (std::size_t p = 1; p < m; ++p) {
    if (m % p != 0) continue;
    bool periodic = true;
    for (std::size_t i = 0; i + p < m && periodic; ++i) periodic = word[i] == word[i + p];
    if (periodic) return p;
  }
  return m;
}

/// Builds the full orbit record for a cyclic index word. The word is rotated
/// to canonical form first. Throws InvalidSequence for short words, bad
/// indices or repeated consecutive entries, GeometricAngle for a vertex with
/// |beta| within tolerance of pi.
inline ClosedOrbit orbit_geometry(const SolenoidConfig& config,
                                  std::span<const std::size_t> sequence) {
  const std::size_t m = sequence.size();
  if (m < 2) throw Error(ErrorCode::InvalidSequence, "an orbit needs at least two corners");
  for (std::size_t i = 0; i < m; ++i) {
    if (sequence[i] >= config.size())
      throw Error(ErrorCode::InvalidSequence, "solenoid index " + std::to_string(sequence[i]) +
                                                  " out of range");
    if (sequence[i] == sequence[(i + 1) % m])
      throw Error(ErrorCode::InvalidSequence, "consecutive corners must differ");
  }

  ClosedOrbit orbit;
  orbit.vertices = canonical_word(sequence);
  const auto& v = orbit.vertices;
  orbit.segment_lengths.resize(m);
  orbit.angles.resize(m);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const Point here = config.position(v[i]);
    const Point next = config.position(v[(i + 1) % m]);
    const Point prev = config.position(v[(i + m - 1) % m]);
    orbit.segment_lengths[i] = distance(here, next);
    total += orbit.segment_lengths[i];
    orbit.angles[i] = diffraction_angle(prev, here, next, config.tolerances().angle).value();
  }
  orbit.total_length = total;
  orbit.primitive_period = primitive_period(v);
  orbit.repetition = m / orbit.primitive_period;
  orbit.primitive_length = total / static_cast<double>(orbit.repetition);
  return orbit;
}

/// The same trajectory traversed backwards, in canonical form. Lengths are
/// re-summed in the new vertex order, which matches orbit_geometry on the
/// reversed word bit for bit.
inline ClosedOrbit reverse_orbit(const ClosedOrbit& orbit) {
  const std::size_t m = orbit.corners();
  // Reversed word w_j = v_{m-1-j}; segment w_j -> w_{j+1} is segment v_{m-2-j}.
  std::vector<std::size_t> word(m);
  std::vector<double> lengths(m), angles(m);
  for (std::size_t j = 0; j < m; ++j) {
    word[j] = orbit.vertices[m - 1 - j];
    lengths[j] = orbit.segment_lengths[(2 * m - 2 - j) % m];
    angles[j] = -orbit.angles[m - 1 - j];
  }
  const std::size_t r = smallest_rotation(word);

  ClosedOrbit out;
  out.vertices.resize(m);
  out.segment_lengths.resize(m);
  out.angles.resize(m);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    out.vertices[i] = word[(r + i) % m];
    out.segment_lengths[i] = lengths[(r + i) % m];
    out.angles[i] = angles[(r + i) % m];
    total += out.segment_lengths[i];
  }
  out.total_length = total;
  out.primitive_period = orbit.primitive_period;
  out.repetition = orbit.repetition;
  out.primitive_length = total / static_cast<double>(out.repetition);
  out.merged_with_reverse = orbit.merged_with_reverse;
  return out;
}

inline bool is_self_reverse(const ClosedOrbit& orbit) {
  std::vector<std::size_t> reversed(orbit.vertices.rbegin(), orbit.vertices.rend());
  return canonical_word(reversed) == orbit.vertices;
}

struct EnumerationOptions {
  int threads = 1;
  /// Collapse each orbit with its (distinct) reversal into one entry flagged
  /// merged_with_reverse; the lexicographically smaller word is kept.
  bool merge_reversals = false;
};

struct Enumeration {
  std::vector<ClosedOrbit> orbits;  // sorted by (total_length, vertices)
  std::size_t skipped_geometric = 0;
};

namespace detail {

struct EdgeSearch {
  const SolenoidConfig& config;
  const std::vector<std::vector<double>>& dist;
  double bound;
  std::vector<ClosedOrbit> found;
  std::size_t skipped = 0;

  // Extends `word` (anchored at word[0], its smallest entry) depth first.
  void extend(std::vector<std::size_t>& word, double partial) {
    const std::size_t anchor = word.front();
    const std::size_t last = word.back();
    if (last != anchor && within_length(partial + dist[last][anchor], bound) &&
        is_canonical(word)) {
      try {
        found.push_back(orbit_geometry(config, word));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::GeometricAngle) throw;
        ++skipped;
      }
    }
    for (std::size_t c = anchor; c < config.size(); ++c) {
      if (c == last) continue;
      const double grown = partial + dist[last][c];
      // Closing back to the anchor costs at least dist[c][anchor].
      if (!within_length(grown + dist[c][anchor], bound)) continue;
      word.push_back(c);
      extend(word, grown);
      word.pop_back();
    }
  }
};

}  // namespace detail

/// Every closed orbit with total length <= L_max, one per rotation class.
/// The search is a depth-first extension of words anchored at their smallest
/// index and pruned by length; it is split by first edge (a, b), a < b, across
/// workers, and the merged result is sorted, so output does not depend on the
/// thread count.
inline Enumeration enumerate_orbits(const SolenoidConfig& config, double L_max,
                                    const EnumerationOptions& options = {}) {
  if (!(L_max > 0.0)) throw Error(ErrorCode::BadParameter, "L_max must be positive");
  const std::size_t n = config.size();
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) dist[i][j] = distance(config.position(i), config.position(j));

  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) edges.emplace_back(a, b);

  std::vector<detail::EdgeSearch> parts;
  parts.reserve(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) parts.push_back({config, dist, L_max, {}, 0});

  parallel_for(edges.size(), resolve_threads(options.threads), [&](std::size_t e) {
    const auto [a, b] = edges[e];
    if (!within_length(2.0 * dist[a][b], L_max)) return;
    std::vector<std::size_t> word{a, b};
    parts[e].extend(word, dist[a][b]);
  });

  Enumeration result;
  for (auto& part : parts) {
    result.skipped_geometric += part.skipped;
    for (auto& o : part.found) result.orbits.push_back(std::move(o));
  }
  std::sort(result.orbits.begin(), result.orbits.end(),
            [](const ClosedOrbit& x, const ClosedOrbit& y) {
              return std::tie(x.total_length, x.vertices) < std::tie(y.total_length, y.vertices);
            });

  if (options.merge_reversals) {
    std::vector<ClosedOrbit> kept;
    for (auto& o : result.orbits) {
      if (is_self_reverse(o)) {
        kept.push_back(std::move(o));
        continue;
      }
      std::vector<std::size_t> reversed(o.vertices.rbegin(), o.vertices.rend());
      if (o.vertices < canonical_word(reversed)) {
        o.merged_with_reverse = true;
        kept.push_back(std::move(o));
      }
    }
    result.orbits = std::move(kept);
  }
  return result;
}

}  // namespace diffrace
