#pragma once

// Leading wave-trace singularities and band-limited synthesis of the
// regularized cosine trace u(t). Only the leading symbol term is modelled.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "diffrace/error.hpp"
#include "diffrace/geometry.hpp"
#include "diffrace/holonomy.hpp"
#include "diffrace/orbits.hpp"
#include "diffrace/parallel.hpp"

namespace diffrace {

/// Low-frequency cutoff rho and high-frequency cosine taper.
///
/// rho is the C-infinity step 1 / (1 + exp(1/x - 1/(1-x))) on (0, 1), zero
/// below and one above. Its flatness at 0 keeps rho(x) x^{-m/2} integrable for
/// every corner count m.
struct SmoothingWindow {
  double lambda_max = 200.0;
  double taper_width = 40.0;

  friend bool operator==(const SmoothingWindow&, const SmoothingWindow&) = default;

  void validate() const {
    if (!(lambda_max > 1.0) || !(taper_width >= 0.0) || !(taper_width <= lambda_max - 1.0))
      throw Error(ErrorCode::InvalidWindow,
                  "need lambda_max > 1 and 0 <= taper_width <= lambda_max - 1");
  }

  double taper_start() const noexcept { return lambda_max - taper_width; }

  static double rho(double x) noexcept {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return 1.0 / (1.0 + std::exp(1.0 / x - 1.0 / (1.0 - x)));
  }

  double taper(double x) const noexcept {
    if (x <= taper_start()) return 1.0;
    if (x >= lambda_max) return 0.0;
    return 0.5 * (1.0 + std::cos(kPi * (x - taper_start()) / taper_width));
  }

  /// rho(x) * taper(x) * x^{-m/2}, evaluated in log form on (0, 1) so large m
  /// neither overflows nor produces 0 * inf.
  double weight(double x, std::size_t corners) const noexcept {
    if (x <= 0.0 || x >= lambda_max) return 0.0;
    const double half_m = 0.5 * static_cast<double>(corners);
    if (x >= 1.0) return taper(x) * std::pow(x, -half_m);
    const double z = 1.0 / x - 1.0 / (1.0 - x);
    const double softplus = z > 30.0 ? z : std::log1p(std::exp(z));
    return taper(x) * std::exp(-half_m * std::log(x) - softplus);
  }
};

struct SingularityEntry {
  double location = 0.0;           // L
  std::size_t corners = 0;         // m
  double order = 0.0;              // -m/2
  Complex coefficient;             // A
  ClosedOrbit orbit;
};

/// e^{-i m pi / 4}, exact on the eighth roots of unity.
inline Complex corner_phase(std::size_t m) {
  constexpr double h = 0.70710678118654752440;
  switch (m % 8) {
    case 0: return {1.0, 0.0};
    case 1: return {h, -h};
    case 2: return {0.0, -1.0};
    case 3: return {-h, -h};
    case 4: return {-1.0, 0.0};
    case 5: return {-h, h};
    case 6: return {0.0, 1.0};
    default: return {h, h};
  }
}

/// (2 pi)^{(m-2)/2} e^{-i m pi/4} L_0 / prod(l_i)^{1/2}: everything in the
/// amplitude except the orbit coefficient d.
inline Complex amplitude_prefactor(const ClosedOrbit& orbit) {
  const std::size_t m = orbit.corners();
  long double log_mag = 0.5L * (static_cast<long double>(m) - 2.0L) *
                            std::log(2.0L * std::acos(-1.0L)) +
                        std::log(static_cast<long double>(orbit.primitive_length));
  for (double l : orbit.segment_lengths) log_mag -= 0.5L * std::log(static_cast<long double>(l));
  return static_cast<double>(std::exp(log_mag)) * corner_phase(m);
}

/// Leading singularity at t = L of a closed orbit. An orbit flagged
/// merged_with_reverse carries the sum of its own and its reversal's d.
inline SingularityEntry leading_amplitude(const SolenoidConfig& config, const ClosedOrbit& orbit) {
  Complex d = orbit_coefficient(config, orbit).value;
  if (orbit.merged_with_reverse) d += orbit_coefficient(config, reverse_orbit(orbit)).value;
  SingularityEntry e;
  e.location = orbit.total_length;
  e.corners = orbit.corners();
  e.order = -0.5 * static_cast<double>(e.corners);
  e.coefficient = amplitude_prefactor(orbit) * d;
  e.orbit = orbit;
  return e;
}

inline std::vector<SingularityEntry> singularity_table(const SolenoidConfig& config, double L_max,
                                                       const EnumerationOptions& options = {}) {
  const auto found = enumerate_orbits(config, L_max, options);
  std::vector<SingularityEntry> table(found.orbits.size());
  parallel_for(table.size(), resolve_threads(options.threads), [&](std::size_t i) {
    table[i] = leading_amplitude(config, found.orbits[i]);
  });
  return table;
}

/// Integral over lambda in (0, lambda_max) of rho taper lambda^{-m/2} e^{i lambda s}.
///
/// The range is cut at 1 and at the taper start, and every piece is further
/// split into panels no longer than one oscillation period 2 pi / |s|. Each
/// panel is integrated with adaptive Gauss-Kronrod 7-15.
inline Complex band_integral(std::size_t corners, double s, const SmoothingWindow& window,
                             double rel_tol = 1e-9) {
  using boost::math::quadrature::gauss_kronrod;
  std::vector<double> knots{0.0, 1.0};
  if (window.taper_start() > 1.0) knots.push_back(window.taper_start());
  if (window.lambda_max > knots.back()) knots.push_back(window.lambda_max);

  const double period = s == 0.0 ? window.lambda_max : kTwoPi / std::abs(s);
  auto integrand = [&](double x) {
    return window.weight(x, corners) * Complex(std::cos(x * s), std::sin(x * s));
  };

  Complex total{};
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const double a = knots[k];
    const double b = knots[k + 1];
    const auto panels = static_cast<std::size_t>(std::ceil((b - a) / period));
    const double h = (b - a) / static_cast<double>(std::max<std::size_t>(panels, 1));
    for (std::size_t p = 0; p < std::max<std::size_t>(panels, 1); ++p) {
      const double lo = a + h * static_cast<double>(p);
      const double hi = p + 1 == panels ? b : lo + h;
      total += gauss_kronrod<double, 15>::integrate(integrand, lo, hi, 15, rel_tol);
    }
  }
  return total;
}

/// Uniform sampling grid t_i = start + i * step, i < count.
struct TimeGrid {
  double start = 0.0;
  double step = 0.0;
  std::size_t count = 0;

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

  double at(std::size_t i) const noexcept { return start + step * static_cast<double>(i); }
};

struct TraceSamples {
  std::vector<double> t;
  std::vector<double> values;                   // u(t_i), leading order
  std::vector<std::vector<double>> per_orbit;   // per_orbit[j][i], table order
};

struct SynthesisOptions {
  int threads = 1;
  bool keep_per_orbit = true;
  double rel_tol = 1e-9;
};

/// u(t) ~ sum over entries of 2 Re[A * band_integral(m, t - L)]. Summation is
/// in table order for every sample, so results are independent of threads.
inline TraceSamples synthesize_trace(const std::vector<SingularityEntry>& table,
                                     const SmoothingWindow& window, const TimeGrid& grid,
                                     const SynthesisOptions& options = {}) {
  window.validate();
  if (!(grid.step > 0.0) || grid.count == 0)
    throw Error(ErrorCode::BadParameter, "time grid needs a positive step and count");
  if (grid.step > 1.0 / window.lambda_max)
    throw Error(ErrorCode::GridTooCoarse, "grid step " + std::to_string(grid.step) +
                                              " exceeds 1/lambda_max = " +
                                              std::to_string(1.0 / window.lambda_max));

  TraceSamples out;
  out.t.resize(grid.count);
  out.values.assign(grid.count, 0.0);
  std::vector<std::vector<double>> parts(table.size(), std::vector<double>(grid.count, 0.0));

  parallel_for(grid.count, resolve_threads(options.threads), [&](std::size_t i) {
    const double t = grid.at(i);
    out.t[i] = t;
    double sum = 0.0;
    for (std::size_t j = 0; j < table.size(); ++j) {
      const auto& e = table[j];
      const double v =
          2.0 * (e.coefficient * band_integral(e.corners, t - e.location, window, options.rel_tol))
                    .real();
      parts[j][i] = v;
      sum += v;
    }
    out.values[i] = sum;
  });
  if (options.keep_per_orbit) out.per_orbit = std::move(parts);
  return out;
}

inline TraceSamples synthesize_trace(const SolenoidConfig& config, double L_max,
                                     const SmoothingWindow& window, const TimeGrid& grid,
                                     const SynthesisOptions& options = {}) {
  window.validate();
  if (grid.step > 1.0 / window.lambda_max)
    throw Error(ErrorCode::GridTooCoarse, "grid step exceeds 1/lambda_max");
  EnumerationOptions eo;
  eo.threads = options.threads;
  return synthesize_trace(singularity_table(config, L_max, eo), window, grid, options);
}

}  // namespace diffrace
