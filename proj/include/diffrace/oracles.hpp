#pragma once

// Slow, independent reference computations used to check the fast paths:
// quadrature instead of combinatorics, word search instead of anchored DFS,
// finite differences instead of closed-form Hessians, and fixed-rule
// panel doubling instead of adaptive Gauss-Kronrod.

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "diffrace/error.hpp"
#include "diffrace/geometry.hpp"
#include "diffrace/orbits.hpp"
#include "diffrace/trace.hpp"

namespace diffrace::oracle {

struct QuadratureSettings {
  double excision_eps = 1e-3;  // arc length cut out around an on-orbit solenoid
  std::size_t panels = 16;     // per segment
  double fd_step = 1e-3;       // relative finite-difference step

  void validate() const {
    if (!(excision_eps > 0.0)) throw Error(ErrorCode::BadParameter, "excision_eps must be positive");
    if (panels < 16) throw Error(ErrorCode::BadParameter, "panels must be at least 16");
    if (!(fd_step > 0.0 && fd_step < 0.1)) throw Error(ErrorCode::BadParameter, "fd_step out of range");
  }
};

struct PvWinding {
  double value = 0.0;   // Richardson-extrapolated
  double raw[3] = {};   // at eps, eps/2, eps/4
  double error_estimate = 0.0;
};

namespace detail {

// Re[(1/2 pi i) p.v. \oint dz / (z - z_k)] with a symmetric arc-length
// excision of radius eps around every passage of the orbit through s_k.
inline double pv_winding_at(const SolenoidConfig& config, const ClosedOrbit& orbit, std::size_t k,
                            double eps, std::size_t panels) {
  using boost::math::quadrature::gauss_kronrod;
  const Point zk = config.position(k);
  const std::size_t m = orbit.corners();
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t ia = orbit.vertices[i];
    const std::size_t ib = orbit.vertices[(i + 1) % m];
    const Point a = config.position(ia);
    const Point b = config.position(ib);
    const double len = distance(a, b);
    const Point dir = (1.0 / len) * (b - a);
    const double x0 = ia == k ? eps : 0.0;
    const double x1 = ib == k ? len - eps : len;
    // Im(dz / (z - zk)) per unit arc length.
    auto f = [&](double x) {
      const Point r = (a + x * dir) - zk;
      return cross(r, dir) / dot(r, r);
    };
    const double h = (x1 - x0) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
      const double lo = x0 + h * static_cast<double>(p);
      const double hi = p + 1 == panels ? x1 : lo + h;
      total += gauss_kronrod<double, 31>::integrate(f, lo, hi, 8, 1e-13);
    }
  }
  return total / kTwoPi;
}

}  // namespace detail

/// Numerical principal-value winding number of the orbit about solenoid k,
/// extrapolated over excision radii eps, eps/2, eps/4.
inline PvWinding pv_winding_numeric(const SolenoidConfig& config, const ClosedOrbit& orbit,
                                    std::size_t k, const QuadratureSettings& settings = {}) {
  settings.validate();
  if (k >= config.size()) throw Error(ErrorCode::BadParameter, "solenoid index out of range");
  const std::size_t m = orbit.corners();
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t a = orbit.vertices[i];
    const std::size_t b = orbit.vertices[(i + 1) % m];
    if ((a == k || b == k) && !(settings.excision_eps < 0.5 * orbit.segment_lengths[i]))
      throw Error(ErrorCode::ExcisionTooLarge,
                  "excision radius must be below half of every incident segment");
    if (a != k && b != k &&
        !(distance_to_segment(config.position(a), config.position(b), config.position(k)) >
          config.tolerances().collinear))
      throw Error(ErrorCode::PointOnSegment, "solenoid lies on a non-incident segment");
  }

  PvWinding out;
  double e = settings.excision_eps;
  for (double& r : out.raw) {
    r = detail::pv_winding_at(config, orbit, k, e, settings.panels);
    e *= 0.5;
  }
  const double r1 = 2.0 * out.raw[1] - out.raw[0];
  const double r2 = 2.0 * out.raw[2] - out.raw[1];
  out.value = (4.0 * r2 - r1) / 3.0;
  out.error_estimate = std::abs(out.value - out.raw[2]);
  return out;
}

using Word = std::vector<std::size_t>;

/// Exhaustive search over every index word up to the longest admissible
/// length, canonicalised afterwards by trying all rotations. Intended for
/// n <= 5 only.
inline std::vector<Word> brute_force_orbits(const SolenoidConfig& config, double L_max) {
  const std::size_t n = config.size();
  if (n > 5) throw Error(ErrorCode::InstanceTooLarge, "brute force is limited to n <= 5");
  if (n < 2 || !(L_max > 0.0)) return {};

  double dmin = INFINITY;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      dmin = std::min(dmin, distance(config.position(i), config.position(j)));
  const auto max_len = static_cast<std::size_t>(std::floor(L_max * (1.0 + kLengthSlack) / dmin));
  double words = static_cast<double>(n);
  for (std::size_t l = 1; l < max_len; ++l) words *= static_cast<double>(n - 1);
  if (words > 5e7) throw Error(ErrorCode::InstanceTooLarge, "too many candidate words");

  auto geometric_at = [&](Point prev, Point v, Point next) {
    const Point u = prev - v;
    const Point w = next - v;
    const double c = std::clamp(dot(u, w) / (norm(u) * norm(w)), -1.0, 1.0);
    return kPi - std::acos(c) <= config.tolerances().angle;
  };

  std::set<Word> classes;
  std::vector<Word> level;
  for (std::size_t a = 0; a < n; ++a) level.push_back({a});
  for (std::size_t len = 2; len <= max_len; ++len) {
    std::vector<Word> next_level;
    for (const auto& w : level)
      for (std::size_t c = 0; c < n; ++c)
        if (c != w.back()) {
          Word grown = w;
          grown.push_back(c);
          next_level.push_back(std::move(grown));
        }
    level = std::move(next_level);

    for (const auto& w : level) {
      if (w.front() == w.back()) continue;
      double total = 0.0;
      for (std::size_t i = 0; i < len; ++i)
        total += distance(config.position(w[i]), config.position(w[(i + 1) % len]));
      if (!(total <= L_max * (1.0 + kLengthSlack))) continue;
      bool geometric = false;
      for (std::size_t i = 0; i < len && !geometric; ++i)
        geometric = geometric_at(config.position(w[(i + len - 1) % len]), config.position(w[i]),
                                 config.position(w[(i + 1) % len]));
      if (geometric) continue;
      Word best = w;
      for (std::size_t r = 1; r < len; ++r) {
        Word rot(w.begin() + static_cast<std::ptrdiff_t>(r), w.end());
        rot.insert(rot.end(), w.begin(), w.begin() + static_cast<std::ptrdiff_t>(r));
        best = std::min(best, rot);
      }
      classes.insert(std::move(best));
    }
  }
  return {classes.begin(), classes.end()};
}

struct HessianCheck {
  int signature = 0;
  double det = 0.0;            // finite-difference determinant
  double det_expected = 0.0;   // lambda * l * r_z / rbar_z
  Eigen::Matrix3d hessian;     // variables (mu, r_z, theta_z)
};

/// Finite-difference Hessian of the two-leg phase
///   lambda (t1 - r_z - r') + mu (t2 - rbar_z(r_z, theta_z) - rbar'')
/// in (mu, r_z, theta_z) at the critical point theta_z = 0, mu = lambda, where
/// rbar_z is the distance from z to the next corner at distance l. The
/// critical point lies between the corners, so rbar_z must equal l - r_z.
inline HessianCheck stationary_phase_hessian(double r_z, double rbar_z, double l, double lambda,
                                             const QuadratureSettings& settings = {}) {
  settings.validate();
  if (!(r_z > 0.0 && rbar_z > 0.0 && l > 0.0 && lambda > 0.0))
    throw Error(ErrorCode::BadParameter, "all inputs must be positive");
  if (!(std::abs(r_z + rbar_z - l) <= 1e-9 * l))
    throw Error(ErrorCode::BadParameter, "critical point must lie on the segment: need r_z + rbar_z = l");

  // Stable law of cosines: rbar^2 = (l - r)^2 + 4 r l sin^2(theta / 2).
  auto rbar = [l](double r, double theta) {
    const double s = std::sin(0.5 * theta);
    return std::sqrt((l - r) * (l - r) + 4.0 * r * l * s * s);
  };
  const double r_prime = 0.5 * l;
  const double rbar_far = 0.5 * l;
  const double t1 = r_z + r_prime;
  const double t2 = rbar_z + rbar_far;
  auto phase = [&](const Eigen::Vector3d& x) {
    return lambda * (t1 - x[1] - r_prime) + x[0] * (t2 - rbar(x[1], x[2]) - rbar_far);
  };

  const Eigen::Vector3d x0(lambda, r_z, 0.0);
  const Eigen::Vector3d scale(lambda, std::min(r_z, rbar_z), 1.0);
  // Central second differences, Richardson-combined over steps h and h/2.
  auto second = [&](int i, int j, double h) {
    Eigen::Vector3d ei = Eigen::Vector3d::Zero(), ej = Eigen::Vector3d::Zero();
    ei[i] = h * scale[i];
    ej[j] = h * scale[j];
    if (i == j)
      return (phase(x0 + ei) - 2.0 * phase(x0) + phase(x0 - ei)) / (ei[i] * ei[i]);
    return (phase(x0 + ei + ej) - phase(x0 + ei - ej) - phase(x0 - ei + ej) + phase(x0 - ei - ej)) /
           (4.0 * ei[i] * ej[j]);
  };

  HessianCheck out;
  const double h = settings.fd_step;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      const double v = (4.0 * second(i, j, 0.5 * h) - second(i, j, h)) / 3.0;
      out.hessian(i, j) = v;
      out.hessian(j, i) = v;
    }

  out.det = out.hessian.determinant();
  out.det_expected = lambda * l * r_z / rbar_z;

  // Eigenvalue signs are scale free; normalise before the degeneracy test.
  const double norm_max = out.hessian.cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(out.hessian / norm_max);
  for (int i = 0; i < 3; ++i) {
    const double ev = eig.eigenvalues()[i];
    if (std::abs(ev) < 1e-8) throw Error(ErrorCode::DegenerateHessian, "near-zero eigenvalue");
    out.signature += ev > 0.0 ? 1 : -1;
  }
  if (!(std::abs(out.det - out.det_expected) <= 1e-6 * std::abs(out.det_expected)))
    throw Error(ErrorCode::HessianMismatch,
                "finite-difference determinant " + std::to_string(out.det) + " vs expected " +
                    std::to_string(out.det_expected));
  return out;
}

struct ReferenceValue {
  Complex value;          // A * integral of rho taper lambda^{-m/2} e^{i lambda (t - L)}
  double error_estimate = 0.0;
};

/// Half-wave contribution of one singularity entry at time t, by composite
/// Simpson on fixed pieces [0,1], [1, taper start], [taper start, lambda_max],
/// doubling the panel count until successive estimates agree to `tol`.
/// The cosine-trace sample is 2 Re(value).
inline ReferenceValue quadrature_trace_reference(const SingularityEntry& entry,
                                                 const SmoothingWindow& window, double t,
                                                 double tol = 1e-11, int max_doublings = 24) {
  window.validate();
  if (entry.coefficient == Complex{}) return {};
  const double s = t - entry.location;
  auto f = [&](double x) {
    return window.weight(x, entry.corners) * std::polar(1.0, x * s);
  };

  std::vector<double> knots{0.0, 1.0};
  if (window.taper_start() > 1.0) knots.push_back(window.taper_start());
  if (window.lambda_max > knots.back()) knots.push_back(window.lambda_max);

  ReferenceValue out;
  Complex total{};
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const double a = knots[k];
    const double b = knots[k + 1];
    std::size_t n = 64;
    double h = (b - a) / static_cast<double>(n);
    Complex trap = 0.5 * (f(a) + f(b));
    for (std::size_t i = 1; i < n; ++i) trap += f(a + h * static_cast<double>(i));
    Complex t_prev = trap * h;
    Complex simpson_prev{};
    bool converged = false;
    for (int d = 0; d < max_doublings; ++d) {
      Complex mid{};
      for (std::size_t i = 0; i < n; ++i) mid += f(a + h * (static_cast<double>(i) + 0.5));
      trap += mid;
      n *= 2;
      h *= 0.5;
      const Complex t_next = trap * h;
      const Complex simpson = (4.0 * t_next - t_prev) / 3.0;
      if (d > 0 && std::abs(simpson - simpson_prev) < tol) {
        total += simpson;
        out.error_estimate += std::abs(simpson - simpson_prev) / 15.0;
        converged = true;
        break;
      }
      simpson_prev = simpson;
      t_prev = t_next;
    }
    if (!converged) throw Error(ErrorCode::NoConvergence, "panel doubling did not converge");
  }
  out.value = entry.coefficient * total;
  out.error_estimate *= std::abs(entry.coefficient);
  return out;
}

}  // namespace diffrace::oracle
