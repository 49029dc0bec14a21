// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "diffrace/report.hpp"
#include "../fixtures.hpp"

using namespace diffrace;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::vector<std::size_t> convex_hull(const SolenoidConfig& c) {
  std::vector<std::size_t> idx(c.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) {
    return std::pair(c.position(a).x, c.position(a).y) < std::pair(c.position(b).x, c.position(b).y);
  });
  std::vector<std::size_t> h;
  for (int pass = 0; pass < 2; ++pass) {
    const std::size_t base = h.size();
    for (auto i : idx) {
      while (h.size() >= base + 2 &&
             twice_signed_area(c.position(h[h.size() - 2]), c.position(h.back()), c.position(i)) <= 0)
        h.pop_back();
      h.push_back(i);
    }
    h.pop_back();
    std::reverse(idx.begin(), idx.end());
  }
  return h;
}

// (e^{-i t1} + e^{i t2}) / (cos t1 + cos t2) against e^{-i beta/2} / cos(beta/2),
// beta = t2 - t1, over 10^4 random pairs. The kernel's true invariant form is
// the conjugate e^{+i beta/2} / cos(beta/2); its agreement is reported too.
Outcome diffraction_identity() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> angle(-kPi, kPi), beta_d(-kPi + 1e-3, kPi - 1e-3);
  double stated = 0.0, conjugate = 0.0;
  for (int n = 0; n < 10000;) {
    const double t1 = angle(rng), beta = beta_d(rng), t2 = t1 + beta;
    if (std::abs(std::cos(0.5 * (t1 + t2))) < 1e-2) continue;
    const Complex lhs = (std::polar(1.0, -t1) + std::polar(1.0, t2)) / (std::cos(t1) + std::cos(t2));
    const Complex rhs = std::polar(1.0, -0.5 * beta) / std::cos(0.5 * beta);
    stated = std::max(stated, std::abs(lhs - rhs) / std::abs(rhs));
    conjugate = std::max(conjugate, std::abs(lhs - std::conj(rhs)) / std::abs(rhs));
    ++n;
  }
  return {stated < 1e-12, "max rel diff with e^{-i beta/2}: " + num(stated) +
                              "; with e^{+i beta/2}: " + num(conjugate)};
}

Outcome winding_oracle() {
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<int> pick(0, 3);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto c = fixture::random_scene(rng, 4);
    const auto o = fixture::random_orbit(rng, c, 6);
    const auto k = static_cast<std::size_t>(pick(rng));
    oracle::QuadratureSettings qs;
    qs.excision_eps = 0.2 * *std::min_element(o.segment_lengths.begin(), o.segment_lengths.end());
    worst = std::max(worst, std::abs(fractional_winding(c, o, k).value -
                                     oracle::pv_winding_numeric(c, o, k, qs).value));
  }
  double vertex = 0.0;
  int polygons = 0;
  for (int i = 0; i < 100; ++i) {
    const auto c = fixture::random_scene(rng, 5);
    const auto hull = convex_hull(c);
    if (hull.size() < 3) continue;
    for (const auto& word : {hull, std::vector<std::size_t>(hull.rbegin(), hull.rend())}) {
      const auto o = orbit_geometry(c, word);
      ++polygons;
      for (std::size_t l = 0; l < o.corners(); ++l)
        vertex = std::max(vertex, std::abs(fractional_winding(c, o, o.vertices[l]).value +
                                           o.angles[l] / (2 * kPi)));
    }
  }
  return {worst < 1e-8 && vertex < 1e-10,
          "max |w - pv| " + num(worst) + " over 100 cases; max vertex |w + beta/2pi| " + num(vertex) +
              " over " + std::to_string(polygons) + " convex orbits"};
}

Outcome enumeration_exactness() {
  std::mt19937_64 rng(303);
  int scenes = 0, mismatches = 0;
  for (std::size_t n = 2; n <= 4; ++n)
    for (int i = 0; i < 10; ++i) {
      const auto c = fixture::random_scene(rng, n);
      for (double factor : {2.5, 5.0, 8.0}) {
        const double L_max = factor * fixture::min_distance(c);
        std::vector<oracle::Word> fast;
        for (const auto& o : enumerate_orbits(c, L_max).orbits) fast.push_back(o.vertices);
        std::sort(fast.begin(), fast.end());
        mismatches += fast != oracle::brute_force_orbits(c, L_max);
        ++scenes;
      }
    }
  const auto tri = enumerate_orbits(fixture::triangle(), 3.0).orbits.size();
  return {mismatches == 0 && tri == 5, std::to_string(mismatches) + " mismatches over " +
                                           std::to_string(scenes) + " (scene, L_max) pairs; triangle classes " +
                                           std::to_string(tri)};
}

Outcome closed_form_amplitudes() {
  const auto c = fixture::two_solenoids();
  const auto a = leading_amplitude(c, orbit_geometry(c, std::vector<std::size_t>{0, 1}));
  const auto b = leading_amplitude(c, orbit_geometry(c, std::vector<std::size_t>{0, 1, 0, 1}));
  const double ea = std::abs(a.coefficient - Complex(0.0, -2.0));
  const double eb = std::abs(b.coefficient - Complex(-4.0 * kPi, 0.0));
  const bool ok = std::abs(a.location - 2.0) < 1e-12 && a.order == -1.0 && ea < 1e-12 &&
                  std::abs(b.location - 4.0) < 1e-12 && b.order == -2.0 && eb < 1e-12;
  return {ok, "|A - (-2i)| " + num(ea) + ", |A - (-4 pi)| " + num(eb)};
}

Outcome conjugation_symmetry() {
  std::mt19937_64 rng(505);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto c = fixture::random_scene(rng, 2 + i % 4);
    const auto o = fixture::random_orbit(rng, c, 8);
    const Complex d = orbit_coefficient(c, o).value;
    const Complex dr = orbit_coefficient(c, reverse_orbit(o)).value;
    worst = std::max(worst, std::abs(dr - std::conj(d)) / std::abs(d));
  }
  return {worst < 1e-12, "max rel |d_rev - conj(d)| " + num(worst)};
}

Outcome stationary_phase() {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> len(0.1, 5.0), frac(0.05, 0.95), lam(0.5, 500.0);
  int bad_signature = 0;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double l = len(rng), r = frac(rng) * l, lambda = lam(rng);
    try {
      const auto h = oracle::stationary_phase_hessian(r, l - r, l, lambda);
      bad_signature += h.signature != -1;
      worst = std::max(worst, std::abs(h.det - h.det_expected) / std::abs(h.det_expected));
    } catch (const Error&) {
      ++bad_signature;
    }
  }
  return {bad_signature == 0 && worst < 1e-6,
          std::to_string(bad_signature) + " bad signatures; max rel det error " + num(worst)};
}

struct Profile {
  std::vector<double> t, a;  // |u| near one singularity
};

Profile orbit_profile(const SingularityEntry& e, const SmoothingWindow& w, double step) {
  const double half = 0.5;
  const auto count = static_cast<std::size_t>(2 * half / step) + 1;
  const auto s = synthesize_trace({e}, w, {e.location - half, step, count});
  Profile p{s.t, {}};
  for (double v : s.values) p.a.push_back(std::abs(v));
  return p;
}

double fwhm(const Profile& p) {
  const auto peak = std::max_element(p.a.begin(), p.a.end()) - p.a.begin();
  const double half = 0.5 * p.a[peak];
  auto cross = [&](std::ptrdiff_t from, int dir) {
    std::ptrdiff_t i = from;
    while (i + dir >= 0 && i + dir < static_cast<std::ptrdiff_t>(p.a.size()) && p.a[i + dir] >= half) i += dir;
    const std::ptrdiff_t j = i + dir;
    if (j < 0 || j >= static_cast<std::ptrdiff_t>(p.a.size())) return p.t[i];
    return p.t[i] + (p.t[j] - p.t[i]) * (p.a[i] - half) / (p.a[i] - p.a[j]);
  };
  return cross(peak, 1) - cross(peak, -1);
}

Outcome trace_synthesis() {
  const auto c = fixture::two_solenoids();
  const SmoothingWindow w;
  const double step = 1.0 / w.lambda_max;
  const auto table = singularity_table(c, 5.0);

  // (a) grid maximum of |u| near each orbit length.
  const TimeGrid grid{step, step, static_cast<std::size_t>(5.0 / step)};
  const auto u = synthesize_trace(table, w, grid);
  bool located = true;
  std::string where;
  for (const auto& e : table) {
    std::size_t best = 0;
    double best_v = -1.0;
    for (std::size_t i = 0; i < grid.count; ++i)
      if (std::abs(grid.at(i) - e.location) < 0.5 && std::abs(u.values[i]) > best_v) {
        best_v = std::abs(u.values[i]);
        best = i;
      }
    const double off = std::abs(grid.at(best) - e.location) / step;
    located = located && off <= 1.0 + 1e-9;
    where += " L=" + num(e.location) + ":" + num(off) + " steps";
  }

  // (b) synthesis against the independent quadrature at 20 random times.
  std::mt19937_64 rng(707);
  std::uniform_real_distribution<double> tdist(0.0, 5.0);
  double ref_err = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double t = tdist(rng);
    const auto s = synthesize_trace(table, w, {t, step, 1});
    double ref = 0.0;
    for (const auto& e : table) ref += 2.0 * oracle::quadrature_trace_reference(e, w, t).value.real();
    ref_err = std::max(ref_err, std::abs(s.values[0] - ref));
  }

  // (c) full width at half maximum when the band limit doubles.
  bool halves = true;
  std::string ratios;
  const SmoothingWindow wide{2 * w.lambda_max, 2 * w.taper_width};
  for (const auto& e : table) {
    const double fine = 0.25 / wide.lambda_max;
    const double r = fwhm(orbit_profile(e, w, fine)) / fwhm(orbit_profile(e, wide, fine));
    halves = halves && std::abs(r - 2.0) <= 0.2;
    ratios += " L=" + num(e.location) + ":" + num(r);
  }
  return {located && ref_err < 1e-7 && halves,
          std::string("(a) ") + (located ? "pass" : "fail") + where + "; (b) " +
              (ref_err < 1e-7 ? "pass" : "fail") + " max |synth - ref| " + num(ref_err) + "; (c) " +
              (halves ? "pass" : "fail") + " width ratio" + ratios};
}

Outcome resonance_strips() {
  const double d = 1.0;
  bool decreasing = true;
  double prev = INFINITY, last = 0.0;
  for (std::uint64_t k = 1; k <= 10000; ++k) {
    last = strip_threshold(2.0 * k * d, 2 * k, 1.0, 0.0).nu;
    decreasing = decreasing && last < prev;
    prev = last;
  }
  const auto rep = best_strip(fixture::two_solenoids(d), 1.0, 0.1, 100, 5.0);
  const auto count = counting_lower_bound(1.0, 1e4, 0.5).count;
  const bool ok = decreasing && std::abs(last - 1.0 / (2 * d)) < 1e-3 &&
                  rep.limit == 1.0 / (2.0 * d) + 0.1 && count == 100;
  return {ok, std::string(decreasing ? "decreasing" : "not decreasing") + ", nu_10000 - 1/(2d) = " +
                  num(last - 0.5) + ", limit " + num(rep.limit) + ", count " + std::to_string(count)};
}

Outcome determinism() {
  const std::vector<std::string> configs{
      R"({"solenoids": [{"x": 0, "y": 0, "flux": 0.5}, {"x": 1, "y": 0, "flux": 0.5}], "L_max": 5,
          "verify": {"cases": 5}})",
      R"({"solenoids": [{"x": 0, "y": 0, "flux": 0.5}, {"x": 1.1, "y": 0.1, "flux": 0.3},
                        {"x": 0.4, "y": 0.9, "flux": 0.7}, {"x": 1.3, "y": 1.2, "flux": 0.45}],
          "L_max": 3.5, "trace": {"lambda_max": 100, "taper_width": 20}, "verify": {"cases": 5}})"};
  int compared = 0, differing = 0;
  for (const auto& text : configs) {
    const auto cfg = parse_config(text);
    for (auto cmd : {Command::Orbits, Command::Trace, Command::Resonances, Command::Verify}) {
      const auto a = render(cmd, cfg, {1, 7});
      const auto b = render(cmd, cfg, {1, 7});
      const auto c = render(cmd, cfg, {4, 7});
      differing += (a != b) + (a != c);
      compared += 2;
    }
  }
  return {differing == 0, std::to_string(differing) + " of " + std::to_string(compared) +
                              " report-set comparisons differ"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*check)();
  };
  const Criterion criteria[] = {
      {"diffraction identity", diffraction_identity},
      {"winding oracle equivalence", winding_oracle},
      {"orbit enumeration exactness", enumeration_exactness},
      {"closed-form amplitudes", closed_form_amplitudes},
      {"conjugation symmetry", conjugation_symmetry},
      {"stationary-phase Hessian", stationary_phase},
      {"trace synthesis", trace_synthesis},
      {"resonance strips", resonance_strips},
      {"determinism", determinism},
  };
  int failed = 0, index = 0;
  for (const auto& c : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::printf("[%s] %d %s: %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", index, c.name, o.detail.c_str(), secs);
  }
  std::printf("%d of %d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
