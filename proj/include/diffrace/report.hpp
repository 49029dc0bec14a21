#pragma once

// Run configuration (strict JSON schema), command dispatch and report
// rendering. Every number in a report is printed with 17 significant digits,
// '.' as decimal separator and '\n' line endings, so reports are byte-stable.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "diffrace/error.hpp"
#include "diffrace/geometry.hpp"
#include "diffrace/holonomy.hpp"
#include "diffrace/oracles.hpp"
#include "diffrace/orbits.hpp"
#include "diffrace/resonance.hpp"
#include "diffrace/trace.hpp"

namespace diffrace {

struct TraceParams {
  SmoothingWindow window;
  TimeGrid grid;
  friend bool operator==(const TraceParams&, const TraceParams&) = default;
};

struct ResonanceParams {
  double n1 = kDefaultN1;
  double epsilon = 0.1;
  double delta = 0.5;
  double r = 1e4;
  std::uint64_t rep_max = 10000;
  friend bool operator==(const ResonanceParams&, const ResonanceParams&) = default;
};

struct VerifyParams {
  std::uint64_t cases = 20;
  double excision_eps = 1e-3;
  friend bool operator==(const VerifyParams&, const VerifyParams&) = default;
};

struct OutputParams {
  std::string directory = ".";
  std::string format = "csv";  // table format: "csv" or "json"
  friend bool operator==(const OutputParams&, const OutputParams&) = default;
};

struct RunConfig {
  SceneInput scene;
  double L_max = 0.0;
  bool merge_reversals = false;
  TraceParams trace;
  ResonanceParams resonances;
  VerifyParams verify;
  OutputParams output;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

using Json = nlohmann::ordered_json;

class SchemaReader {
 public:
  std::vector<Violation> problems;

  void schema(const std::string& path, const std::string& msg) {
    problems.push_back({ErrorCode::SchemaError, path, msg});
  }

  // Reports every key of `obj` not in `allowed`.
  void only_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
      bool known = false;
      for (const char* a : allowed) known = known || key == a;
      if (!known)
        problems.push_back({ErrorCode::UnknownKey, join(path, key), "unknown key \"" + key + "\""});
    }
  }

  const Json* object(const Json& parent, const char* key, const std::string& path, bool required) {
    if (!parent.contains(key)) {
      if (required) schema(join(path, key), "missing required object");
      return nullptr;
    }
    const Json& v = parent.at(key);
    if (!v.is_object()) {
      schema(join(path, key), "expected an object");
      return nullptr;
    }
    return &v;
  }

  // Reads a finite number into `out`, checking `ok`; leaves `out` untouched if absent.
  template <class Pred>
  void number(const Json& parent, const char* key, const std::string& path, double& out,
              bool required, Pred ok, const char* range) {
    const std::string where = join(path, key);
    if (!parent.contains(key)) {
      if (required) schema(where, "missing required number");
      return;
    }
    const Json& v = parent.at(key);
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      schema(where, "expected a finite number");
      return;
    }
    const double x = v.get<double>();
    if (!ok(x)) {
      schema(where, std::string("value out of range, expected ") + range);
      return;
    }
    out = x;
  }

  void count(const Json& parent, const char* key, const std::string& path, std::uint64_t& out,
             std::uint64_t lo, std::uint64_t hi) {
    const std::string where = join(path, key);
    if (!parent.contains(key)) return;
    const Json& v = parent.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      schema(where, "expected a non-negative integer");
      return;
    }
    const auto x = v.get<std::uint64_t>();
    if (x < lo || x > hi) {
      schema(where, "value out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      return;
    }
    out = x;
  }

  void text(const Json& parent, const char* key, const std::string& path, std::string& out) {
    if (!parent.contains(key)) return;
    const Json& v = parent.at(key);
    if (!v.is_string()) {
      schema(join(path, key), "expected a string");
      return;
    }
    out = v.get<std::string>();
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
};

inline std::string fmt(double v) {
  if (v == 0.0) v = 0.0;  // no "-0"
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void dump(const Json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string pad_in(static_cast<std::size_t>(indent + 1) * 2, ' ');
  if (j.is_object()) {
    if (j.empty()) { out += "{}"; return; }
    out += "{\n";
    std::size_t i = 0;
    for (const auto& [key, value] : j.items()) {
      out += pad_in + Json(key).dump() + ": ";
      dump(value, out, indent + 1);
      out += ++i < j.size() ? ",\n" : "\n";
    }
    out += pad + "}";
  } else if (j.is_array()) {
    if (j.empty()) { out += "[]"; return; }
    out += "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      out += pad_in;
      dump(j[i], out, indent + 1);
      out += i + 1 < j.size() ? ",\n" : "\n";
    }
    out += pad + "]";
  } else if (j.is_number_float()) {
    out += fmt(j.get<double>());
  } else {
    out += j.dump();
  }
}

}  // namespace detail

/// Pretty JSON with 17-significant-digit floats and a trailing newline.
inline std::string to_report_json(const nlohmann::ordered_json& j) {
  std::string out;
  detail::dump(j, out, 0);
  out += '\n';
  return out;
}

/// Parses and validates a run configuration. Throws ValidationError listing
/// every SchemaError / UnknownKey found, each with a path to the field.
inline RunConfig parse_config(const std::string& text) {
  using detail::Json;
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError({{ErrorCode::SchemaError, "", std::string("malformed JSON: ") + e.what()}});
  }
  if (!root.is_object()) throw ValidationError({{ErrorCode::SchemaError, "", "expected a JSON object"}});

  detail::SchemaReader rd;
  RunConfig cfg;
  rd.only_keys(root, "", {"solenoids", "tolerances", "L_max", "merge_reversals", "trace",
                          "resonances", "verify", "output"});

  auto positive = [](double x) { return x > 0.0; };
  auto non_negative = [](double x) { return x >= 0.0; };
  auto any = [](double) { return true; };

  if (!root.contains("solenoids") || !root["solenoids"].is_array() || root["solenoids"].empty()) {
    rd.schema("solenoids", "expected a non-empty array");
  } else {
    const auto& arr = root["solenoids"];
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string path = "solenoids[" + std::to_string(i) + "]";
      if (!arr[i].is_object()) {
        rd.schema(path, "expected an object with x, y, flux");
        continue;
      }
      rd.only_keys(arr[i], path, {"x", "y", "flux"});
      Point p{NAN, NAN};
      double flux = NAN;
      rd.number(arr[i], "x", path, p.x, true, any, "a finite number");
      rd.number(arr[i], "y", path, p.y, true, any, "a finite number");
      rd.number(arr[i], "flux", path, flux, true, [](double a) { return a > 0.0 && a < 1.0; },
                "(0, 1)");
      cfg.scene.positions.push_back(p);
      cfg.scene.fluxes.push_back(flux);
    }
  }

  if (const Json* tol = rd.object(root, "tolerances", "", false)) {
    rd.only_keys(*tol, "tolerances", {"collinear", "angle"});
    rd.number(*tol, "collinear", "tolerances", cfg.scene.tol.collinear, false, non_negative, ">= 0");
    rd.number(*tol, "angle", "tolerances", cfg.scene.tol.angle, false,
              [](double x) { return x >= 0.0 && x < 1.0; }, "[0, 1)");
  }

  rd.number(root, "L_max", "", cfg.L_max, true, positive, "> 0");
  if (root.contains("merge_reversals")) {
    if (root["merge_reversals"].is_boolean()) cfg.merge_reversals = root["merge_reversals"].get<bool>();
    else rd.schema("merge_reversals", "expected a boolean");
  }

  // Trace grid defaults depend on lambda_max and L_max: step 1/lambda_max,
  // start one step in, enough samples to cover (0, L_max].
  double t_start = NAN, t_step = NAN;
  std::uint64_t t_count = 0;
  if (const Json* tr = rd.object(root, "trace", "", false)) {
    rd.only_keys(*tr, "trace", {"lambda_max", "taper_width", "t_start", "t_step", "t_count"});
    rd.number(*tr, "lambda_max", "trace", cfg.trace.window.lambda_max, false,
              [](double x) { return x > 1.0; }, "> 1");
    rd.number(*tr, "taper_width", "trace", cfg.trace.window.taper_width, false, non_negative, ">= 0");
    rd.number(*tr, "t_start", "trace", t_start, false, any, "a finite number");
    rd.number(*tr, "t_step", "trace", t_step, false, positive, "> 0");
    rd.count(*tr, "t_count", "trace", t_count, 1, 10'000'000);
  }
  if (!(cfg.trace.window.taper_width <= cfg.trace.window.lambda_max - 1.0))
    rd.schema("trace.taper_width", "must not exceed lambda_max - 1");
  cfg.trace.grid.step = std::isnan(t_step) ? 1.0 / cfg.trace.window.lambda_max : t_step;
  cfg.trace.grid.start = std::isnan(t_start) ? cfg.trace.grid.step : t_start;
  if (t_count == 0 && cfg.L_max > 0.0)
    t_count = static_cast<std::uint64_t>(std::floor((cfg.L_max - cfg.trace.grid.start) / cfg.trace.grid.step + 1e-9)) + 1;
  cfg.trace.grid.count = static_cast<std::size_t>(std::max<std::uint64_t>(t_count, 1));

  if (const Json* rs = rd.object(root, "resonances", "", false)) {
    rd.only_keys(*rs, "resonances", {"n1", "epsilon", "delta", "r", "rep_max"});
    rd.number(*rs, "n1", "resonances", cfg.resonances.n1, false, positive, "> 0");
    rd.number(*rs, "epsilon", "resonances", cfg.resonances.epsilon, false, non_negative, ">= 0");
    rd.number(*rs, "delta", "resonances", cfg.resonances.delta, false,
              [](double x) { return x > 0.0 && x < 1.0; }, "(0, 1)");
    rd.number(*rs, "r", "resonances", cfg.resonances.r, false, positive, "> 0");
    rd.count(*rs, "rep_max", "resonances", cfg.resonances.rep_max, 1, 1'000'000'000);
  }

  if (const Json* vf = rd.object(root, "verify", "", false)) {
    rd.only_keys(*vf, "verify", {"cases", "excision_eps"});
    rd.count(*vf, "cases", "verify", cfg.verify.cases, 1, 100'000);
    rd.number(*vf, "excision_eps", "verify", cfg.verify.excision_eps, false, positive, "> 0");
  }

  if (const Json* out = rd.object(root, "output", "", false)) {
    rd.only_keys(*out, "output", {"directory", "format"});
    rd.text(*out, "directory", "output", cfg.output.directory);
    rd.text(*out, "format", "output", cfg.output.format);
    if (cfg.output.format != "csv" && cfg.output.format != "json")
      rd.schema("output.format", "expected \"csv\" or \"json\"");
  }

  if (!rd.problems.empty()) throw ValidationError(std::move(rd.problems));
  return cfg;
}

/// Inverse of parse_config: every resolved field is written out explicitly.
inline std::string serialize_config(const RunConfig& cfg) {
  using detail::Json;
  Json root;
  Json sol = Json::array();
  for (std::size_t i = 0; i < cfg.scene.positions.size(); ++i)
    sol.push_back({{"x", cfg.scene.positions[i].x},
                   {"y", cfg.scene.positions[i].y},
                   {"flux", cfg.scene.fluxes[i]}});
  root["solenoids"] = sol;
  root["tolerances"] = {{"collinear", cfg.scene.tol.collinear}, {"angle", cfg.scene.tol.angle}};
  root["L_max"] = cfg.L_max;
  root["merge_reversals"] = cfg.merge_reversals;
  root["trace"] = {{"lambda_max", cfg.trace.window.lambda_max},
                   {"taper_width", cfg.trace.window.taper_width},
                   {"t_start", cfg.trace.grid.start},
                   {"t_step", cfg.trace.grid.step},
                   {"t_count", static_cast<std::uint64_t>(cfg.trace.grid.count)}};
  root["resonances"] = {{"n1", cfg.resonances.n1},
                        {"epsilon", cfg.resonances.epsilon},
                        {"delta", cfg.resonances.delta},
                        {"r", cfg.resonances.r},
                        {"rep_max", cfg.resonances.rep_max}};
  root["verify"] = {{"cases", cfg.verify.cases}, {"excision_eps", cfg.verify.excision_eps}};
  root["output"] = {{"directory", cfg.output.directory}, {"format", cfg.output.format}};
  return to_report_json(root);
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError({{ErrorCode::SchemaError, path.string(), "cannot read config file"}});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

enum class Command { Orbits, Trace, Resonances, Verify };

inline Command parse_command(const std::string& name) {
  if (name == "orbits") return Command::Orbits;
  if (name == "trace") return Command::Trace;
  if (name == "resonances") return Command::Resonances;
  if (name == "verify") return Command::Verify;
  throw Error(ErrorCode::BadParameter, "unknown command \"" + name + "\"");
}

struct RunOptions {
  int threads = 0;           // 0: DIFFRACE_THREADS, then hardware concurrency
  std::uint64_t seed = 1;    // for `verify` sampling
};

/// Report files of one command, keyed by file name, in write order.
using ReportSet = std::vector<std::pair<std::string, std::string>>;

/// Error raised by a pipeline stage, labelled with the stage that failed.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.code(), "stage '" + stage + "': " + cause.what()), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

namespace detail {

template <class F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  }
}

inline std::string csv_complex(Complex z) {
  return fmt(z.real()) + "," + fmt(z.imag()) + "," + fmt(std::abs(z)) + "," + fmt(std::arg(z));
}

inline Json complex_json(Complex z) { return Json{{"re", z.real()}, {"im", z.imag()}}; }

// Deterministic uniform draws in [lo, hi) independent of the standard
// library's distribution implementations.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) {
    const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

 private:
  std::mt19937_64 gen_;
};

inline ReportSet render_orbits(const SolenoidConfig& config, const RunConfig& cfg, int threads) {
  EnumerationOptions eo{threads, cfg.merge_reversals};
  const auto found = stage("orbit enumeration", [&] { return enumerate_orbits(config, cfg.L_max, eo); });
  std::vector<SingularityEntry> table(found.orbits.size());
  std::vector<OrbitCoefficient> coeffs(found.orbits.size());
  stage("amplitudes", [&] {
    parallel_for(table.size(), resolve_threads(threads), [&](std::size_t i) {
      table[i] = leading_amplitude(config, found.orbits[i]);
      coeffs[i] = orbit_coefficient(config, found.orbits[i]);
    });
    return 0;
  });

  ReportSet out;
  if (cfg.output.format == "csv") {
    std::string csv = "sequence,m,L,L0,repetition,order,coeff_re,coeff_im,coeff_abs,coeff_arg\n";
    for (const auto& e : table)
      csv += word_label(e.orbit.vertices) + "," + std::to_string(e.corners) + "," +
             fmt(e.location) + "," + fmt(e.orbit.primitive_length) + "," +
             std::to_string(e.orbit.repetition) + "," + fmt(e.order) + "," +
             csv_complex(e.coefficient) + "\n";
    out.emplace_back("orbits.csv", std::move(csv));
  } else {
    Json rows = Json::array();
    for (const auto& e : table)
      rows.push_back({{"sequence", word_label(e.orbit.vertices)},
                      {"m", e.corners},
                      {"L", e.location},
                      {"L0", e.orbit.primitive_length},
                      {"repetition", e.orbit.repetition},
                      {"order", e.order},
                      {"coeff_re", e.coefficient.real()},
                      {"coeff_im", e.coefficient.imag()},
                      {"coeff_abs", std::abs(e.coefficient)},
                      {"coeff_arg", std::arg(e.coefficient)}});
    out.emplace_back("orbits.json", to_report_json(rows));
  }

  const auto ref = free_reference_params(config);
  Json breakdown;
  breakdown["label"] = "leading order";
  breakdown["L_max"] = cfg.L_max;
  breakdown["merge_reversals"] = cfg.merge_reversals;
  breakdown["skipped_geometric"] = found.skipped_geometric;
  breakdown["free_reference"] = {{"total_flux", ref.total_flux},
                                 {"center", {ref.center.x, ref.center.y}}};
  Json orbits = Json::array();
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& e = table[i];
    const auto& c = coeffs[i];
    Json factors = Json::array();
    for (const auto& f : c.factors) factors.push_back(complex_json(f));
    orbits.push_back({{"sequence", word_label(e.orbit.vertices)},
                      {"merged_with_reverse", e.orbit.merged_with_reverse},
                      {"segment_lengths", e.orbit.segment_lengths},
                      {"angles", e.orbit.angles},
                      {"diffraction_factors", factors},
                      {"windings", c.windings},
                      {"holonomy", complex_json(c.holonomy)},
                      {"d", complex_json(c.value)},
                      {"amplitude", complex_json(e.coefficient)}});
  }
  breakdown["orbits"] = orbits;
  out.emplace_back("orbit_factors.json", to_report_json(breakdown));
  return out;
}

inline ReportSet render_trace(const SolenoidConfig& config, const RunConfig& cfg, int threads) {
  const auto& w = cfg.trace.window;
  const auto& g = cfg.trace.grid;
  stage("trace synthesis", [&] {
    w.validate();
    if (g.step > 1.0 / w.lambda_max)
      throw Error(ErrorCode::GridTooCoarse, "grid step " + fmt(g.step) + " exceeds 1/lambda_max = " +
                                                fmt(1.0 / w.lambda_max));
    return 0;
  });
  EnumerationOptions eo{threads, cfg.merge_reversals};
  const auto table = stage("orbit enumeration", [&] { return singularity_table(config, cfg.L_max, eo); });
  SynthesisOptions so;
  so.threads = threads;
  const auto samples = stage("trace synthesis", [&] { return synthesize_trace(table, w, g, so); });

  std::string csv = "t,u";
  for (const auto& e : table) csv += ",orbit_" + word_label(e.orbit.vertices);
  csv += "\n";
  for (std::size_t i = 0; i < samples.t.size(); ++i) {
    csv += fmt(samples.t[i]) + "," + fmt(samples.values[i]);
    for (const auto& part : samples.per_orbit) csv += "," + fmt(part[i]);
    csv += "\n";
  }

  Json meta;
  meta["label"] = "leading order";
  meta["lambda_max"] = w.lambda_max;
  meta["taper_width"] = w.taper_width;
  meta["t_start"] = g.start;
  meta["t_step"] = g.step;
  meta["t_count"] = g.count;
  Json entries = Json::array();
  for (const auto& e : table)
    entries.push_back({{"sequence", word_label(e.orbit.vertices)},
                       {"L", e.location},
                       {"order", e.order},
                       {"coefficient", complex_json(e.coefficient)}});
  meta["singularities"] = entries;
  return {{"trace.csv", std::move(csv)}, {"trace_meta.json", to_report_json(meta)}};
}

inline ReportSet render_resonances(const SolenoidConfig& config, const RunConfig& cfg, int threads) {
  const auto& rp = cfg.resonances;
  EnumerationOptions eo{threads, false};
  const auto rep = stage("resonance strips", [&] {
    return best_strip(config, rp.n1, rp.epsilon, rp.rep_max, cfg.L_max, eo);
  });
  const auto bound = stage("counting bound", [&] { return counting_lower_bound(rep.best.nu, rp.r, rp.delta); });

  Json j;
  j["n1"] = rp.n1;
  j["n1_note"] = "user-supplied constant from the trace-to-resonance theorem (default 1)";
  j["epsilon"] = rp.epsilon;
  j["d_max"] = rep.d_max;
  j["farthest_pair"] = {rep.far_i, rep.far_j};
  j["limit_coefficient"] = rep.limit;
  j["best"] = {{"nu", rep.best.nu},
               {"source", rep.best.source},
               {"m", rep.best.corners},
               {"L", rep.best.length}};
  j["gap_to_limit"] = rep.gap;
  j["rep_max"] = rep.rep_max;
  j["orbits_considered"] = rep.orbits_considered;
  j["counting"] = {{"nu", bound.nu},
                   {"r", bound.r},
                   {"delta", bound.delta},
                   {"lower_bound", bound.count},
                   {"validity", CountingBound::kValidity}};

  std::string csv = "sequence,m,L,nu\n";
  for (const auto& orbit : stage("orbit enumeration", [&] { return enumerate_orbits(config, cfg.L_max, eo); }).orbits) {
    if (!(rp.epsilon < orbit.total_length)) continue;
    const auto s = strip_threshold(orbit, rp.n1, rp.epsilon);
    csv += s.source + "," + std::to_string(s.corners) + "," + fmt(s.length) + "," + fmt(s.nu) + "\n";
  }
  return {{"resonances.json", to_report_json(j)}, {"strips.csv", std::move(csv)}};
}

struct CheckRow {
  std::string name;
  std::uint64_t cases = 0;
  double max_diff = 0.0;
  double tolerance = 0.0;
  bool pass() const { return max_diff <= tolerance; }
};

inline ReportSet render_verify(const SolenoidConfig& config, const RunConfig& cfg, int threads,
                               std::uint64_t seed, bool& all_pass) {
  Sampler rng(seed);
  std::vector<CheckRow> rows;
  EnumerationOptions eo{threads, false};
  const auto found = stage("orbit enumeration", [&] { return enumerate_orbits(config, cfg.L_max, eo); });
  const std::size_t n_orbits = std::min<std::size_t>(found.orbits.size(), cfg.verify.cases);

  {
    CheckRow row{"two_angle_kernel", cfg.verify.cases * 100, 0.0, 1e-12};
    for (std::uint64_t i = 0; i < row.cases;) {
      const double t1 = rng.uniform(-kPi, kPi);
      const double beta = rng.uniform(-kPi + 1e-3, kPi - 1e-3);
      const double t2 = t1 + beta;
      if (std::abs(std::cos(0.5 * (t1 + t2))) < 1e-2) continue;
      const Complex lhs = (std::polar(1.0, -t1) + std::polar(1.0, t2)) / (std::cos(t1) + std::cos(t2));
      const Complex rhs = std::conj(diffraction_coefficient(0.5, beta));
      row.max_diff = std::max(row.max_diff, std::abs(lhs - rhs) / std::abs(rhs));
      ++i;
    }
    rows.push_back(row);
  }
  {
    CheckRow row{"winding_pv_quadrature", 0, 0.0, 1e-8};
    oracle::QuadratureSettings qs;
    qs.excision_eps = cfg.verify.excision_eps;
    stage("winding oracle", [&] {
      for (std::size_t i = 0; i < n_orbits; ++i) {
        const auto& o = found.orbits[i];
        double shortest = *std::min_element(o.segment_lengths.begin(), o.segment_lengths.end());
        qs.excision_eps = std::min(cfg.verify.excision_eps, 0.25 * shortest);
        for (std::size_t k = 0; k < config.size(); ++k) {
          const double fast = fractional_winding(config, o, k).value;
          const double slow = oracle::pv_winding_numeric(config, o, k, qs).value;
          row.max_diff = std::max(row.max_diff, std::abs(fast - slow));
          ++row.cases;
        }
      }
      return 0;
    });
    rows.push_back(row);
  }
  {
    CheckRow row{"reversal_conjugation", n_orbits, 0.0, 1e-12};
    for (std::size_t i = 0; i < n_orbits; ++i) {
      const auto& o = found.orbits[i];
      const Complex d = orbit_coefficient(config, o).value;
      const Complex dr = orbit_coefficient(config, reverse_orbit(o)).value;
      row.max_diff = std::max(row.max_diff, std::abs(dr - std::conj(d)) / std::abs(d));
    }
    rows.push_back(row);
  }
  if (config.size() <= 4) {
    CheckRow row{"enumeration_brute_force", 1, 0.0, 0.0};
    stage("enumeration oracle", [&] {
      const auto slow = oracle::brute_force_orbits(config, cfg.L_max);
      std::vector<oracle::Word> fast;
      for (const auto& o : found.orbits) fast.push_back(o.vertices);
      std::sort(fast.begin(), fast.end());
      row.max_diff = fast == slow ? 0.0 : 1.0;
      return 0;
    });
    rows.push_back(row);
  }
  {
    CheckRow row{"stationary_phase_hessian", cfg.verify.cases, 0.0, 1e-6};
    stage("hessian oracle", [&] {
      for (std::uint64_t i = 0; i < row.cases; ++i) {
        const double l = rng.uniform(0.5, 3.0);
        const double r = l * rng.uniform(0.1, 0.9);
        const double lambda = rng.uniform(0.5, 50.0);
        const auto h = oracle::stationary_phase_hessian(r, l - r, l, lambda);
        double diff = std::abs(h.det - h.det_expected) / h.det_expected;
        if (h.signature != -1) diff = INFINITY;
        row.max_diff = std::max(row.max_diff, diff);
      }
      return 0;
    });
    rows.push_back(row);
  }
  {
    CheckRow row{"trace_reference_quadrature", 0, 0.0, 1e-7};
    const auto& w = cfg.trace.window;
    stage("trace oracle", [&] {
      std::vector<SingularityEntry> table;
      for (std::size_t i = 0; i < n_orbits; ++i) table.push_back(leading_amplitude(config, found.orbits[i]));
      if (table.empty()) return 0;
      const double hi = std::max(cfg.L_max, table.back().location);
      for (std::uint64_t c = 0; c < cfg.verify.cases; ++c) {
        const double t = rng.uniform(0.0, hi);
        const auto& e = table[c % table.size()];
        const double fast = 2.0 * (e.coefficient * band_integral(e.corners, t - e.location, w)).real();
        const double slow = 2.0 * oracle::quadrature_trace_reference(e, w, t).value.real();
        row.max_diff = std::max(row.max_diff, std::abs(fast - slow));
        ++row.cases;
      }
      return 0;
    });
    rows.push_back(row);
  }

  all_pass = true;
  std::string csv = "check,cases,max_abs_diff,tolerance,status\n";
  for (const auto& r : rows) {
    all_pass = all_pass && r.pass();
    csv += r.name + "," + std::to_string(r.cases) + "," + fmt(r.max_diff) + "," + fmt(r.tolerance) +
           "," + (r.pass() ? "pass" : "FAIL") + "\n";
  }
  return {{"verify.csv", std::move(csv)}};
}

}  // namespace detail

/// Renders the reports of `command` without touching the file system.
/// `verify_pass` (optional) receives whether every verification passed.
inline ReportSet render(Command command, const RunConfig& cfg, const RunOptions& opts = {},
                        bool* verify_pass = nullptr) {
  const auto config = validate_config(cfg.scene);
  const int threads = static_cast<int>(resolve_threads(opts.threads));
  switch (command) {
    case Command::Orbits: return detail::render_orbits(config, cfg, threads);
    case Command::Trace: return detail::render_trace(config, cfg, threads);
    case Command::Resonances: return detail::render_resonances(config, cfg, threads);
    case Command::Verify: {
      bool ok = true;
      auto out = detail::render_verify(config, cfg, threads, opts.seed, ok);
      if (verify_pass) *verify_pass = ok;
      return out;
    }
  }
  return {};
}

/// Exit codes of run().
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitStageError = 3;

struct RunOutcome {
  int exit_status = kExitOk;
  std::vector<std::filesystem::path> files;
  std::string diagnostics;
};

/// Renders and writes the reports of `command` into `out_dir` (the
/// configuration's output directory when empty). An invalid scene throws
/// ValidationError; other failures are reported through the exit status.
inline RunOutcome run(Command command, const RunConfig& cfg, const RunOptions& opts = {},
                      const std::filesystem::path& out_dir = {}) {
  RunOutcome outcome;
  bool verify_pass = true;
  ReportSet reports;
  try {
    reports = render(command, cfg, opts, &verify_pass);
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    outcome.exit_status = kExitStageError;
    outcome.diagnostics = e.what();
    return outcome;
  }
  const std::filesystem::path dir = out_dir.empty() ? std::filesystem::path(cfg.output.directory) : out_dir;
  std::filesystem::create_directories(dir);
  for (const auto& [name, body] : reports) {
    const auto path = dir / name;
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << body;
    if (!f) {
      outcome.exit_status = kExitStageError;
      outcome.diagnostics = "cannot write " + path.string();
      return outcome;
    }
    outcome.files.push_back(path);
  }
  if (!verify_pass) {
    outcome.exit_status = kExitVerifyFailed;
    outcome.diagnostics = "one or more verification checks failed; see verify.csv";
  }
  return outcome;
}

}  // namespace diffrace
