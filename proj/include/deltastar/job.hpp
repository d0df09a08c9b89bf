#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "deltastar/bounds.hpp"
#include "deltastar/error.hpp"
#include "deltastar/geometry.hpp"
#include "deltastar/kernels.hpp"
#include "deltastar/optimizer.hpp"
#include "deltastar/spectral.hpp"

namespace deltastar {

inline constexpr const char* kVersion = "0.1.0";

using json = nlohmann::ordered_json;

enum class Command { Spectrum, SweepAngle, Optimize, VerifySharp, Bounds, DesignCheck };

inline const char* to_string(Command c) {
  switch (c) {
    case Command::Spectrum: return "spectrum";
    case Command::SweepAngle: return "sweep-angle";
    case Command::Optimize: return "optimize";
    case Command::VerifySharp: return "verify-sharp";
    case Command::Bounds: return "bounds";
    case Command::DesignCheck: return "design-check";
  }
  return "?";
}

struct JobSpec {
  Command command = Command::Spectrum;
  // star source: exactly one of these
  std::optional<int> sharp;
  std::optional<Directions> directions;
  std::optional<int> arms;  // optimize only
  double alpha = 0.0;
  double arm_length = 1.0;
  MeshParams mesh{};
  // solver
  double kappa_floor = 1e-4;
  double kappa_tol = 1e-10;
  int levels = 1;
  std::optional<double> e_tol;  // set: run refine_until on the default ladder
  // optimize
  int starts = 8;
  std::uint64_t seed = 1;
  double simplex_tol = 1e-10;
  int max_evals = 4000;
  MeshParams search_mesh{4, 8, 3.0};
  // verify-sharp
  double scale = 0.05;
  int trials = 20;
  // sweep-angle
  double phi_min = 0.05;
  double phi_max = std::numbers::pi;
  int phi_count = 40;
  // bounds
  double C = 1.0;
  bool ordered_pairs = true;
  int k = 1;
  // design-check
  std::vector<int> design_orders;
  // output
  std::string format = "json";
  std::string path;
  json echo;
};

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& field, const std::string& msg) {
  fail(ErrorCode::ParseError, field + ": " + msg);
}

inline void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) parse_fail(where, "expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) parse_fail(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
}

inline double get_number(const json& obj, const char* key, const std::string& where, double def) {
  if (!obj.contains(key)) return def;
  const auto& v = obj.at(key);
  if (!v.is_number()) parse_fail(where + key, "expected a number");
  return v.get<double>();
}

inline int get_int(const json& obj, const char* key, const std::string& where, int def) {
  if (!obj.contains(key)) return def;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) parse_fail(where + key, "expected an integer");
  return v.get<int>();
}

inline MeshParams get_mesh(const json& obj, const std::string& where, MeshParams def) {
  only_keys(obj, where, {"panels", "order", "grading"});
  def.panels = get_int(obj, "panels", where + ".", def.panels);
  def.order = get_int(obj, "order", where + ".", def.order);
  def.grading = get_number(obj, "grading", where + ".", def.grading);
  if (def.panels < 2 || def.panels > 512) parse_fail(where + ".panels", "must be in [2,512]");
  if (def.order < 2 || def.order > 40) parse_fail(where + ".order", "must be in [2,40]");
  if (!(def.grading >= 1.0 && def.grading <= 16.0)) parse_fail(where + ".grading", "must be in [1,16]");
  return def;
}

}  // namespace detail

/**
 * Strict reader for a JSON job document. Unknown keys anywhere are an error.
 * Parse errors report the offending field, or the line for malformed text.
 */
inline JobSpec parse_job(const std::string& text) {
  using namespace detail;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min(e.byte, text.size()); ++i)
      if (text[i] == '\n') ++line;
    fail(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + e.what());
  }
  only_keys(doc, "", {"command", "star", "alpha", "arm_length", "mesh", "solver", "optimize", "verify", "sweep",
                      "bounds", "design", "output"});
  JobSpec j;
  j.echo = doc;

  if (!doc.contains("command") || !doc["command"].is_string()) parse_fail("command", "missing or not a string");
  const std::string cmd = doc["command"];
  bool found = false;
  for (Command c : {Command::Spectrum, Command::SweepAngle, Command::Optimize, Command::VerifySharp, Command::Bounds,
                    Command::DesignCheck})
    if (cmd == to_string(c)) {
      j.command = c;
      found = true;
    }
  if (!found) parse_fail("command", "unknown command '" + cmd + "'");

  if (doc.contains("star")) {
    const auto& s = doc["star"];
    only_keys(s, "star", {"sharp", "directions", "arms"});
    if (s.size() != 1) parse_fail("star", "give exactly one of sharp, directions, arms");
    if (s.contains("sharp")) {
      if (!s["sharp"].is_number_integer()) parse_fail("star.sharp", "expected an integer");
      const int n = s["sharp"];
      if (!is_sharp_n(n)) parse_fail("star.sharp", "no sharp configuration with " + std::to_string(n) + " points");
      j.sharp = n;
    } else if (s.contains("directions")) {
      const auto& d = s["directions"];
      if (!d.is_array() || d.empty()) parse_fail("star.directions", "expected a nonempty array");
      Directions dirs;
      for (std::size_t i = 0; i < d.size(); ++i) {
        const auto& v = d[i];
        if (!v.is_array() || v.size() != 3) parse_fail("star.directions[" + std::to_string(i) + "]", "expected [x,y,z]");
        for (const auto& c : v)
          if (!c.is_number()) parse_fail("star.directions[" + std::to_string(i) + "]", "expected numbers");
        dirs.emplace_back(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
      }
      j.directions = dirs;
    } else {
      if (!s["arms"].is_number_integer() || s["arms"].get<int>() < 2) parse_fail("star.arms", "expected an integer >= 2");
      j.arms = s["arms"].get<int>();
    }
  }

  j.alpha = get_number(doc, "alpha", "", j.alpha);
  j.arm_length = get_number(doc, "arm_length", "", j.arm_length);
  if (!std::isfinite(j.alpha)) parse_fail("alpha", "must be finite");
  if (!(j.arm_length > 0.0) || !std::isfinite(j.arm_length)) parse_fail("arm_length", "must be positive");
  if (doc.contains("mesh")) j.mesh = get_mesh(doc["mesh"], "mesh", j.mesh);

  if (doc.contains("solver")) {
    const auto& s = doc["solver"];
    only_keys(s, "solver", {"kappa_floor", "kappa_tol", "levels", "e_tol"});
    j.kappa_floor = get_number(s, "kappa_floor", "solver.", j.kappa_floor);
    j.kappa_tol = get_number(s, "kappa_tol", "solver.", j.kappa_tol);
    j.levels = get_int(s, "levels", "solver.", j.levels);
    if (s.contains("e_tol")) j.e_tol = get_number(s, "e_tol", "solver.", 0.0);
    if (!(j.kappa_floor > 0.0)) parse_fail("solver.kappa_floor", "must be positive");
    if (!(j.kappa_tol > 0.0)) parse_fail("solver.kappa_tol", "must be positive");
    if (j.levels < 1) parse_fail("solver.levels", "must be >= 1");
    if (j.e_tol && !(*j.e_tol > 0.0)) parse_fail("solver.e_tol", "must be positive");
  }
  if (doc.contains("optimize")) {
    const auto& s = doc["optimize"];
    only_keys(s, "optimize", {"starts", "seed", "simplex_tol", "max_evals", "mesh"});
    j.starts = get_int(s, "starts", "optimize.", j.starts);
    if (s.contains("seed")) {
      if (!s["seed"].is_number_unsigned()) parse_fail("optimize.seed", "expected a nonnegative integer");
      j.seed = s["seed"].get<std::uint64_t>();
    }
    j.simplex_tol = get_number(s, "simplex_tol", "optimize.", j.simplex_tol);
    j.max_evals = get_int(s, "max_evals", "optimize.", j.max_evals);
    if (s.contains("mesh")) j.search_mesh = get_mesh(s["mesh"], "optimize.mesh", j.search_mesh);
    if (j.starts < 1) parse_fail("optimize.starts", "must be >= 1");
    if (!(j.simplex_tol > 0.0)) parse_fail("optimize.simplex_tol", "must be positive");
    if (j.max_evals < 1) parse_fail("optimize.max_evals", "must be >= 1");
  }
  if (doc.contains("verify")) {
    const auto& s = doc["verify"];
    only_keys(s, "verify", {"scale", "trials", "seed", "mesh"});
    j.scale = get_number(s, "scale", "verify.", j.scale);
    j.trials = get_int(s, "trials", "verify.", j.trials);
    if (s.contains("seed")) {
      if (!s["seed"].is_number_unsigned()) parse_fail("verify.seed", "expected a nonnegative integer");
      j.seed = s["seed"].get<std::uint64_t>();
    }
    if (s.contains("mesh")) j.search_mesh = get_mesh(s["mesh"], "verify.mesh", j.search_mesh);
    if (!(j.scale >= 0.0)) parse_fail("verify.scale", "must be >= 0");
    if (j.trials < 0) parse_fail("verify.trials", "must be >= 0");
  }
  if (doc.contains("sweep")) {
    const auto& s = doc["sweep"];
    only_keys(s, "sweep", {"phi_min", "phi_max", "count"});
    j.phi_min = get_number(s, "phi_min", "sweep.", j.phi_min);
    j.phi_max = get_number(s, "phi_max", "sweep.", j.phi_max);
    j.phi_count = get_int(s, "count", "sweep.", j.phi_count);
    if (!(j.phi_min > 0.0) || !(j.phi_max <= std::numbers::pi) || !(j.phi_min <= j.phi_max))
      parse_fail("sweep", "need 0 < phi_min <= phi_max <= pi");
    if (j.phi_count < 1) parse_fail("sweep.count", "must be >= 1");
  }
  if (doc.contains("bounds")) {
    const auto& s = doc["bounds"];
    only_keys(s, "bounds", {"C", "ordered_pairs", "k"});
    j.C = get_number(s, "C", "bounds.", j.C);
    if (s.contains("ordered_pairs")) {
      if (!s["ordered_pairs"].is_boolean()) parse_fail("bounds.ordered_pairs", "expected a boolean");
      j.ordered_pairs = s["ordered_pairs"];
    }
    j.k = get_int(s, "k", "bounds.", j.k);
    if (!(j.C > 0.0)) parse_fail("bounds.C", "must be positive");
    if (j.k < 1) parse_fail("bounds.k", "must be >= 1");
  }
  if (doc.contains("design")) {
    const auto& s = doc["design"];
    only_keys(s, "design", {"orders"});
    if (s.contains("orders")) {
      if (!s["orders"].is_array()) parse_fail("design.orders", "expected an array");
      for (const auto& o : s["orders"]) {
        if (!o.is_number_integer() || o.get<int>() < 1) parse_fail("design.orders", "expected integers >= 1");
        j.design_orders.push_back(o);
      }
    }
  }
  if (doc.contains("output")) {
    const auto& s = doc["output"];
    only_keys(s, "output", {"format", "path"});
    if (s.contains("format")) {
      if (!s["format"].is_string()) parse_fail("output.format", "expected a string");
      j.format = s["format"];
      if (j.format != "json" && j.format != "csv") parse_fail("output.format", "must be json or csv");
    }
    if (s.contains("path")) {
      if (!s["path"].is_string()) parse_fail("output.path", "expected a string");
      j.path = s["path"];
    }
  }

  // star source per command
  const int sources = j.sharp.has_value() + j.directions.has_value() + j.arms.has_value();
  switch (j.command) {
    case Command::SweepAngle:
      if (j.sharp || j.directions) parse_fail("star", "sweep-angle builds its own two-arm star");
      if (j.arms && *j.arms != 2) parse_fail("star.arms", "sweep-angle uses two arms");
      break;
    case Command::Optimize:
      if (sources != 1 || j.directions) parse_fail("star", "optimize needs star.arms or star.sharp");
      break;
    case Command::VerifySharp:
      if (!j.sharp) parse_fail("star", "verify-sharp needs star.sharp");
      break;
    default:
      if (sources != 1 || j.arms) parse_fail("star", "needs star.sharp or star.directions");
  }
  if (j.format == "csv" && j.command != Command::SweepAngle) parse_fail("output.format", "csv is for sweep-angle only");
  if (j.command == Command::SweepAngle && !doc.contains("output")) j.format = "csv";
  return j;
}

/// Prints a json value with doubles at 17 significant digits; non-finite numbers become null.
inline void write_json(std::ostream& os, const json& v, int indent = 0) {
  const std::string pad(indent, ' '), pad2(indent + 2, ' ');
  switch (v.type()) {
    case json::value_t::object: {
      if (v.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      std::size_t i = 0;
      for (auto it = v.begin(); it != v.end(); ++it, ++i) {
        os << pad2 << json(it.key()).dump() << ": ";
        write_json(os, it.value(), indent + 2);
        os << (i + 1 < v.size() ? ",\n" : "\n");
      }
      os << pad << "}";
      return;
    }
    case json::value_t::array: {
      bool flat = true;
      for (const auto& e : v)
        if (e.is_structured()) flat = false;
      if (v.empty() || flat) {
        os << "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i) os << ", ";
          write_json(os, v[i], indent);
        }
        os << "]";
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        os << pad2;
        write_json(os, v[i], indent + 2);
        os << (i + 1 < v.size() ? ",\n" : "\n");
      }
      os << pad << "]";
      return;
    }
    case json::value_t::number_float: {
      const double d = v.get<double>();
      if (!std::isfinite(d)) {
        os << "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", d);
      os << buf;
      return;
    }
    default:
      os << v.dump();
  }
}

namespace detail {

inline json vec_json(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

inline json dirs_json(const Directions& d) {
  json a = json::array();
  for (const auto& v : d) a.push_back(json::array({v.x(), v.y(), v.z()}));
  return a;
}

inline json mesh_json(const MeshParams& m) {
  return json{{"panels", m.panels}, {"order", m.order}, {"grading", m.grading}};
}

inline Directions job_directions(const JobSpec& j) {
  if (j.sharp) return sharp_configuration(*j.sharp);
  return *j.directions;
}

}  // namespace detail

struct JobOutput {
  json results = json::object();
  json diagnostics = json::object();
  std::string csv;  // sweep-angle in csv format
  bool numerical_failure = false;  // result written but not trustworthy (exit 3)
};

inline JobOutput run_job(const JobSpec& j) {
  using namespace detail;
  JobOutput out;
  SolverOptions so;
  so.kappa_floor = j.kappa_floor;
  so.kappa_tol = j.kappa_tol;

  switch (j.command) {
    case Command::Spectrum: {
      const StarConfig cfg = make_star(job_directions(j), j.arm_length, j.alpha);
      SpectralResult sr;
      MeshParams used = j.mesh;
      if (j.e_tol) {
        const RefineResult rr = refine_until(cfg, j.alpha, *j.e_tol, default_ladder(), so);
        used = rr.meshes.back();
        out.diagnostics["refinement"] = {{"converged", rr.converged},
                                         {"energies", vec_json(rr.energies)},
                                         {"observed_order", rr.observed_order},
                                         {"warning", rr.warning}};
        if (!rr.converged) out.numerical_failure = true;
      }
      const Mesh mesh = build_mesh(j.arm_length, used);
      sr = spectrum(cfg, mesh, j.alpha, j.levels, so);
      json lv = json::array();
      for (const auto& l : sr.levels)
        lv.push_back({{"j", l.j}, {"kappa", l.kappa}, {"energy", l.energy}, {"residual", l.residual}});
      out.results["levels"] = lv;
      out.results["bound_states_at_floor"] = count_bound_states(cfg, mesh, j.alpha, j.kappa_floor);
      out.results["point_eigenvalue"] = point_eigenvalue(j.alpha);
      out.diagnostics["ground_vector_positivity"] = sr.ground_vector_positivity;
      out.diagnostics["min_component_ratio"] = sr.min_component_ratio;
      out.diagnostics["arm_symmetry_residual"] = sr.arm_symmetry_residual;
      if (sr.parity) out.diagnostics["parity"] = to_string(*sr.parity);
      out.diagnostics["residual"] = sr.residual;
      out.diagnostics["mesh"] = mesh_json(used);
      out.diagnostics["block_size"] = sr.block_size;
      break;
    }
    case Command::SweepAngle: {
      const Mesh mesh = build_mesh(j.arm_length, j.mesh);
      std::ostringstream csv;
      csv << "phi,E_1,E_1_plus_bound\n";
      json rows = json::array();
      char buf[128];
      for (int i = 0; i < j.phi_count; ++i) {
        const double phi = j.phi_count == 1 ? j.phi_min : j.phi_min + (j.phi_max - j.phi_min) * i / (j.phi_count - 1);
        double e = std::numeric_limits<double>::quiet_NaN();
        try {
          e = solve_energy(two_arm_star(phi, j.arm_length, j.alpha), mesh, j.alpha, 1, so).energy;
        } catch (const Error& err) {
          if (err.code() != ErrorCode::NoCrossing) throw;
        }
        const double up = small_angle_bounds(j.alpha, j.arm_length, phi, 1, j.C).upper;
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", phi, e, up);
        csv << buf;
        rows.push_back({{"phi", phi}, {"E_1", e}, {"E_1_plus_bound", up}});
      }
      out.csv = csv.str();
      out.results["rows"] = rows;
      out.diagnostics["mesh"] = mesh_json(j.mesh);
      break;
    }
    case Command::Optimize: {
      const int N = j.arms ? *j.arms : *j.sharp;
      OptSettings st;
      st.starts = j.starts;
      st.seed = j.seed;
      st.simplex_tol = j.simplex_tol;
      st.max_evals = j.max_evals;
      st.mesh = j.search_mesh;
      st.solver = so;
      if (const char* t = std::getenv("DELTASTAR_THREADS")) st.threads = std::max(1, std::atoi(t));
      const OptResult r = optimize(N, j.arm_length, j.alpha, st);
      out.results["best_energy"] = r.best_energy;
      out.results["best_directions"] = dirs_json(r.best_directions);
      out.results["best_params"] = vec_json(r.best_params);
      out.results["inner_products"] = vec_json(gram_multiset(r.best_directions));
      out.results["starts"] = r.starts;
      out.results["per_start_trace"] = vec_json(r.per_start_trace);
      if (r.congruent_to_sharp) {
        out.results["congruent_to_sharp"] = *r.congruent_to_sharp;
        out.results["congruence_tol"] = r.congruence_tol;
        out.results["sharp_deviation"] = r.sharp_deviation;
        out.results["kernel_sum_gap"] = r.kernel_sum_gap;
      } else {
        out.results["congruent_to_sharp"] = "not-applicable";
      }
      json tr = json::array();
      for (const auto& t : r.traces)
        tr.push_back({{"energy", t.energy}, {"evaluations", t.evaluations}, {"converged", t.converged}});
      out.diagnostics["starts"] = tr;
      out.diagnostics["mesh"] = mesh_json(j.search_mesh);
      break;
    }
    case Command::VerifySharp: {
      const LocalMaxReport r =
          verify_sharp_local_max(*j.sharp, j.arm_length, j.alpha, j.scale, j.trials, j.seed, j.search_mesh, so);
      out.results["sharp_energy"] = r.sharp_energy;
      out.results["perturbed_energy"] = vec_json(r.perturbed_energy);
      out.results["margin"] = r.margin;
      out.results["pass"] = r.pass;
      out.results["degenerate"] = r.degenerate;
      out.diagnostics["mesh"] = mesh_json(j.search_mesh);
      break;
    }
    case Command::Bounds: {
      const StarConfig cfg = make_star(job_directions(j), j.arm_length, j.alpha);
      out.results["point_eigenvalue"] = point_eigenvalue(j.alpha);
      out.results["segment_existence_length"] = segment_existence_length(j.alpha);
      out.results["nonexistence_threshold"] = nonexistence_threshold(cfg, j.C, j.ordered_pairs);
      out.results["ordered_pairs"] = j.ordered_pairs;
      json pairs = json::array();
      const auto& d = cfg.directions();
      for (int a = 0; a < cfg.arms(); ++a)
        for (int b = a + 1; b < cfg.arms(); ++b) {
          const double phi = 2.0 * std::asin(std::min(1.0, 0.5 * std::sqrt(chord_sq(d[a], d[b]))));
          const auto sab = small_angle_bounds(j.alpha, j.arm_length, phi, j.k, j.C);
          pairs.push_back({{"i", a},
                           {"j", b},
                           {"phi", phi},
                           {"offdiag_norm_bound", offdiag_norm_bound(phi)},
                           {"small_angle_lower", sab.lower},
                           {"small_angle_upper", sab.upper}});
        }
      out.results["pairs"] = pairs;
      out.diagnostics["C"] = j.C;
      out.diagnostics["k"] = j.k;
      break;
    }
    case Command::DesignCheck: {
      const Directions d = job_directions(j);
      std::vector<int> orders = j.design_orders;
      if (orders.empty()) {
        if (j.sharp) {
          const int m = sharp_family(*j.sharp).design_order();
          orders = {m, m + 1};
        } else {
          orders = {1, 2, 3, 4, 5};
        }
      }
      json rows = json::array();
      for (int o : orders) {
        const auto rep = spherical_design_check(d, o);
        rows.push_back({{"order", o},
                        {"is_design", rep.is_design},
                        {"max_deviation", rep.max_deviation},
                        {"worst_monomial", json::array({rep.worst[0], rep.worst[1], rep.worst[2]})}});
      }
      out.results["checks"] = rows;
      break;
    }
  }
  return out;
}

inline json versions_json() {
  return json{{"deltastar", kVersion},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
              {"cxx", static_cast<long>(__cplusplus)}};
}

}  // namespace deltastar
