#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "qdscatter/channels.hpp"
#include "qdscatter/eigensolve.hpp"
#include "qdscatter/error.hpp"
#include "qdscatter/potential.hpp"
#include "qdscatter/qtbm.hpp"

namespace qdscatter {

using json = nlohmann::json;

enum class SystemKind { qd_2p, dqd_3p };

struct MaterialConfig {
  double effective_mass_ratio = 0.067;
  double relative_permittivity = 12.9;
  double coulomb_cutoff_d_nm = 2.0;
};

struct GeometryConfig {
  DotKind kind = DotKind::single_dot;
  double L_nm = 600.0;
  double h_nm = 1.0;
  double well_depth_meV = 110.0;
  double well_width_nm = 30.0;
  double barrier_nm = 20.0;
  double window_margin_nm = 60.0;
};

struct InteractionConfig {
  double strength = 1.0;
  double switch_full_nm = 200.0;
  double switch_cutoff_nm = 250.0;
};

struct BoundConfig {
  int max_levels = 3;
  double delta_deg_meV = 0.05;
  double decay_tolerance = 1e-8;
  ExchangeSector exchange = ExchangeSector::both;
};

struct SolverConfig {
  SolverKind kind = SolverKind::automatic;
  double tolerance = 1e-8;
  int max_iterations = 3000;
  int restart = 40;
  int preconditioner_modes = 256;
  int num_evanescent = 6;
  int incident_channel = -1;  // -1: ground (lowest exchange-symmetric) level
  double memory_cap_GB = 4.0;
  int extraction_offset = 0;
};

struct SweepConfig {
  double T0_min_meV = 10.0;
  double T0_max_meV = 40.0;
  int num_steps = 121;
  bool refine = false;
  int max_refinements = 40;
  double refine_threshold = 0.05;
  int threads = 1;
  PostSelection post_selection = PostSelection::both;
  double failure_threshold = 0.1;
};

struct OutputConfig {
  std::string directory = "out";
  std::string prefix = "run";
  bool resume = true;
};

struct Config {
  SystemKind system = SystemKind::qd_2p;
  MaterialConfig material;
  GeometryConfig geometry;
  InteractionConfig interaction;
  BoundConfig bound;
  SolverConfig solver;
  SweepConfig sweep;
  OutputConfig output;
};

inline std::string_view to_string(SystemKind s) { return s == SystemKind::qd_2p ? "qd_2p" : "dqd_3p"; }
inline std::string_view to_string(DotKind k) { return k == DotKind::single_dot ? "single_dot" : "double_dot"; }
inline std::string_view to_string(SolverKind k) {
  switch (k) {
    case SolverKind::automatic: return "auto";
    case SolverKind::direct: return "direct";
    case SolverKind::iterative: return "iterative";
  }
  return "auto";
}
inline std::string_view to_string(ExchangeSector e) {
  switch (e) {
    case ExchangeSector::both: return "both";
    case ExchangeSector::symmetric: return "symmetric";
    case ExchangeSector::antisymmetric: return "antisymmetric";
  }
  return "both";
}

namespace detail {

template <class Enum, std::size_t N>
Enum parse_enum(const json& j, const char* key, const std::pair<const char*, Enum> (&table)[N]) {
  const auto s = j.get<std::string>();
  for (const auto& [name, value] : table)
    if (s == name) return value;
  fail(ErrorCode::config, std::string("unknown value '") + s + "' for " + key);
}

template <class T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::config, std::string("bad value for '") + key + "': " + e.what());
  }
}

inline const json& section(const json& root, const char* key) {
  static const json empty = json::object();
  if (!root.contains(key)) return empty;
  const auto& s = root.at(key);
  require(s.is_object(), ErrorCode::config, std::string("section '") + key + "' must be an object");
  return s;
}

inline void check_keys(const json& obj, const char* where, std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || item.key() == a;
    require(ok, ErrorCode::config, std::string("unknown key '") + item.key() + "' in " + where);
  }
}

}  // namespace detail

/// Defaults for each system; the dqd_3p defaults follow the reduced-window 3-particle setup.
inline Config default_config(SystemKind system) {
  Config c;
  c.system = system;
  if (system == SystemKind::dqd_3p) {
    c.geometry.kind = DotKind::double_dot;
    c.geometry.h_nm = 2.0;
    c.geometry.window_margin_nm = 20.0;
    c.bound.max_levels = 24;
    c.bound.decay_tolerance = 1e-3;
    c.solver.kind = SolverKind::iterative;
    c.solver.tolerance = 1e-8;
    c.sweep.T0_min_meV = 10.0;
    c.sweep.T0_max_meV = 32.0;
    c.sweep.num_steps = 12;
  }
  return c;
}

inline Config config_from_json(const json& root) {
  using namespace detail;
  require(root.is_object(), ErrorCode::config, "config root must be an object");
  check_keys(root, "config", {"system", "material", "geometry", "interaction", "bound_states", "solver", "sweep", "output"});
  SystemKind system = SystemKind::qd_2p;
  if (root.contains("system")) {
    static const std::pair<const char*, SystemKind> t[] = {{"qd_2p", SystemKind::qd_2p}, {"dqd_3p", SystemKind::dqd_3p}};
    system = parse_enum(root.at("system"), "system", t);
  }
  Config c = default_config(system);

  const auto& m = section(root, "material");
  check_keys(m, "material", {"effective_mass_ratio", "relative_permittivity", "coulomb_cutoff_d_nm"});
  read(m, "effective_mass_ratio", c.material.effective_mass_ratio);
  read(m, "relative_permittivity", c.material.relative_permittivity);
  read(m, "coulomb_cutoff_d_nm", c.material.coulomb_cutoff_d_nm);

  const auto& g = section(root, "geometry");
  check_keys(g, "geometry", {"kind", "L_nm", "h_nm", "well_depth_meV", "well_width_nm", "barrier_nm", "window_margin_nm"});
  if (g.contains("kind")) {
    static const std::pair<const char*, DotKind> t[] = {{"single_dot", DotKind::single_dot},
                                                        {"double_dot", DotKind::double_dot}};
    c.geometry.kind = parse_enum(g.at("kind"), "geometry.kind", t);
  }
  read(g, "L_nm", c.geometry.L_nm);
  read(g, "h_nm", c.geometry.h_nm);
  read(g, "well_depth_meV", c.geometry.well_depth_meV);
  read(g, "well_width_nm", c.geometry.well_width_nm);
  read(g, "barrier_nm", c.geometry.barrier_nm);
  read(g, "window_margin_nm", c.geometry.window_margin_nm);

  const auto& i = section(root, "interaction");
  check_keys(i, "interaction", {"strength", "switch_full_nm", "switch_cutoff_nm"});
  read(i, "strength", c.interaction.strength);
  read(i, "switch_full_nm", c.interaction.switch_full_nm);
  read(i, "switch_cutoff_nm", c.interaction.switch_cutoff_nm);

  const auto& b = section(root, "bound_states");
  check_keys(b, "bound_states", {"max_levels", "delta_deg_meV", "decay_tolerance", "exchange"});
  read(b, "max_levels", c.bound.max_levels);
  read(b, "delta_deg_meV", c.bound.delta_deg_meV);
  read(b, "decay_tolerance", c.bound.decay_tolerance);
  if (b.contains("exchange")) {
    static const std::pair<const char*, ExchangeSector> t[] = {{"both", ExchangeSector::both},
                                                               {"symmetric", ExchangeSector::symmetric},
                                                               {"antisymmetric", ExchangeSector::antisymmetric}};
    c.bound.exchange = parse_enum(b.at("exchange"), "bound_states.exchange", t);
  }

  const auto& s = section(root, "solver");
  check_keys(s, "solver", {"kind", "tolerance", "max_iterations", "restart", "preconditioner_modes", "num_evanescent",
                           "incident_channel", "memory_cap_GB", "extraction_offset"});
  if (s.contains("kind")) {
    static const std::pair<const char*, SolverKind> t[] = {
        {"auto", SolverKind::automatic}, {"direct", SolverKind::direct}, {"iterative", SolverKind::iterative}};
    c.solver.kind = parse_enum(s.at("kind"), "solver.kind", t);
  }
  read(s, "tolerance", c.solver.tolerance);
  read(s, "max_iterations", c.solver.max_iterations);
  read(s, "restart", c.solver.restart);
  read(s, "preconditioner_modes", c.solver.preconditioner_modes);
  read(s, "num_evanescent", c.solver.num_evanescent);
  read(s, "incident_channel", c.solver.incident_channel);
  read(s, "memory_cap_GB", c.solver.memory_cap_GB);
  read(s, "extraction_offset", c.solver.extraction_offset);

  const auto& w = section(root, "sweep");
  check_keys(w, "sweep", {"T0_min_meV", "T0_max_meV", "num_steps", "refine", "max_refinements", "refine_threshold",
                          "threads", "post_selection", "failure_threshold"});
  read(w, "T0_min_meV", c.sweep.T0_min_meV);
  read(w, "T0_max_meV", c.sweep.T0_max_meV);
  read(w, "num_steps", c.sweep.num_steps);
  read(w, "refine", c.sweep.refine);
  read(w, "max_refinements", c.sweep.max_refinements);
  read(w, "refine_threshold", c.sweep.refine_threshold);
  read(w, "threads", c.sweep.threads);
  read(w, "failure_threshold", c.sweep.failure_threshold);
  if (w.contains("post_selection")) {
    static const std::pair<const char*, PostSelection> t[] = {{"both", PostSelection::both},
                                                              {"transmitted", PostSelection::transmitted},
                                                              {"reflected", PostSelection::reflected}};
    c.sweep.post_selection = parse_enum(w.at("post_selection"), "sweep.post_selection", t);
  }

  const auto& o = section(root, "output");
  check_keys(o, "output", {"directory", "prefix", "resume"});
  read(o, "directory", c.output.directory);
  read(o, "prefix", c.output.prefix);
  read(o, "resume", c.output.resume);
  return c;
}

inline json config_to_json(const Config& c) {
  json j;
  j["system"] = to_string(c.system);
  j["material"] = {{"effective_mass_ratio", c.material.effective_mass_ratio},
                   {"relative_permittivity", c.material.relative_permittivity},
                   {"coulomb_cutoff_d_nm", c.material.coulomb_cutoff_d_nm}};
  j["geometry"] = {{"kind", to_string(c.geometry.kind)},       {"L_nm", c.geometry.L_nm},
                   {"h_nm", c.geometry.h_nm},                   {"well_depth_meV", c.geometry.well_depth_meV},
                   {"well_width_nm", c.geometry.well_width_nm}, {"barrier_nm", c.geometry.barrier_nm},
                   {"window_margin_nm", c.geometry.window_margin_nm}};
  j["interaction"] = {{"strength", c.interaction.strength},
                      {"switch_full_nm", c.interaction.switch_full_nm},
                      {"switch_cutoff_nm", c.interaction.switch_cutoff_nm}};
  j["bound_states"] = {{"max_levels", c.bound.max_levels},
                       {"delta_deg_meV", c.bound.delta_deg_meV},
                       {"decay_tolerance", c.bound.decay_tolerance},
                       {"exchange", to_string(c.bound.exchange)}};
  j["solver"] = {{"kind", to_string(c.solver.kind)},
                 {"tolerance", c.solver.tolerance},
                 {"max_iterations", c.solver.max_iterations},
                 {"restart", c.solver.restart},
                 {"preconditioner_modes", c.solver.preconditioner_modes},
                 {"num_evanescent", c.solver.num_evanescent},
                 {"incident_channel", c.solver.incident_channel},
                 {"memory_cap_GB", c.solver.memory_cap_GB},
                 {"extraction_offset", c.solver.extraction_offset}};
  j["sweep"] = {{"T0_min_meV", c.sweep.T0_min_meV},
                {"T0_max_meV", c.sweep.T0_max_meV},
                {"num_steps", c.sweep.num_steps},
                {"refine", c.sweep.refine},
                {"max_refinements", c.sweep.max_refinements},
                {"refine_threshold", c.sweep.refine_threshold},
                {"threads", c.sweep.threads},
                {"post_selection", to_string(c.sweep.post_selection)},
                {"failure_threshold", c.sweep.failure_threshold}};
  j["output"] = {{"directory", c.output.directory}, {"prefix", c.output.prefix}, {"resume", c.output.resume}};
  return j;
}

/// Checks the ranges that can be judged without building anything.
inline void validate(const Config& c) {
  auto check = [](bool ok, const std::string& what) { require(ok, ErrorCode::config, what); };
  check(c.material.effective_mass_ratio > 0 && c.material.relative_permittivity > 0 &&
            c.material.coulomb_cutoff_d_nm > 0,
        "material parameters must be positive");
  check(c.geometry.L_nm > 0 && c.geometry.h_nm > 0, "L_nm and h_nm must be positive");
  check(c.geometry.well_width_nm > 0 && c.geometry.well_depth_meV >= 0, "bad well parameters");
  check(c.geometry.window_margin_nm > 0, "window_margin_nm must be positive");
  check((c.system == SystemKind::qd_2p) == (c.geometry.kind == DotKind::single_dot),
        "qd_2p needs a single_dot geometry and dqd_3p a double_dot geometry");
  check(c.interaction.strength >= 0, "interaction strength must be non-negative");
  check(c.interaction.switch_full_nm >= 0 && c.interaction.switch_cutoff_nm > c.interaction.switch_full_nm,
        "lead switch needs 0 <= switch_full_nm < switch_cutoff_nm");
  check(c.bound.max_levels >= 1, "max_levels must be >= 1");
  check(c.bound.delta_deg_meV > 0, "delta_deg_meV must be positive");
  check(c.bound.decay_tolerance > 0, "decay_tolerance must be positive");
  check(c.solver.tolerance > 0 && c.solver.max_iterations > 0 && c.solver.restart > 0, "bad solver settings");
  check(c.solver.num_evanescent >= 0, "num_evanescent must be >= 0");
  check(c.solver.preconditioner_modes >= 1, "preconditioner_modes must be >= 1");
  check(c.solver.memory_cap_GB > 0, "memory_cap_GB must be positive");
  check(c.solver.extraction_offset >= 0, "extraction_offset must be >= 0");
  check(c.sweep.T0_min_meV > 0, "T0_min_meV must be positive");
  check(c.sweep.T0_max_meV > c.sweep.T0_min_meV, "T0_max_meV must exceed T0_min_meV");
  check(c.sweep.num_steps >= 2, "num_steps must be >= 2");
  check(c.sweep.max_refinements >= 0 && c.sweep.refine_threshold > 0, "bad refinement settings");
  check(c.sweep.threads >= 1, "threads must be >= 1");
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::config, "cannot open config file " + path);
  json root;
  try {
    root = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    fail(ErrorCode::config, "cannot parse " + path + ": " + e.what());
  }
  return config_from_json(root);
}

/// Overrides one key given as "section.key=value"; the value is parsed as JSON and
/// falls back to a plain string.
inline void apply_override(json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  require(eq != std::string::npos, ErrorCode::config, "override '" + assignment + "' is not key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;
  }
  json* node = &root;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  require(!parts.empty(), ErrorCode::config, "empty override key");
  for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
    if (!node->contains(parts[k])) (*node)[parts[k]] = json::object();
    node = &(*node)[parts[k]];
  }
  (*node)[parts.back()] = value;
}

/// Stable 64-bit FNV-1a hash of the part of the config that determines a single-energy
/// result (output settings and the sweep grid excluded), as 16 hex digits.
inline std::string config_hash(const Config& c) {
  json j = config_to_json(c);
  j.erase("output");
  j["sweep"] = {{"post_selection", to_string(c.sweep.post_selection)}};
  const std::string text = j.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace qdscatter
