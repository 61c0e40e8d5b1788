#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ringscft/basis.hpp"
#include "ringscft/grid.hpp"
#include "ringscft/reference.hpp"
#include "ringscft/scf.hpp"

namespace ringscft {

struct RunConfig {
  std::string element = "H";
  ScfConfig scf;
  std::vector<ChannelSpec> channels;  // empty: the "desk" preset
  GridSpec quad_grid;                 // quadrature for entropies/constraints
  GridSpec export_grid{120, 1e-4, 20.0, 16, 32};
  std::string out_dir = "out";
  std::vector<double> slice_theta_deg{90.0};
  double slice_extent = 4.0;  // bohr
  int slice_pixels = 256;
  bool emit_heatmap = true;
  bool emit_iteration_log = true;
  bool emit_density = true;
  std::string gamma_cache;  // optional path
};

/// Named basis layouts: "desk" (60/20/10 functions over l = 0..2) and
/// "full" (150/50/25).
inline std::vector<ChannelSpec> basis_preset(const std::string& name) {
  if (name == "desk")
    return {{0, 60, 1e-14, 1e9, {}}, {1, 20, 1e-6, 1e4, {}}, {2, 10, 1e-4, 1e2, {}}};
  if (name == "full")
    return {{0, 150, 1e-15, 1e11, {}}, {1, 50, 1e-10, 1e5, {}}, {2, 25, 1e-6, 1e3, {}}};
  throw std::invalid_argument("unknown basis preset '" + name + "'");
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  return out;
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: '" + key + "' expects a number, got '" + v + "'");
  }
}

inline long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long d = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: '" + key + "' expects an integer, got '" + v + "'");
  }
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw std::invalid_argument("config: '" + key + "' expects true/false, got '" + v + "'");
}

}  // namespace detail

/// Basis spec: a preset name, or channels "l:count:c_min:c_max" joined by ','.
inline std::vector<ChannelSpec> parse_basis_spec(const std::string& spec) {
  if (spec.find(':') == std::string::npos) return basis_preset(detail::trim(spec));
  std::vector<ChannelSpec> out;
  for (const auto& item : detail::split(spec, ',')) {
    const auto f = detail::split(item, ':');
    if (f.size() != 4) throw std::invalid_argument("basis: expected l:count:c_min:c_max, got '" + item + "'");
    ChannelSpec ch;
    ch.l = static_cast<int>(detail::to_int("basis", f[0]));
    ch.count = static_cast<int>(detail::to_int("basis", f[1]));
    ch.c_min = detail::to_double("basis", f[2]);
    ch.c_max = detail::to_double("basis", f[3]);
    out.push_back(ch);
  }
  return out;
}

/// Grid spec "n_radial:r_min:r_max:n_theta:n_phi".
inline GridSpec parse_grid_spec(const std::string& spec) {
  const auto f = detail::split(spec, ':');
  if (f.size() != 5) throw std::invalid_argument("grid: expected n_radial:r_min:r_max:n_theta:n_phi");
  GridSpec g;
  g.n_radial = static_cast<int>(detail::to_int("grid", f[0]));
  g.r_min = detail::to_double("grid", f[1]);
  g.r_max = detail::to_double("grid", f[2]);
  g.n_theta = static_cast<int>(detail::to_int("grid", f[3]));
  g.n_phi = static_cast<int>(detail::to_int("grid", f[4]));
  return g;
}

/// Apply one key = value setting.
inline void apply_setting(RunConfig& c, const std::string& key, const std::string& v) {
  using namespace detail;
  auto doubles = [&](const std::string& s) {
    std::vector<double> out;
    for (const auto& x : split(s, ',')) out.push_back(to_double(key, x));
    return out;
  };
  if (key == "element") c.element = v;
  else if (key == "beta") c.scf.beta = to_double(key, v);
  else if (key == "g0") c.scf.g0 = to_double(key, v);
  else if (key == "g0_per_pair") c.scf.g0_per_pair = doubles(v);
  else if (key == "mixing") c.scf.mixing = to_double(key, v);
  else if (key == "anderson") c.scf.anderson = to_bool(key, v);
  else if (key == "anderson_depth") c.scf.anderson_depth = static_cast<int>(to_int(key, v));
  else if (key == "anderson_start") c.scf.anderson_start = to_double(key, v);
  else if (key == "tol") c.scf.tol = to_double(key, v);
  else if (key == "max_iter") c.scf.max_iter = static_cast<int>(to_int(key, v));
  else if (key == "perturb") c.scf.perturb = to_double(key, v);
  else if (key == "seed") c.scf.seed = static_cast<std::uint64_t>(to_int(key, v));
  else if (key == "spherical_only") c.scf.spherical_only = to_bool(key, v);
  else if (key == "eig_threshold") c.scf.eig_threshold = to_double(key, v);
  else if (key == "threads") c.scf.threads = static_cast<int>(to_int(key, v));
  else if (key == "basis") c.channels = parse_basis_spec(v);
  else if (key == "quad_grid") c.quad_grid = parse_grid_spec(v);
  else if (key == "grid") c.export_grid = parse_grid_spec(v);
  else if (key == "out") c.out_dir = v;
  else if (key == "slice_theta") c.slice_theta_deg = doubles(v);
  else if (key == "slice_extent") c.slice_extent = to_double(key, v);
  else if (key == "slice_pixels") c.slice_pixels = static_cast<int>(to_int(key, v));
  else if (key == "emit_heatmap") c.emit_heatmap = to_bool(key, v);
  else if (key == "emit_iteration_log") c.emit_iteration_log = to_bool(key, v);
  else if (key == "emit_density") c.emit_density = to_bool(key, v);
  else if (key == "gamma_cache") c.gamma_cache = v;
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

/// Flat "key = value" text; '#' starts a comment.
inline RunConfig parse_config(std::istream& is, RunConfig c = {}) {
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
    try {
      apply_setting(c, key, val);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return c;
}

inline RunConfig load_config(const std::string& path, RunConfig c = {}) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file " + path);
  return parse_config(is, std::move(c));
}

}  // namespace ringscft
