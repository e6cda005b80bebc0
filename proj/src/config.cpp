#include "floq/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace floq {
namespace {

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

void only_keys(const YAML::Node& n, const std::set<std::string>& allowed, const std::string& where) {
  if (!n.IsMap()) throw ConfigError(where + " must be a mapping", line_of(n));
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where, line_of(kv.first));
  }
}

template <class T>
T value(const YAML::Node& n, const std::string& key) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("bad value for '" + key + "'", line_of(n));
  }
}

template <class T>
void read(const YAML::Node& parent, const std::string& key, T& out) {
  if (const YAML::Node n = parent[key]) out = value<T>(n, key);
}

template <class T>
void read_positive(const YAML::Node& parent, const std::string& key, T& out, double scale = 1.0) {
  if (const YAML::Node n = parent[key]) {
    const double v = value<double>(n, key);
    if (!(v > 0.0)) throw ConfigError("'" + key + "' must be positive", line_of(n));
    out = static_cast<T>(v * scale);
  }
}

std::vector<double> read_grid(const YAML::Node& root, int& line) {
  std::vector<double> out;
  if (const YAML::Node n = root["detunings_hz"]) {
    line = line_of(n);
    if (!n.IsSequence()) throw ConfigError("'detunings_hz' must be a list", line);
    for (const auto& v : n) out.push_back(value<double>(v, "detunings_hz"));
  }
  if (const YAML::Node n = root["detuning_grid"]) {
    if (root["detunings_hz"]) throw ConfigError("give either detunings_hz or detuning_grid", line_of(n));
    line = line_of(n);
    only_keys(n, {"start_hz", "stop_hz", "step_hz"}, "detuning_grid");
    if (!n["start_hz"] || !n["stop_hz"] || !n["step_hz"])
      throw ConfigError("detuning_grid needs start_hz, stop_hz and step_hz", line);
    const double a = value<double>(n["start_hz"], "start_hz"), b = value<double>(n["stop_hz"], "stop_hz"),
                 s = value<double>(n["step_hz"], "step_hz");
    if (!(s > 0.0)) throw ConfigError("step_hz must be positive", line_of(n["step_hz"]));
    const auto count = static_cast<long>(std::floor((b - a) / s + 1e-9));
    for (long k = 0; k <= count; ++k) out.push_back(a + static_cast<double>(k) * s);
  }
  return out;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line + 1);
  }
  RunConfig c;
  c.source = text;
  if (root.IsNull()) return c;
  only_keys(root, {"seed", "drive", "detunings_hz", "detuning_grid", "resonances", "geometry", "toy", "analytic", "mc",
                   "prethermal", "fit"},
            "top level");
  read(root, "seed", c.seed);

  if (const YAML::Node d = root["drive"]) {
    only_keys(d, {"pulse_width_us", "period_us", "rabi_hz", "detuning_hz"}, "drive");
    read_positive(d, "pulse_width_us", c.drive.pulse_width, 1e-6);
    read_positive(d, "period_us", c.drive.period, 1e-6);
    read(d, "rabi_hz", c.drive.rabi_hz);
    read(d, "detuning_hz", c.drive.detuning_hz);
    try {
      c.drive.validate();
    } catch (const DomainError& e) {
      throw ConfigError(e.what(), line_of(d));
    }
  }
  int grid_line = 0;
  c.has_detunings = root["detunings_hz"] || root["detuning_grid"];
  c.detunings = read_grid(root, grid_line);
  if (c.has_detunings && c.detunings.empty()) throw ConfigError("detuning grid is empty", grid_line);

  if (const YAML::Node r = root["resonances"]) {
    only_keys(r, {"k", "scan_min_hz", "scan_max_hz", "scan_points"}, "resonances");
    if (const YAML::Node k = r["k"]) {
      c.ks.clear();
      if (k.IsSequence())
        for (const auto& v : k) c.ks.push_back(value<int>(v, "k"));
      else
        c.ks.push_back(value<int>(k, "k"));
      for (int v : c.ks)
        if (v < 1) throw ConfigError("k must be at least 1", line_of(k));
    }
    read(r, "scan_min_hz", c.scan.scan_min_hz);
    read(r, "scan_max_hz", c.scan.scan_max_hz);
    read(r, "scan_points", c.scan.points);
    if (!(c.scan.scan_max_hz > c.scan.scan_min_hz) || c.scan.points < 2)
      throw ConfigError("bad resonance scan range", line_of(r));
  }
  c.analytic.scan = c.scan;

  if (const YAML::Node g = root["geometry"]) {
    const auto p = value<std::string>(g, "geometry");
    c.geometry_path = (std::filesystem::path(base_dir) / p).lexically_normal().string();
  }

  if (const YAML::Node t = root["toy"]) {
    only_keys(t, {"t1e_ms", "lindblad_rate", "t_max_ms", "samples", "dim_cap"}, "toy");
    read_positive(t, "t1e_ms", c.toy.t1e, 1e-3);
    if (const YAML::Node l = t["lindblad_rate"]) {
      if (l.IsScalar() && l.Scalar() == "auto") c.toy.lindblad_rate = -1.0;
      else {
        c.toy.lindblad_rate = value<double>(l, "lindblad_rate");
        if (c.toy.lindblad_rate < 0.0) throw ConfigError("lindblad_rate must be nonnegative or auto", line_of(l));
      }
    }
    read(t, "t_max_ms", c.toy.t_max);
    c.toy.t_max *= 1e-3;
    read(t, "samples", c.toy.samples);
    read(t, "dim_cap", c.toy.dim_cap);
    if (c.toy.samples < 8) throw ConfigError("toy.samples must be at least 8", line_of(t));
  }

  if (const YAML::Node a = root["analytic"]) {
    only_keys(a, {"t1e_ms", "n_max", "eps_res", "grid_points", "electron"}, "analytic");
    read_positive(a, "t1e_ms", c.analytic.t1e, 1e-3);
    read(a, "n_max", c.analytic.n_max);
    read(a, "eps_res", c.analytic.eps_res);
    read(a, "grid_points", c.analytic.grid_points);
    read(a, "electron", c.analytic.electron);
    if (c.analytic.n_max < 1 || c.analytic.grid_points < 64) throw ConfigError("bad analytic expansion sizes", line_of(a));
  }

  c.mc.lattice.seed = c.seed;
  if (const YAML::Node m = root["mc"]) {
    only_keys(m, {"occupancy", "electron_ppm", "box_nm", "barrier_nm", "electron_spin", "eta", "kappa2J0", "n_configs",
                  "weighting", "t_max_s", "time_points", "n_max"},
              "mc");
    read(m, "occupancy", c.mc.lattice.carbon_occupancy);
    read(m, "electron_ppm", c.mc.lattice.electron_density_ppm);
    read_positive(m, "box_nm", c.mc.lattice.box_halfwidth, 1e-9);
    read(m, "barrier_nm", c.mc.lattice.barrier_radius);
    if (m["barrier_nm"]) c.mc.lattice.barrier_radius *= 1e-9;
    read(m, "electron_spin", c.mc.lattice.electron_spin);
    read(m, "eta", c.mc.eta);
    read(m, "kappa2J0", c.mc.kappa2j0);
    read(m, "n_configs", c.mc.n_configs);
    read(m, "n_max", c.mc.n_max);
    if (const YAML::Node w = m["weighting"]) {
      const auto s = value<std::string>(w, "weighting");
      if (s == "secular") c.mc.weighting = HyperfineWeighting::secular;
      else if (s == "non_secular") c.mc.weighting = HyperfineWeighting::non_secular;
      else throw ConfigError("weighting must be secular or non_secular", line_of(w));
    }
    if (m["t_max_s"] || m["time_points"]) {
      double tmax = 0.4;
      int points = 161;
      read_positive(m, "t_max_s", tmax);
      read(m, "time_points", points);
      if (points < 8) throw ConfigError("mc.time_points must be at least 8", line_of(m));
      c.mc.time_grid.clear();
      for (int k = 0; k < points; ++k) c.mc.time_grid.push_back(tmax * std::pow(k / (points - 1.0), 2.0));
    }
    try {
      c.mc.validate();
    } catch (const DomainError& e) {
      throw ConfigError(e.what(), line_of(m));
    }
  }

  if (const YAML::Node p = root["prethermal"]) {
    only_keys(p, {"window_ms", "pauli_weight", "cluster_spins", "cluster_occupancy"}, "prethermal");
    if (const YAML::Node w = p["window_ms"]) {
      if (!w.IsSequence() || w.size() != 2) throw ConfigError("window_ms must be [start, end]", line_of(w));
      c.prethermal.window_start = value<double>(w[0], "window_ms") * 1e-3;
      c.prethermal.window_end = value<double>(w[1], "window_ms") * 1e-3;
      if (!(c.prethermal.window_end > c.prethermal.window_start) || c.prethermal.window_start < 0.0)
        throw ConfigError("window_ms must be increasing and nonnegative", line_of(w));
    }
    read(p, "pauli_weight", c.pauli);
    read(p, "cluster_spins", c.cluster_spins);
    read(p, "cluster_occupancy", c.cluster_occupancy);
    if (c.cluster_spins < 1 || c.cluster_spins > 12) throw ConfigError("cluster_spins must be in 1..12", line_of(p));
    if (!(c.cluster_occupancy > 0.0) || c.cluster_occupancy > 1.0)
      throw ConfigError("cluster_occupancy must be in (0, 1]", line_of(p));
  }

  if (const YAML::Node f = root["fit"]) {
    only_keys(f, {"input", "model", "center_hz", "halfwidth_hz", "y_column"}, "fit");
    if (f["y_column"]) c.fit_y_column = value<std::string>(f["y_column"], "y_column");
    if (f["input"]) c.fit_input = (std::filesystem::path(base_dir) / value<std::string>(f["input"], "input")).string();
    read(f, "model", c.fit_model);
    if (c.fit_model != "decay" && c.fit_model != "lorentzian")
      throw ConfigError("fit.model must be decay or lorentzian", line_of(f["model"]));
    if (f["center_hz"]) c.fit_center_hz = value<double>(f["center_hz"], "center_hz");
    if (f["halfwidth_hz"]) c.fit_halfwidth_hz = value<double>(f["halfwidth_hz"], "halfwidth_hz");
    if (c.fit_center_hz.has_value() != c.fit_halfwidth_hz.has_value())
      throw ConfigError("fit window needs both center_hz and halfwidth_hz", line_of(f));
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::filesystem::path(path).parent_path().string());
}

}  // namespace floq
