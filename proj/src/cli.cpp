#include "floq/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "floq/config.hpp"
#include "floq/log.hpp"

namespace floq {
namespace {

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int jobs = 0;
  std::optional<double> tol_gradient, tol_floor, tol_degeneracy, tol_resonance;
  std::optional<int> tol_iterations;
};

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Header block: enough to rerun the artifact.
std::string header(const std::string& cmd, const RunConfig& c, const Flags& f, const FitTolerances& tol) {
  std::ostringstream h;
  h << "# floqheat " << FLOQ_VERSION << "\n# command: " << cmd << "\n# seed: " << c.seed << "\n";
  h << "# tolerances: gradient=" << num(tol.gradient) << " iterations=" << tol.max_iterations
    << " floor=" << num(tol.relative_floor) << " degeneracy=" << num(c.prethermal.degeneracy_tol)
    << " resonance=" << num(c.scan.tol_hz) << "\n";
  h << "# config: " << (f.config.empty() ? "(defaults)" : f.config) << "\n";
  std::istringstream src(c.source);
  for (std::string line; std::getline(src, line);) h << "#   " << line << "\n";
  return h.str();
}

SpinClusterGeometry need_geometry(const RunConfig& c) {
  if (!c.geometry_path) throw ConfigError("this command needs a 'geometry' file");
  try {
    return load_geometry(*c.geometry_path);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("geometry: ") + e.what());
  } catch (const std::runtime_error& e) {
    throw ConfigError(std::string("geometry: ") + e.what());
  }
}

void need_grid(const RunConfig& c) {
  if (!c.has_detunings) throw ConfigError("this command needs detunings_hz or detuning_grid");
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::string render() const {
    std::ostringstream o;
    for (std::size_t k = 0; k < columns.size(); ++k) o << (k ? "," : "") << columns[k];
    o << "\n";
    for (const auto& r : rows) {
      for (std::size_t k = 0; k < r.size(); ++k) o << (k ? "," : "") << r[k];
      o << "\n";
    }
    return o.str();
  }
};

std::string cmd_resonances(const RunConfig& c) {
  Table t{{"k", "detuning_hz", "omega_eff_hz"}, {}};
  for (int k : c.ks)
    for (double r : find_resonances(c.drive, k, c.scan))
      t.rows.push_back({std::to_string(k), num(r), num(compose_one_cycle(c.drive.with_detuning(r)).omega_eff_hz)});
  return t.render();
}

std::string cmd_rates(const RunConfig& c) {
  need_grid(c);
  const SpinClusterGeometry g = need_geometry(c);
  const AnalyticRateModel m(g, c.drive, c.analytic);
  Table t{{"detuning_hz", "R_kick", "R_2SF", "R_3SF", "R_total"}, {}};
  for (double dw : c.detunings) {
    const RateBreakdown r = m.at(dw);
    t.rows.push_back({num(dw), num(r.kick), num(r.two_flip), num(r.three_flip), num(r.total)});
  }
  return t.render();
}

std::string cmd_exact(const RunConfig& c, Exec exec, int jobs, const FitTolerances& tol) {
  need_grid(c);
  ToyModelSpec spec = c.toy;
  spec.geometry = need_geometry(c);
  spec.drive = c.drive;
  try {
    spec.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  Table t{{"detuning_hz", "R_p", "R_d", "fit_quality", "converged"}, {}};
  for (const auto& p : sweep_exact(spec, c.detunings, exec, jobs, tol))
    t.rows.push_back({num(p.detuning_hz), num(p.fit.rp), num(p.fit.rd), num(p.fit.residual_norm),
                      p.fit.converged ? "1" : "0"});
  return t.render();
}

std::string cmd_mc(const RunConfig& c, Exec exec, int jobs, const FitTolerances& tol) {
  need_grid(c);
  MonteCarloConfig m = c.mc;
  m.drive = c.drive;
  m.lattice.seed = c.seed;
  Table t{{"detuning_hz", "R_p", "R_d", "n_spins_mean", "flagged"}, {}};
  for (const auto& p : ensemble_sweep(m, c.detunings, exec, jobs, tol))
    t.rows.push_back({num(p.detuning_hz), num(p.fit.rp), num(p.fit.rd), num(p.n_spins_mean), p.flagged ? "1" : "0"});
  return t.render();
}

std::string cmd_prethermal(const RunConfig& c, Exec exec, int jobs) {
  need_grid(c);
  SpinClusterGeometry g;
  if (c.geometry_path) {
    g = need_geometry(c);
  } else {
    LatticeConfig l;
    l.carbon_occupancy = c.cluster_occupancy;
    l.seed = c.seed;
    g = sample_cluster(l, c.cluster_spins);
  }
  if (g.n_nuclei() > c.prethermal.max_spins) throw ConfigError("prethermal: cluster has more than 12 nuclei");
  Table t{{"detuning_hz", "M_pre", "M_pre_window", "pauli_weight"}, {}};
  for (const auto& p : sweep_prethermal(g, c.drive, c.detunings, c.pauli, exec, jobs, c.prethermal))
    t.rows.push_back({num(p.detuning_hz), num(p.m_pre), num(p.m_pre_window), num(p.pauli_weight)});
  return t.render();
}

// Two numeric columns from a CSV; '#' lines skipped, an optional name row picks the y column.
std::pair<std::vector<double>, std::vector<double>> read_xy(const std::string& path,
                                                            const std::optional<std::string>& ycol) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read fit input " + path);
  std::vector<double> x, y;
  std::size_t yi = 1;
  bool named = false;
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (!named && x.empty()) {
      char* end = nullptr;
      std::strtod(cells[0].c_str(), &end);
      if (end == cells[0].c_str()) {
        named = true;
        if (ycol) {
          const auto it = std::find(cells.begin(), cells.end(), *ycol);
          if (it == cells.end()) throw ConfigError("fit input has no column '" + *ycol + "'");
          yi = static_cast<std::size_t>(it - cells.begin());
        }
        continue;
      }
    }
    if (cells.size() <= yi) throw ConfigError("fit input: too few columns", line_no);
    try {
      x.push_back(std::stod(cells[0]));
      y.push_back(std::stod(cells[yi]));
    } catch (const std::exception&) {
      throw ConfigError("fit input: not a number", line_no);
    }
  }
  if (ycol && !named) throw ConfigError("fit input has no header row for y_column");
  return {x, y};
}

std::string cmd_fit(const RunConfig& c, const FitTolerances& tol) {
  if (!c.fit_input) throw ConfigError("fit needs fit.input");
  const auto [x, y] = read_xy(*c.fit_input, c.fit_y_column);
  nlohmann::ordered_json j;
  j["version"] = FLOQ_VERSION;
  j["seed"] = c.seed;
  j["input"] = *c.fit_input;
  j["model"] = c.fit_model;
  if (c.fit_model == "decay") {
    const DecayFit f = fit_product_decay(x, y, tol);
    j["R_p"] = f.rp;
    j["R_d"] = f.rd;
    j["amplitude"] = f.amplitude;
    j["effective_rate"] = f.effective_rate();
    j["residual_norm"] = f.residual_norm;
    j["converged"] = f.converged;
    j["iterations"] = f.iterations;
    j["note"] = f.note;
  } else {
    const ResonanceFit f = c.fit_center_hz ? fit_lorentzian_window(x, y, *c.fit_center_hz, *c.fit_halfwidth_hz, tol)
                                           : fit_lorentzian_sweep(x, y, tol);
    j["center_hz"] = f.center_hz;
    j["width_hz"] = f.width_hz;
    j["amplitude"] = f.amplitude;
    j["amplitude_sigma"] = f.amplitude_sigma;
    j["background0"] = f.background0;
    j["background1"] = f.background1;
    j["residual_norm"] = f.residual_norm;
    j["converged"] = f.converged;
    j["detected"] = f.detected;
  }
  return j.dump(2) + "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Floquet heating simulation and analysis"};
  app.set_version_flag("--version", FLOQ_VERSION);
  app.require_subcommand(1);
  Flags f;
  const std::vector<std::string> names = {"resonances", "rates-analytic", "sweep-exact", "sweep-mc", "prethermal", "fit"};
  for (const auto& n : names) {
    CLI::App* s = app.add_subcommand(n);
    s->add_option("--config", f.config, "YAML configuration")->check(CLI::ExistingFile);
    s->add_option("--out", f.out, "output file (default stdout)");
    s->add_option("--seed", f.seed, "overrides the config seed");
    s->add_option("--jobs", f.jobs, "worker threads, 1 runs serially")->check(CLI::NonNegativeNumber);
    s->add_option("--tol-gradient", f.tol_gradient, "fit gradient tolerance")->check(CLI::PositiveNumber);
    s->add_option("--tol-iterations", f.tol_iterations, "fit iteration cap")->check(CLI::PositiveNumber);
    s->add_option("--tol-floor", f.tol_floor, "relative residual floor")->check(CLI::NonNegativeNumber);
    s->add_option("--tol-degeneracy", f.tol_degeneracy, "quasi-energy grouping, rad")->check(CLI::PositiveNumber);
    s->add_option("--tol-resonance", f.tol_resonance, "root bracketing, Hz")->check(CLI::PositiveNumber);
  }
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_config;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  try {
    RunConfig c = f.config.empty() ? parse_config("") : load_config(f.config);
    if (f.seed) {
      c.seed = *f.seed;
      c.mc.lattice.seed = *f.seed;
    }
    FitTolerances tol = cmd == "sweep-mc" ? FitTolerances::unweighted() : FitTolerances{};
    if (f.tol_gradient) tol.gradient = *f.tol_gradient;
    if (f.tol_iterations) tol.max_iterations = *f.tol_iterations;
    if (f.tol_floor) tol.relative_floor = *f.tol_floor;
    if (f.tol_degeneracy) c.prethermal.degeneracy_tol = *f.tol_degeneracy;
    if (f.tol_resonance) {
      c.scan.tol_hz = *f.tol_resonance;
      c.analytic.scan.tol_hz = *f.tol_resonance;
    }
    if (!f.out.empty()) {
      const auto dir = std::filesystem::path(f.out).parent_path();
      if (!dir.empty() && !std::filesystem::is_directory(dir))
        throw ConfigError("output directory does not exist: " + dir.string());
    }
    const Exec exec = f.jobs == 1 ? Exec::serial : Exec::parallel;

    std::string body;
    if (cmd == "resonances") body = cmd_resonances(c);
    else if (cmd == "rates-analytic") body = cmd_rates(c);
    else if (cmd == "sweep-exact") body = cmd_exact(c, exec, f.jobs, tol);
    else if (cmd == "sweep-mc") body = cmd_mc(c, exec, f.jobs, tol);
    else if (cmd == "prethermal") body = cmd_prethermal(c, exec, f.jobs);
    else body = cmd_fit(c, tol);

    const std::string text = cmd == "fit" ? body : header(cmd, c, f, tol) + body;
    if (f.out.empty()) {
      out << text;
    } else {
      std::ofstream o(f.out);
      if (!o) throw ConfigError("cannot write " + f.out);
      o << text;
    }
    return exit_ok;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << "\n";
    return exit_config;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return exit_numerical;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return exit_numerical;
  }
}

}  // namespace floq
