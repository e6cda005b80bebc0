#include "floq/lattice.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace floq {
namespace {

double secular_coupling(const Vec3& a, const Vec3& b, const Vec3& axis, double gamma_prod) {
  const Vec3 r = a - b;
  const double rn = r.norm();
  if (!(rn > 0.0)) throw DomainError("coupling requested for coincident positions");
  const double c = r.dot(axis.normalized()) / rn;
  // Angular coupling in rad/s, returned in cyclic units.
  const double w = -phys::mu0_over_4pi * phys::hbar * gamma_prod * (3.0 * c * c - 1.0) / (rn * rn * rn);
  return w / kTwoPi;
}

}  // namespace

void LatticeConfig::validate() const {
  if (!(lattice_constant > 0.0)) throw DomainError("lattice_constant must be positive");
  if (!(box_halfwidth >= 0.5 * lattice_constant))
    throw DomainError("box_halfwidth must be at least half a lattice constant");
  if (!(carbon_occupancy >= 0.0 && carbon_occupancy <= 1.0))
    throw DomainError("carbon_occupancy must lie in [0, 1]");
  if (!(electron_density_ppm >= 0.0 && electron_density_ppm <= 1e6))
    throw DomainError("electron_density_ppm must lie in [0, 1e6]");
  if (!(barrier_radius >= 0.0)) throw DomainError("barrier_radius must be non-negative");
  if (electron_spin != 0.5 && electron_spin != 1.0) throw DomainError("electron_spin must be 0.5 or 1");
  if (!(field_axis.norm() > 0.0)) throw DomainError("field_axis must be non-zero");
}

double dipolar_coupling(const Vec3& ri, const Vec3& rj, const Vec3& field_axis) {
  return secular_coupling(ri, rj, field_axis, phys::gamma_13c * phys::gamma_13c);
}

double hyperfine_coupling(const Vec3& ri, const Vec3& rmu, const Vec3& field_axis) {
  return secular_coupling(ri, rmu, field_axis, phys::gamma_e * phys::gamma_13c);
}

SpinClusterGeometry make_geometry(std::vector<Vec3> nuclei, std::vector<Vec3> electrons,
                                  std::vector<double> electron_spins, const Vec3& field_axis) {
  if (electron_spins.size() != electrons.size()) throw DomainError("one spin label per electron required");
  SpinClusterGeometry g;
  g.field_axis = field_axis.normalized();
  g.nuclear_positions = std::move(nuclei);
  g.electron_positions = std::move(electrons);
  g.electron_spins = std::move(electron_spins);
  const auto n = static_cast<Eigen::Index>(g.n_nuclei());
  const auto m = static_cast<Eigen::Index>(g.n_electrons());
  g.dipolar = MatR::Zero(n, n);
  g.hyperfine = MatR::Zero(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = dipolar_coupling(g.nuclear_positions[i], g.nuclear_positions[j], g.field_axis);
      g.dipolar(i, j) = g.dipolar(j, i) = d;
    }
    for (Eigen::Index k = 0; k < m; ++k)
      g.hyperfine(i, k) = hyperfine_coupling(g.nuclear_positions[i], g.electron_positions[k], g.field_axis);
  }
  return g;
}

std::vector<Vec3> diamond_sites(double a0, double halfwidth) {
  static const std::array<Vec3, 8> basis = {
      Vec3(0, 0, 0),         Vec3(0, 0.5, 0.5),     Vec3(0.5, 0, 0.5),     Vec3(0.5, 0.5, 0),
      Vec3(0.25, 0.25, 0.25), Vec3(0.25, 0.75, 0.75), Vec3(0.75, 0.25, 0.75), Vec3(0.75, 0.75, 0.25)};
  std::vector<Vec3> sites;
  const int cmin = static_cast<int>(std::floor(-halfwidth / a0)) - 1;
  const int cmax = static_cast<int>(std::ceil(halfwidth / a0)) + 1;
  // Small tolerance so that sites on the lower face are kept and the upper face excluded.
  const double eps = 1e-9 * a0;
  for (int i = cmin; i <= cmax; ++i)
    for (int j = cmin; j <= cmax; ++j)
      for (int k = cmin; k <= cmax; ++k)
        for (const Vec3& b : basis) {
          const Vec3 p = a0 * (Vec3(i, j, k) + b);
          if ((p.array() >= -halfwidth - eps).all() && (p.array() < halfwidth - eps).all()) sites.push_back(p);
        }
  return sites;
}

SampledConfiguration sample_configuration(const LatticeConfig& cfg) {
  cfg.validate();
  const auto sites = diamond_sites(cfg.lattice_constant, cfg.box_halfwidth);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double pe = cfg.electron_density_ppm * 1e-6;
  const double pc = cfg.carbon_occupancy * (1.0 - pe);
  std::vector<Vec3> nuclei, electrons;
  for (const Vec3& s : sites) {
    const double u = uni(rng);  // one draw per site keeps the stream layout fixed
    if (u < pe) electrons.push_back(s);
    else if (u < pe + pc) nuclei.push_back(s);
  }
  const double b2 = cfg.barrier_radius * cfg.barrier_radius;
  std::erase_if(nuclei, [&](const Vec3& r) {
    return std::any_of(electrons.begin(), electrons.end(),
                       [&](const Vec3& e) { return (r - e).squaredNorm() < b2; });
  });
  SampledConfiguration out;
  out.n_sites = sites.size();
  out.empty = nuclei.empty();
  std::vector<double> spins(electrons.size(), cfg.electron_spin);
  out.geometry = make_geometry(std::move(nuclei), std::move(electrons), std::move(spins), cfg.field_axis);
  return out;
}

SpinClusterGeometry sample_cluster(const LatticeConfig& cfg, std::size_t n_spins) {
  cfg.validate();
  if (n_spins == 0) throw DomainError("sample_cluster: n_spins must be positive");
  if (cfg.carbon_occupancy <= 0.0) throw DomainError("sample_cluster: occupancy must be positive");
  const double a0 = cfg.lattice_constant;
  // Radius holding about 3x the requested count on average.
  const double density = 8.0 * cfg.carbon_occupancy / (a0 * a0 * a0);
  double half = std::max(cfg.box_halfwidth, std::cbrt(3.0 * n_spins / density / (4.0 / 3.0 * kPi)) + a0);
  LatticeConfig c = cfg;
  c.electron_density_ppm = 0.0;
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const Vec3 centre = a0 * Vec3(uni(rng), uni(rng), uni(rng));
  for (int attempt = 0; attempt < 8; ++attempt, half *= 1.5) {
    c.box_halfwidth = half;
    const auto sc = sample_configuration(c);
    std::vector<Vec3> nuc = sc.geometry.nuclear_positions;
    if (nuc.size() < n_spins) continue;
    std::stable_sort(nuc.begin(), nuc.end(), [&](const Vec3& a, const Vec3& b) {
      return (a - centre).squaredNorm() < (b - centre).squaredNorm();
    });
    // Cluster must be well inside the box for the nearest-n set to be exact.
    if ((nuc[n_spins - 1] - centre).norm() > half - a0) continue;
    nuc.resize(n_spins);
    return make_geometry(std::move(nuc), {}, {}, cfg.field_axis);
  }
  throw NumericalError("sample_cluster: could not collect enough nuclei");
}

CouplingSummary summarize_couplings(const SpinClusterGeometry& g) {
  CouplingSummary s;
  const auto n = g.dipolar.rows();
  if (n < 2) return s;
  std::vector<double> nn(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) nn[i] = g.dipolar.row(i).cwiseAbs().maxCoeff();
  double sum = 0.0;
  for (double v : nn) sum += v;
  s.nn_mean_hz = sum / n;
  std::sort(nn.begin(), nn.end());
  s.nn_median_hz = (n % 2) ? nn[n / 2] : 0.5 * (nn[n / 2 - 1] + nn[n / 2]);
  return s;
}

std::string geometry_to_json(const SpinClusterGeometry& g) {
  using nlohmann::json;
  auto vec = [](const Vec3& v) { return json::array({v.x() / phys::angstrom, v.y() / phys::angstrom, v.z() / phys::angstrom}); };
  json j;
  j["units"] = {{"length", "angstrom"}, {"coupling", "Hz"}};
  j["field_axis"] = {g.field_axis.x(), g.field_axis.y(), g.field_axis.z()};
  j["nuclei"] = json::array();
  for (const auto& p : g.nuclear_positions) j["nuclei"].push_back(vec(p));
  j["electrons"] = json::array();
  for (std::size_t k = 0; k < g.n_electrons(); ++k)
    j["electrons"].push_back({{"position", vec(g.electron_positions[k])}, {"spin", g.electron_spins[k]}});
  j["dipolar_hz"] = json::array();
  for (Eigen::Index i = 0; i < g.dipolar.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < g.dipolar.cols(); ++k) row.push_back(g.dipolar(i, k));
    j["dipolar_hz"].push_back(row);
  }
  j["hyperfine_hz"] = json::array();
  for (Eigen::Index i = 0; i < g.hyperfine.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < g.hyperfine.cols(); ++k) row.push_back(g.hyperfine(i, k));
    j["hyperfine_hz"].push_back(row);
  }
  return j.dump(2);
}

SpinClusterGeometry geometry_from_json(const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("geometry JSON: ") + e.what());
  }
  auto vec = [](const json& a) {
    if (!a.is_array() || a.size() != 3) throw ConfigError("geometry JSON: expected a 3-vector");
    return Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
  };
  try {
    std::vector<Vec3> nuclei, electrons;
    std::vector<double> spins;
    for (const auto& p : j.at("nuclei")) nuclei.push_back(vec(p) * phys::angstrom);
    if (j.contains("electrons"))
      for (const auto& e : j["electrons"]) {
        electrons.push_back(vec(e.at("position")) * phys::angstrom);
        spins.push_back(e.value("spin", 0.5));
      }
    const Vec3 axis = j.contains("field_axis") ? vec(j["field_axis"]) : Vec3::UnitZ();
    // Couplings are always recomputed from positions; stored values are informational.
    return make_geometry(std::move(nuclei), std::move(electrons), std::move(spins), axis);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("geometry JSON: ") + e.what());
  }
}

SpinClusterGeometry load_geometry(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open geometry file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return geometry_from_json(ss.str());
}

void save_geometry(const SpinClusterGeometry& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write geometry file " + path);
  out << geometry_to_json(g) << '\n';
}

}  // namespace floq
