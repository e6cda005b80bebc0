#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "floq/common.hpp"
#include "floq/constants.hpp"

namespace floq {

// Lengths in metres. The sampling box is the half-open cube [-L, L)^3 with
// L = box_halfwidth, centred on a lattice site.
struct LatticeConfig {
  double lattice_constant = phys::diamond_a0;
  double box_halfwidth = 2.0 * phys::diamond_a0;
  double carbon_occupancy = 0.011;
  double electron_density_ppm = 0.0;
  double barrier_radius = 16.0 * phys::angstrom;
  double electron_spin = 0.5;
  std::uint64_t seed = 1;
  Vec3 field_axis = Vec3::UnitZ();

  void validate() const;
};

struct SpinClusterGeometry {
  std::vector<Vec3> nuclear_positions;
  std::vector<Vec3> electron_positions;
  std::vector<double> electron_spins;  // 0.5 (P1-like) or 1 (NV-like)
  Vec3 field_axis = Vec3::UnitZ();
  MatR dipolar;    // n_nuclei x n_nuclei, Hz
  MatR hyperfine;  // n_nuclei x n_electrons, Hz

  std::size_t n_nuclei() const { return nuclear_positions.size(); }
  std::size_t n_electrons() const { return electron_positions.size(); }
};

struct SampledConfiguration {
  SpinClusterGeometry geometry;
  std::size_t n_sites = 0;
  bool empty = false;  // no nuclei left after barrier exclusion; caller resamples
};

double dipolar_coupling(const Vec3& ri, const Vec3& rj, const Vec3& field_axis = Vec3::UnitZ());
double hyperfine_coupling(const Vec3& ri, const Vec3& rmu, const Vec3& field_axis = Vec3::UnitZ());

// Builds couplings for the given positions. Throws DomainError on coincident sites.
SpinClusterGeometry make_geometry(std::vector<Vec3> nuclei, std::vector<Vec3> electrons,
                                  std::vector<double> electron_spins,
                                  const Vec3& field_axis = Vec3::UnitZ());

std::vector<Vec3> diamond_sites(double a0, double halfwidth);

SampledConfiguration sample_configuration(const LatticeConfig& cfg);

// The n nuclei nearest a uniformly random point of the central conventional
// cell, drawn from a configuration sampled with cfg (electrons dropped).
// The box is enlarged until enough nuclei are present.
SpinClusterGeometry sample_cluster(const LatticeConfig& cfg, std::size_t n_spins);

struct CouplingSummary {
  double nn_median_hz = 0.0;  // median over nuclei of the strongest |d_ij|
  double nn_mean_hz = 0.0;
};
CouplingSummary summarize_couplings(const SpinClusterGeometry& g);

// Flat JSON: positions in angstrom, couplings in Hz.
std::string geometry_to_json(const SpinClusterGeometry& g);
SpinClusterGeometry geometry_from_json(const std::string& text);
SpinClusterGeometry load_geometry(const std::string& path);
void save_geometry(const SpinClusterGeometry& g, const std::string& path);

}  // namespace floq
