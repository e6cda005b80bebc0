#pragma once

#include <vector>

#include "floq/analysis.hpp"
#include "floq/drive.hpp"
#include "floq/lattice.hpp"
#include "floq/parallel.hpp"

namespace floq {

// How the electron field enters the on-site relaxation. non_secular uses the
// share of the hyperfine tensor that is not conserved along the effective
// axis, 1 - s1^2; secular uses the rescaled coupling s1 h itself.
enum class HyperfineWeighting { secular, non_secular };

// 2.5 nm half-width box at natural abundance with 100 ppm electrons.
inline LatticeConfig default_mc_lattice() {
  LatticeConfig l;
  l.box_halfwidth = 2.5e-9;
  l.electron_density_ppm = 100.0;
  return l;
}

struct MonteCarloConfig {
  LatticeConfig lattice = default_mc_lattice();
  double eta = 2.0e-4;       // s^-1 Hz^-2
  double kappa2j0 = 0.1;     // s^-1 Hz^-2
  std::size_t n_configs = 24;
  std::vector<double> time_grid;  // s; empty picks a default grid
  DriveSequence drive;
  HyperfineWeighting weighting = HyperfineWeighting::non_secular;
  int n_max = 10;
  std::size_t grid_points = 512;

  void validate() const;
  std::vector<double> times() const;
};

// Secular scale factors of the rank-1 and rank-2 interactions in the
// micromotion plus tilted frame.
struct CouplingScales {
  double dipolar = 1.0;
  double hyperfine = 1.0;
  double dipolar_imag = 0.0;
  double hyperfine_imag = 0.0;
  bool flagged = false;  // imaginary residue above tolerance
};

CouplingScales coupling_scales(const EffectiveDrive& eff, const FourierCoefficientTable& f1,
                               const FourierCoefficientTable& f2, double imag_tol = 1e-8);
CouplingScales coupling_scales(const DriveSequence& d, int n_max = 10, std::size_t grid_points = 512);

struct RescaledCouplings {
  MatR dipolar;    // Hz
  MatR hyperfine;  // Hz
  CouplingScales scales;
};

RescaledCouplings rescale_couplings(const SpinClusterGeometry& g, const CouplingScales& s);

struct TransportModel {
  VecR relaxation;  // diagonal of R, s^-1
  MatR transport;   // W, s^-1
  MatR dipolar, hyperfine;

  MatR generator() const;
};

TransportModel build_transport(const SpinClusterGeometry& g, const RescaledCouplings& c, double eta,
                               double kappa2j0, HyperfineWeighting weighting = HyperfineWeighting::non_secular);

struct PolarizationTrajectory {
  std::vector<double> times;
  std::vector<double> mean;
  MatR p;  // n_nuclei x n_times
};

PolarizationTrajectory propagate_polarization(const TransportModel& m, const VecR& p0,
                                              const std::vector<double>& times);

struct MonteCarloPoint {
  double detuning_hz = 0.0;
  DecayFit fit;
  double n_spins_mean = 0.0;
  CouplingScales scales;
  std::vector<double> mean_trajectory;
  bool flagged = false;
};

// Configurations are drawn once and reused at every detuning.
std::vector<SpinClusterGeometry> sample_ensemble(const MonteCarloConfig& cfg);

// The mean trajectory is a noise-free mixture of decays; relative weighting
// would let its far tail set the rates, so the default fit is unweighted.
std::vector<MonteCarloPoint> ensemble_sweep(const MonteCarloConfig& cfg, const std::vector<double>& detunings,
                                            Exec exec = Exec::parallel, int jobs = 0,
                                            const FitTolerances& tol = FitTolerances::unweighted());

}  // namespace floq
