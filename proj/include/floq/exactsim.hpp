#pragma once

#include <optional>
#include <vector>

#include "floq/analysis.hpp"
#include "floq/drive.hpp"
#include "floq/lattice.hpp"
#include "floq/parallel.hpp"

namespace floq {

// N nuclei plus one electron with Lindblad relaxation. The electron is the
// last tensor factor. lindblad_rate < 0 selects the rate matching T1e.
struct ToyModelSpec {
  SpinClusterGeometry geometry;
  double t1e = 0.05;
  double lindblad_rate = -1.0;  // s^-1
  DriveSequence drive;
  double t_max = 0.0;           // s; 0 picks it from the decay
  std::size_t samples = 400;
  std::size_t dim_cap = 64;

  double electron_spin() const;
  double gamma() const;
  int nuclear_dim() const { return 1 << static_cast<int>(geometry.n_nuclei()); }
  int electron_dim() const;
  void validate() const;
};

// Rate that makes the dissipator's population rates equal 1/T1e between adjacent levels.
double lindblad_rate_for(double spin, double t1e);

enum class Segment { pulse, delay };

struct SuperOperator {
  MatC m;  // column-stacking vec convention
  int hilbert_dim = 0;
};

// Hilbert-space Hamiltonian (Hz) for a segment.
MatC toy_hamiltonian(const ToyModelSpec& spec, Segment seg);

// Full generator, or with m_s given the nuclear-only generator of that manifold.
SuperOperator build_liouvillian(const ToyModelSpec& spec, Segment seg, std::optional<double> m_s = std::nullopt);

// Electron population block of the dissipator (the w matrix), ordered m = S..-S.
MatR population_rates(const ToyModelSpec& spec);

// Exact restriction of the generator to electron-diagonal states
// rho = sum_m rho_m (x) |m><m|, vector layout [vec(rho_S), ..., vec(rho_-S)].
MatC block_generator(const ToyModelSpec& spec, Segment seg);

// One-period map exp(L_pulse tau_p) exp(L_delay (T - tau_p)).
MatC one_period_channel(const MatC& l_pulse, const MatC& l_delay, const DriveSequence& d);

struct DeviationState {
  MatC rho;
  void validate(double tol = 1e-12) const;
};

struct MagnetizationTrace {
  std::vector<double> times;
  std::vector<double> ix, iy, iz, n_eff, m_pre;
  bool truncated = false;  // decay not reached e^-3 within the period cap
};

MagnetizationTrace propagate_stroboscopic(const ToyModelSpec& spec);

// Product-decay fit of n_eff.I normalised to its first post-transient sample.
DecayFit extract_heating_rate(const MagnetizationTrace& trace, const FitTolerances& tol = {});

struct ExactSweepPoint {
  double detuning_hz = 0.0;
  DecayFit fit;
};

std::vector<ExactSweepPoint> sweep_exact(const ToyModelSpec& spec, const std::vector<double>& detunings,
                                         Exec exec = Exec::parallel, int jobs = 0, const FitTolerances& tol = {});

}  // namespace floq
