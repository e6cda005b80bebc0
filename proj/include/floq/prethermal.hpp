#pragma once

#include <vector>

#include "floq/drive.hpp"
#include "floq/exactsim.hpp"
#include "floq/lattice.hpp"
#include "floq/parallel.hpp"

namespace floq {

// Closed nuclear cluster, initial state ~ I_x. Any electrons in the geometry are ignored.
struct PrethermalOptions {
  double window_start = 10e-3;  // s, finite-time average window
  double window_end = 20e-3;
  double degeneracy_tol = 1e-9;  // quasi-energy grouping, rad
  bool keep_state = true;        // build the diagonal-ensemble density matrix
  std::size_t max_spins = 12;
};

struct PrethermalResult {
  DeviationState state;        // diagonal ensemble of I_x, empty when not kept
  double m_pre = 0.0;          // <I_x> of the infinite-time diagonal ensemble over Tr(I_x^2)
  double m_pre_window = 0.0;   // <I_x> averaged over the stroboscopic window
  VecR quasi_energies;         // rad per period, in (-pi, pi]
  std::size_t degenerate_groups = 0;
};

PrethermalResult prethermal_state(const SpinClusterGeometry& g, const DriveSequence& d,
                                  const PrethermalOptions& opt = {});

// Mean number of non-identity factors over the Pauli-string expansion of the
// traceless part, weighted by |c_P|^2. Qubit registers up to 12 spins.
double pauli_weight(const DeviationState& s);

struct PrethermalSweepPoint {
  double detuning_hz = 0.0;
  double m_pre = 0.0;
  double m_pre_window = 0.0;
  double pauli_weight = 0.0;  // NaN when not computed
};

std::vector<PrethermalSweepPoint> sweep_prethermal(const SpinClusterGeometry& g, const DriveSequence& d,
                                                   const std::vector<double>& detunings, bool with_weight,
                                                   Exec exec = Exec::parallel, int jobs = 0,
                                                   const PrethermalOptions& opt = {});

}  // namespace floq
