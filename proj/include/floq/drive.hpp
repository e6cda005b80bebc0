#pragma once

#include <vector>

#include "floq/common.hpp"
#include "floq/wigner.hpp"

namespace floq {

// Rectangular pulse train. Each period is a free-precession delay of length
// T - tau_p followed by the pulse, so stroboscopic times sit at pulse ends.
// Frequencies are cyclic (Hz).
struct DriveSequence {
  double pulse_width = 56e-6;  // s
  double period = 92e-6;       // s
  double rabi_hz = 4460.0;
  double detuning_hz = 0.0;

  void validate() const;
  double drive_hz() const { return 1.0 / period; }
  double delay() const { return period - pulse_width; }
  DriveSequence with_detuning(double dw) const {
    DriveSequence s = *this;
    s.detuning_hz = dw;
    return s;
  }
};

struct EffectiveDrive {
  double theta_eff = 0.0;         // polar angle of the axis
  double phi_eff = 0.0;           // azimuth of the axis
  double omega_eff_hz = 0.0;      // principal branch, in [0, drive/2]
  Vec3 axis = Vec3::UnitZ();
  double psi = 0.0;               // nutation angle during the pulse
  double interpulse_phase = 0.0;  // precession angle during the delay
  double alpha = 0.0;             // pulse axis polar angle, atan2(w1, dw)
  double drive_hz = 0.0;
  bool degenerate_axis = false;   // rotation angle ~ 0, axis meaningless
  bool branch_flipped = false;    // -U was used to land on the principal branch
  Mat2 one_cycle = Mat2::Identity();

  // Closed-form cross-check values (NaN where the expression is out of domain).
  double closed_form_theta = 0.0;
  double closed_form_omega_hz = 0.0;
  bool closed_form_consistent = true;

  double rotation_angle() const { return kTwoPi * omega_eff_hz / drive_hz; }
  Mat2 reconstructed() const;
};

Mat2 pulse_segment(const DriveSequence& s, double dt);
Mat2 delay_segment(const DriveSequence& s, double dt);
// Drive propagator from 0 to t within one period, t in [0, T].
Mat2 drive_propagator(const DriveSequence& s, double t);
Mat2 one_cycle_propagator(const DriveSequence& s);

EffectiveDrive compose_one_cycle(const DriveSequence& s);

// Unfolded Re tr(U)/2 = cos(theta/2) before branch selection.
double half_trace(const DriveSequence& s);

struct MicromotionTrajectory {
  DriveSequence seq;
  EffectiveDrive eff;
  std::vector<double> times;   // inclusive of 0 and T
  std::vector<Euler> angles;   // zyz angles of P(t)
  std::size_t breakpoint = 0;  // index of the delay/pulse edge
};

Mat2 micromotion_operator(const DriveSequence& s, const EffectiveDrive& eff, double t);
MicromotionTrajectory micromotion(const DriveSequence& s, std::size_t grid_points = 512);

// f^l_{mn} = T^-1 int D^l_{m0}(P(t)^-1) exp(-i n w_d t) dt, the expansion
// coefficients of the frame-transformed rank-l zero component.
struct FourierCoefficientTable {
  int l = 0;
  int n_max = 0;
  MatC coeff;                 // row m+l, column n+n_max
  double tail_energy = 0.0;   // share of |f|^2 in the outermost harmonics
  double quadrature_error = 0.0;  // max change against the half-resolution rule

  cplx at(int m, int n) const { return coeff(m + l, n + n_max); }
};

FourierCoefficientTable fourier_coefficients(const MicromotionTrajectory& traj, int l, int n_max = 10);

struct ResonanceScan {
  double scan_min_hz = 0.0;
  double scan_max_hz = 6000.0;
  std::size_t points = 1200;
  double tol_hz = 1e-7;
};

// Roots of k w_eff(dw) = w_d on the principal branch, ascending.
std::vector<double> find_resonances(const DriveSequence& tmpl, int k, const ResonanceScan& scan = {});

}  // namespace floq
