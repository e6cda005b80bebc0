#pragma once

#include <utility>
#include <vector>

#include "floq/drive.hpp"
#include "floq/lattice.hpp"

namespace floq {

// Interaction in the micromotion and tilted frame, split into components
// H^(n,q) that oscillate as exp(+i 2pi (n w_d + q w_eff) t). q multiplies
// w_eff and runs over the tensor rank; n multiplies w_d. Operators act on
// the nuclear register and are in Hz.
struct BimodalComponents {
  int n_max = 0;
  int n_spins = 0;
  double drive_hz = 0.0;
  double omega_eff_hz = 0.0;
  double m_s = 0.0;
  double tail_energy = 0.0;
  std::vector<MatC> h;  // index (n + n_max) * 5 + (q + 2)

  const MatC& at(int n, int q) const;
  double frequency_hz(int n, int q) const { return n * drive_hz + q * omega_eff_hz; }
  MatC resum(double t) const;
};

// Tilt rotation Q = Rz(phi_eff) Ry(theta_eff) as Euler angles.
Euler tilt_angles(const EffectiveDrive& eff);

// c^l_{q,n} = sum_m D^l_{qm}(Q^-1) f^l_{mn}, row q+l, column n+n_max.
MatC tilted_coefficients(const EffectiveDrive& eff, const FourierCoefficientTable& f);

// Hyperfine shifts enter as m_s * h_i for the chosen electron.
BimodalComponents decompose(const SpinClusterGeometry& g, const EffectiveDrive& eff,
                            const FourierCoefficientTable& f1, const FourierCoefficientTable& f2,
                            double m_s, std::size_t electron = 0);

struct EffectiveGenerator {
  MatC first_order;
  MatC second_order;
  MatC resonant_first_order;   // first order without the static (0,0) part
  MatC resonant_second_order;  // second-order terms landing on (n0,q0) != (0,0)
  std::vector<std::pair<int, int>> resonant_set;
  std::size_t excluded_terms = 0;  // near-resonant denominators skipped

  MatC total() const { return first_order + second_order; }
};

EffectiveGenerator effective_generator(const BimodalComponents& c, double eps_res = 1e-3);

bool is_resonant(const BimodalComponents& c, int n, int q, double eps_res);

// K(t) = -i sum_{non-resonant} H^(n,q) e^{i2pi nu t} / nu, Hermitian; the frame
// change it generates is exp(-i K).
MatC kick_operator(const BimodalComponents& c, double t = 0.0, double eps_res = 1e-3);

// Rotation of the collective Iz produced by switching frames from manifold
// `from` to manifold `to`, extracted by Hilbert-Schmidt projection.
double kick_angle(const BimodalComponents& from, const BimodalComponents& to, double eps_res = 1e-3);

// -ln(cos eps) / T1e. Returns +inf for eps >= pi/2.
double rate_kick(double eps, double t1e);

// Electron population rate matrix w (columns sum to zero) for spin 1/2 or 1.
MatR electron_rate_matrix(double spin, double t1e);

// -sum_{ms != ms'} p_ms w_{ms',ms} ln cos eps_{ms->ms'}, uniform p.
double rate_kick_manifolds(const std::vector<BimodalComponents>& per_manifold, const MatR& w,
                           double eps_res = 1e-3);

struct LorentzianLine {
  double center_hz = 0.0;
  double amplitude = 0.0;  // (rad/s)^2
};

// A T1e^-1 / ((3 T1e^-1)^2 + (2 * 2pi (dw - center))^2)
double lorentzian_rate(double dw_hz, const LorentzianLine& line, double t1e);

struct RateBreakdown {
  double kick = 0.0;
  double two_flip = 0.0;
  double three_flip = 0.0;
  double total = 0.0;
};

RateBreakdown rate_multiflip(double dw_hz, double r_kick, const std::vector<LorentzianLine>& two_flip,
                             const std::vector<LorentzianLine>& three_flip, double t1e);

struct AnalyticRateOptions {
  double t1e = 0.05;
  double eps_res = 1e-3;
  int n_max = 10;
  std::size_t grid_points = 512;
  ResonanceScan scan{};
  std::size_t electron = 0;
};

// Kick dephasing plus per-manifold 2SF/3SF lines for one electron.
class AnalyticRateModel {
 public:
  AnalyticRateModel(SpinClusterGeometry g, DriveSequence drive, AnalyticRateOptions opt = {});
  RateBreakdown at(double dw_hz) const;
  const std::vector<LorentzianLine>& two_flip() const { return two_; }
  const std::vector<LorentzianLine>& three_flip() const { return three_; }
  std::vector<double> manifolds() const;

  // Components for all manifolds at one detuning.
  std::vector<BimodalComponents> components(double dw_hz) const;

 private:
  SpinClusterGeometry g_;
  DriveSequence drive_;
  AnalyticRateOptions opt_;
  double spin_ = 0.5;
  std::vector<LorentzianLine> two_, three_;
};

}  // namespace floq
