#include "floq/drive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "floq/log.hpp"

namespace floq {

void DriveSequence::validate() const {
  if (!(pulse_width > 0.0) || !(period >= pulse_width) || !std::isfinite(period))
    throw DomainError("drive: need 0 < pulse_width <= period");
  if (!(rabi_hz > 0.0) || !std::isfinite(rabi_hz)) throw DomainError("drive: rabi_hz must be positive");
  if (!std::isfinite(detuning_hz)) throw DomainError("drive: detuning must be finite");
}

Mat2 pulse_segment(const DriveSequence& s, double dt) {
  const Vec3 w(s.rabi_hz, 0.0, s.detuning_hz);
  const double wn = w.norm();
  if (wn == 0.0) return Mat2::Identity();
  return su2_axis_angle(w / wn, kTwoPi * wn * dt);
}

Mat2 delay_segment(const DriveSequence& s, double dt) {
  return su2_axis_angle(Vec3::UnitZ(), kTwoPi * s.detuning_hz * dt);
}

Mat2 drive_propagator(const DriveSequence& s, double t) {
  const double tb = s.delay();
  if (t <= tb) return delay_segment(s, t);
  return pulse_segment(s, t - tb) * delay_segment(s, tb);
}

Mat2 one_cycle_propagator(const DriveSequence& s) {
  return pulse_segment(s, s.pulse_width) * delay_segment(s, s.delay());
}

double half_trace(const DriveSequence& s) { return 0.5 * one_cycle_propagator(s).trace().real(); }

Mat2 EffectiveDrive::reconstructed() const { return su2_axis_angle(axis, rotation_angle()); }

EffectiveDrive compose_one_cycle(const DriveSequence& s) {
  s.validate();
  EffectiveDrive e;
  e.drive_hz = s.drive_hz();
  e.psi = kTwoPi * s.pulse_width * std::hypot(s.rabi_hz, s.detuning_hz);
  e.interpulse_phase = kTwoPi * s.detuning_hz * s.delay();
  e.alpha = std::atan2(s.rabi_hz, s.detuning_hz);
  e.one_cycle = one_cycle_propagator(s);

  // U = c 1 - i s (n.sigma); recover c and s n.
  double c = 0.5 * e.one_cycle.trace().real();
  Vec3 sn(-0.5 * (e.one_cycle(0, 1) + e.one_cycle(1, 0)).imag(),
          0.5 * (e.one_cycle(1, 0) - e.one_cycle(0, 1)).real(),
          -0.5 * (e.one_cycle(0, 0) - e.one_cycle(1, 1)).imag());
  if (c < 0.0) {
    c = -c;
    sn = -sn;
    e.branch_flipped = true;
  }
  const double sn_norm = sn.norm();
  const double angle = 2.0 * std::atan2(sn_norm, c);
  if (sn_norm < 1e-13) {
    e.degenerate_axis = true;
    e.omega_eff_hz = 0.0;
    e.axis = Vec3::UnitZ();
  } else {
    e.axis = sn / sn_norm;
    e.omega_eff_hz = angle / kTwoPi * e.drive_hz;
    e.theta_eff = std::acos(std::clamp(e.axis.z(), -1.0, 1.0));
    e.phi_eff = std::atan2(e.axis.y(), e.axis.x());
  }

  // Closed forms, kept as a diagnostic only.
  const double g = e.interpulse_phase, a = e.alpha, p = e.psi;
  const double cot_theta = std::cos(g / 2) / std::tan(a) + std::sin(g / 2) / (std::tan(p / 2) * std::sin(a));
  e.closed_form_theta = std::isfinite(cot_theta) ? std::atan2(1.0, cot_theta) : std::numeric_limits<double>::quiet_NaN();
  const double cg = std::cos(g), cp = std::cos(p), ca = std::cos(a), sa = std::sin(a);
  const double arg = cg * cp + ca * ca * (1 + cg * cp) + sa * sa * (cg + cp) - 2 * ca * cg * cp - 1;
  e.closed_form_omega_hz = (arg >= -1.0 && arg <= 1.0) ? std::acos(arg) / kTwoPi * e.drive_hz
                                                       : std::numeric_limits<double>::quiet_NaN();
  if (!e.degenerate_axis && std::isfinite(e.closed_form_theta)) {
    // The closed form fixes an orientation; the principal branch may reverse it.
    const double d1 = std::abs(e.closed_form_theta - e.theta_eff);
    const double d2 = std::abs(e.closed_form_theta - (kPi - e.theta_eff));
    if (std::min(d1, d2) > 1e-8) {
      e.closed_form_consistent = false;
      std::ostringstream os;
      os << "effective axis polar angle " << e.theta_eff << " disagrees with closed form "
         << e.closed_form_theta << " at detuning " << s.detuning_hz << " Hz";
      warn(os.str());
    }
  }
  return e;
}

Mat2 micromotion_operator(const DriveSequence& s, const EffectiveDrive& eff, double t) {
  const double frac = t / s.period;
  return drive_propagator(s, t) * su2_axis_angle(eff.axis, -eff.rotation_angle() * frac);
}

MicromotionTrajectory micromotion(const DriveSequence& s, std::size_t grid_points) {
  if (grid_points < 64) throw DomainError("micromotion: need at least 64 grid points");
  MicromotionTrajectory tr;
  tr.seq = s;
  tr.eff = compose_one_cycle(s);
  const double tb = s.delay(), T = s.period;
  std::size_t n_delay = 0;
  if (tb > 0.0) {
    n_delay = static_cast<std::size_t>(std::lround(static_cast<double>(grid_points) * tb / T));
    n_delay = std::clamp<std::size_t>(n_delay, 1, grid_points - 1);
  }
  const std::size_t n_pulse = grid_points - n_delay;
  tr.times.reserve(grid_points + 1);
  for (std::size_t k = 0; k < n_delay; ++k) tr.times.push_back(tb * static_cast<double>(k) / static_cast<double>(n_delay));
  for (std::size_t k = 0; k <= n_pulse; ++k)
    tr.times.push_back(tb + s.pulse_width * static_cast<double>(k) / static_cast<double>(n_pulse));
  tr.times.back() = T;
  tr.breakpoint = n_delay;

  Euler hint{};
  tr.angles.reserve(tr.times.size());
  for (double t : tr.times) {
    const Mat3 r = so3_from_su2(micromotion_operator(s, tr.eff, t));
    hint = euler_from_so3(r, hint);
    tr.angles.push_back(hint);
  }
  return tr;
}

namespace {

// D^l_{m0}(P^-1) from the zyz angles of P.
cplx frame_element(int l, int m, const Euler& e) {
  return small_d(l, 0, m, e.beta) * std::exp(cplx(0, m * e.gamma));
}

MatC integrate(const MicromotionTrajectory& tr, int l, int n_max, std::size_t stride) {
  const double T = tr.seq.period, wd = kTwoPi / T;
  MatC f = MatC::Zero(2 * l + 1, 2 * n_max + 1);
  auto segment = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k + stride <= hi; k += stride) {
      const std::size_t k2 = k + stride;
      const double h = tr.times[k2] - tr.times[k];
      for (int m = -l; m <= l; ++m) {
        const cplx g1 = frame_element(l, m, tr.angles[k]);
        const cplx g2 = frame_element(l, m, tr.angles[k2]);
        for (int n = -n_max; n <= n_max; ++n) {
          const cplx e1 = std::exp(cplx(0, -n * wd * tr.times[k]));
          const cplx e2 = std::exp(cplx(0, -n * wd * tr.times[k2]));
          f(m + l, n + n_max) += 0.5 * h * (g1 * e1 + g2 * e2);
        }
      }
    }
  };
  segment(0, tr.breakpoint);
  segment(tr.breakpoint, tr.times.size() - 1);
  return f / T;
}

}  // namespace

FourierCoefficientTable fourier_coefficients(const MicromotionTrajectory& tr, int l, int n_max) {
  if (l < 0 || n_max < 0) throw DomainError("fourier_coefficients: bad rank or n_max");
  if (tr.times.size() < 3) throw DomainError("fourier_coefficients: empty trajectory");
  FourierCoefficientTable t;
  t.l = l;
  t.n_max = n_max;
  t.coeff = integrate(tr, l, n_max, 1);
  const double total = t.coeff.squaredNorm();
  if (total > 0.0 && n_max > 0)
    t.tail_energy = (t.coeff.col(0).squaredNorm() + t.coeff.col(2 * n_max).squaredNorm()) / total;
  // Half-resolution rule is only well defined if both segments have even counts.
  const std::size_t nd = tr.breakpoint, np = tr.times.size() - 1 - tr.breakpoint;
  if (nd % 2 == 0 && np % 2 == 0) t.quadrature_error = (integrate(tr, l, n_max, 2) - t.coeff).cwiseAbs().maxCoeff() / 3.0;
  return t;
}

std::vector<double> find_resonances(const DriveSequence& tmpl, int k, const ResonanceScan& scan) {
  if (k < 2) throw DomainError("find_resonances: k must be at least 2");
  if (!(scan.scan_max_hz > scan.scan_min_hz) || scan.scan_min_hz < 0.0 || scan.points < 2)
    throw DomainError("find_resonances: bad scan range");
  tmpl.with_detuning(scan.scan_min_hz).validate();
  const double target = std::cos(kPi / k);
  std::vector<double> roots;
  // |c| = cos(pi/k) covers both the direct and the sign-reversed branch.
  for (double sign : {1.0, -1.0}) {
    if (k == 2 && sign < 0) break;  // target 0: one function
    auto f = [&](double dw) { return half_trace(tmpl.with_detuning(dw)) - sign * target; };
    double x0 = scan.scan_min_hz, f0 = f(x0);
    for (std::size_t i = 1; i < scan.points; ++i) {
      const double x1 = scan.scan_min_hz + (scan.scan_max_hz - scan.scan_min_hz) * static_cast<double>(i) /
                                               static_cast<double>(scan.points - 1);
      const double f1 = f(x1);
      if (f0 == 0.0) roots.push_back(x0);
      else if (f0 * f1 < 0.0) {
        double a = x0, b = x1, fa = f0;
        while (b - a > scan.tol_hz) {
          const double mid = 0.5 * (a + b), fm = f(mid);
          if (fm == 0.0) { a = b = mid; break; }
          if ((fm < 0) == (fa < 0)) { a = mid; fa = fm; }
          else b = mid;
        }
        roots.push_back(0.5 * (a + b));
      }
      x0 = x1;
      f0 = f1;
    }
    if (f0 == 0.0) roots.push_back(x0);
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(), [&](double a, double b) { return std::abs(a - b) < 10 * scan.tol_hz; }),
              roots.end());
  return roots;
}

}  // namespace floq
