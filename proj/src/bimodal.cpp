#include "floq/bimodal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "floq/linalg.hpp"
#include "floq/log.hpp"
#include "floq/spin.hpp"

namespace floq {

namespace {
inline std::size_t slot(int n_max, int n, int q) { return static_cast<std::size_t>((n + n_max) * 5 + (q + 2)); }
}  // namespace

const MatC& BimodalComponents::at(int n, int q) const {
  if (std::abs(n) > n_max || std::abs(q) > 2) throw DomainError("BimodalComponents::at: index out of range");
  return h[slot(n_max, n, q)];
}

MatC BimodalComponents::resum(double t) const {
  const int d = 1 << n_spins;
  MatC out = MatC::Zero(d, d);
  for (int n = -n_max; n <= n_max; ++n)
    for (int q = -2; q <= 2; ++q) out += at(n, q) * std::exp(cplx(0, kTwoPi * frequency_hz(n, q) * t));
  return out;
}

Euler tilt_angles(const EffectiveDrive& eff) { return Euler{eff.phi_eff, eff.theta_eff, 0.0}; }

MatC tilted_coefficients(const EffectiveDrive& eff, const FourierCoefficientTable& f) {
  const MatC dinv = wigner_D(f.l, tilt_angles(eff)).adjoint();
  return dinv * f.coeff;
}

BimodalComponents decompose(const SpinClusterGeometry& g, const EffectiveDrive& eff,
                            const FourierCoefficientTable& f1, const FourierCoefficientTable& f2, double m_s,
                            std::size_t electron) {
  if (f1.l != 1 || f2.l != 2) throw DomainError("decompose: expects rank-1 and rank-2 tables");
  if (f1.n_max != f2.n_max) throw DomainError("decompose: tables must share n_max");
  const int n = static_cast<int>(g.n_nuclei());
  if (n < 1 || n > 8) throw DomainError("decompose: operator form supports 1..8 nuclei");
  const bool hf = g.n_electrons() > 0 && m_s != 0.0;
  if (g.n_electrons() > 0 && electron >= g.n_electrons()) throw DomainError("decompose: electron index out of range");

  BimodalComponents c;
  c.n_max = f1.n_max;
  c.n_spins = n;
  c.drive_hz = eff.drive_hz;
  c.omega_eff_hz = eff.omega_eff_hz;
  c.m_s = m_s;
  c.tail_energy = std::max(f1.tail_energy, f2.tail_energy);
  if (c.tail_energy > 1e-4) warn("decompose: Fourier tail energy " + std::to_string(c.tail_energy) + " suggests raising n_max");

  const int d = 1 << n;
  std::array<MatC, 5> dip;
  std::array<MatC, 3> hyp;
  for (int q = -2; q <= 2; ++q) {
    dip[q + 2] = MatC::Zero(d, d);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (g.dipolar(i, j) != 0.0) dip[q + 2] += g.dipolar(i, j) * spin::tensor2(n, i, j, q);
  }
  for (int q = -1; q <= 1; ++q) {
    hyp[q + 1] = MatC::Zero(d, d);
    if (hf)
      for (int i = 0; i < n; ++i) hyp[q + 1] += m_s * g.hyperfine(i, static_cast<Eigen::Index>(electron)) * spin::tensor1(n, i, q);
  }
  const MatC c1 = tilted_coefficients(eff, f1), c2 = tilted_coefficients(eff, f2);
  c.h.assign(static_cast<std::size_t>((2 * c.n_max + 1) * 5), MatC());
  for (int nn = -c.n_max; nn <= c.n_max; ++nn)
    for (int q = -2; q <= 2; ++q) {
      MatC m = c2(q + 2, nn + c.n_max) * dip[q + 2];
      if (std::abs(q) <= 1) m += c1(q + 1, nn + c.n_max) * hyp[q + 1];
      c.h[slot(c.n_max, nn, q)] = std::move(m);
    }
  return c;
}

bool is_resonant(const BimodalComponents& c, int n, int q, double eps_res) {
  return std::abs(c.frequency_hz(n, q)) < eps_res * c.drive_hz;
}

EffectiveGenerator effective_generator(const BimodalComponents& c, double eps_res) {
  if (!(eps_res > 0.0)) throw DomainError("effective_generator: eps_res must be positive");
  const int d = 1 << c.n_spins;
  EffectiveGenerator g;
  g.first_order = MatC::Zero(d, d);
  g.second_order = MatC::Zero(d, d);
  g.resonant_first_order = MatC::Zero(d, d);
  g.resonant_second_order = MatC::Zero(d, d);
  const int nm = c.n_max;
  for (int n0 = -2 * nm; n0 <= 2 * nm; ++n0)
    for (int q0 = -4; q0 <= 4; ++q0)
      if (is_resonant(c, n0, q0, eps_res)) g.resonant_set.emplace_back(n0, q0);

  for (const auto& [n0, q0] : g.resonant_set) {
    const bool stat = (n0 == 0 && q0 == 0);
    if (std::abs(n0) <= nm && std::abs(q0) <= 2) {
      g.first_order += c.at(n0, q0);
      if (!stat) g.resonant_first_order += c.at(n0, q0);
    }
    MatC acc = MatC::Zero(d, d);
    for (int n = -nm; n <= nm; ++n)
      for (int q = -2; q <= 2; ++q) {
        const int n1 = n0 - n, q1 = q0 - q;
        if (std::abs(n1) > nm || std::abs(q1) > 2) continue;
        if (is_resonant(c, n, q, eps_res)) {
          if (!(n == 0 && q == 0)) ++g.excluded_terms;
          continue;
        }
        const MatC& a = c.at(n1, q1);
        const MatC& b = c.at(n, q);
        acc += (a * b - b * a) / c.frequency_hz(n, q);
      }
    acc *= -0.5;
    g.second_order += acc;
    if (!stat) g.resonant_second_order += acc;
  }
  return g;
}

MatC kick_operator(const BimodalComponents& c, double t, double eps_res) {
  const int d = 1 << c.n_spins;
  MatC k = MatC::Zero(d, d);
  for (int n = -c.n_max; n <= c.n_max; ++n)
    for (int q = -2; q <= 2; ++q) {
      if (is_resonant(c, n, q, eps_res)) continue;
      const double nu = c.frequency_hz(n, q);
      k += c.at(n, q) * (std::exp(cplx(0, kTwoPi * nu * t)) / nu);
    }
  return cplx(0, -1) * k;
}

double kick_angle(const BimodalComponents& from, const BimodalComponents& to, double eps_res) {
  if (from.n_spins != to.n_spins) throw DomainError("kick_angle: manifold register mismatch");
  const MatC kf = kick_operator(from, 0.0, eps_res), kt = kick_operator(to, 0.0, eps_res);
  // exp(-iK) with K Hermitian is exp_hermitian(K, 1).
  const MatC w = linalg::expm_hermitian(kt, -1.0) * linalg::expm_hermitian(kf, 1.0);
  const MatC iz = spin::qubit_collective(from.n_spins, 'z');
  const double num = (iz * w * iz * w.adjoint()).trace().real();
  const double den = (iz * iz).trace().real();
  return std::acos(std::clamp(num / den, -1.0, 1.0));
}

double rate_kick(double eps, double t1e) {
  if (!(t1e > 0.0)) throw DomainError("rate_kick: T1e must be positive");
  if (eps < 0.0) throw DomainError("rate_kick: eps must be non-negative");
  const double c = std::cos(eps);
  if (eps >= 0.5 * kPi || c <= 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(c) / t1e;
}

MatR electron_rate_matrix(double spin_q, double t1e) {
  if (!(t1e > 0.0)) throw DomainError("electron_rate_matrix: T1e must be positive");
  const double r = 1.0 / t1e;
  if (spin_q == 0.5) return (MatR(2, 2) << -r, r, r, -r).finished();
  if (spin_q == 1.0) return (MatR(3, 3) << -r, r, 0, r, -2 * r, r, 0, r, -r).finished();
  throw DomainError("electron_rate_matrix: spin must be 0.5 or 1");
}

double rate_kick_manifolds(const std::vector<BimodalComponents>& pm, const MatR& w, double eps_res) {
  const auto m = static_cast<Eigen::Index>(pm.size());
  if (w.rows() != m || w.cols() != m) throw DomainError("rate_kick_manifolds: rate matrix size mismatch");
  const double p = 1.0 / static_cast<double>(m);
  double r = 0.0;
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b) {
      if (a == b || w(b, a) == 0.0) continue;
      const double c = std::cos(kick_angle(pm[a], pm[b], eps_res));
      if (c <= 0.0) return std::numeric_limits<double>::infinity();
      r -= p * w(b, a) * std::log(c);
    }
  return r;
}

double lorentzian_rate(double dw_hz, const LorentzianLine& line, double t1e) {
  const double g = 1.0 / t1e;
  const double off = 2.0 * kTwoPi * (dw_hz - line.center_hz);
  return line.amplitude * g / (9.0 * g * g + off * off);
}

RateBreakdown rate_multiflip(double dw_hz, double r_kick, const std::vector<LorentzianLine>& two,
                             const std::vector<LorentzianLine>& three, double t1e) {
  if (!(t1e > 0.0)) throw DomainError("rate_multiflip: T1e must be positive");
  RateBreakdown r;
  r.kick = r_kick;
  for (const auto& l : two) r.two_flip += lorentzian_rate(dw_hz, l, t1e);
  for (const auto& l : three) r.three_flip += lorentzian_rate(dw_hz, l, t1e);
  r.total = r.kick + r.two_flip + r.three_flip;
  return r;
}

namespace {

std::vector<double> manifold_list(double s) {
  std::vector<double> out;
  for (double m = s; m >= -s - 1e-12; m -= 1.0) out.push_back(m);
  return out;
}

}  // namespace

AnalyticRateModel::AnalyticRateModel(SpinClusterGeometry g, DriveSequence drive, AnalyticRateOptions opt)
    : g_(std::move(g)), drive_(drive), opt_(opt) {
  if (g_.n_electrons() <= opt_.electron) throw DomainError("AnalyticRateModel: geometry needs an electron");
  spin_ = g_.electron_spins[opt_.electron];
  double mean_h = 0.0;
  for (Eigen::Index i = 0; i < g_.hyperfine.rows(); ++i) mean_h += g_.hyperfine(i, static_cast<Eigen::Index>(opt_.electron));
  mean_h /= static_cast<double>(g_.n_nuclei());

  for (int k : {2, 3}) {
    for (double root : find_resonances(drive_, k, opt_.scan)) {
      const auto comps = components(root);
      const auto ms = manifolds();
      for (std::size_t a = 0; a < ms.size(); ++a) {
        const auto gen = effective_generator(comps[a], opt_.eps_res);
        // Double flips are already present at first order, triple flips at second.
        const MatC& block = (k == 2) ? gen.resonant_first_order : gen.resonant_second_order;
        const double amp = std::pow(kTwoPi * linalg::op_norm(block), 2);
        (k == 2 ? two_ : three_).push_back(LorentzianLine{root - ms[a] * mean_h, amp});
      }
    }
  }
}

std::vector<double> AnalyticRateModel::manifolds() const { return manifold_list(spin_); }

std::vector<BimodalComponents> AnalyticRateModel::components(double dw_hz) const {
  const auto seq = drive_.with_detuning(dw_hz);
  const auto tr = micromotion(seq, opt_.grid_points);
  const auto f1 = fourier_coefficients(tr, 1, opt_.n_max);
  const auto f2 = fourier_coefficients(tr, 2, opt_.n_max);
  std::vector<BimodalComponents> out;
  for (double m : manifolds()) out.push_back(decompose(g_, tr.eff, f1, f2, m, opt_.electron));
  return out;
}

RateBreakdown AnalyticRateModel::at(double dw_hz) const {
  const double rk = rate_kick_manifolds(components(dw_hz), electron_rate_matrix(spin_, opt_.t1e), opt_.eps_res);
  return rate_multiflip(dw_hz, rk, two_, three_, opt_.t1e);
}

}  // namespace floq
