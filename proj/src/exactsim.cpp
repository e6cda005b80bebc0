#include "floq/exactsim.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "floq/linalg.hpp"
#include "floq/log.hpp"
#include "floq/spin.hpp"

namespace floq {

double ToyModelSpec::electron_spin() const {
  if (geometry.n_electrons() != 1) throw DomainError("toy model needs exactly one electron");
  return geometry.electron_spins[0];
}

int ToyModelSpec::electron_dim() const { return spin::multiplicity(electron_spin()); }

double lindblad_rate_for(double s, double t1e) {
  if (!(t1e > 0.0)) throw DomainError("T1e must be positive");
  // Adjacent-level rate is (gamma / 2) |<m+1|S+|m>|^2 with L = S+/sqrt(2).
  if (s == 0.5) return 2.0 / t1e;
  if (s == 1.0) return 1.0 / t1e;
  throw DomainError("electron spin must be 0.5 or 1");
}

double ToyModelSpec::gamma() const { return lindblad_rate >= 0.0 ? lindblad_rate : lindblad_rate_for(electron_spin(), t1e); }

void ToyModelSpec::validate() const {
  if (geometry.n_nuclei() < 1) throw DomainError("toy model needs at least one nucleus");
  drive.validate();
  if (!(t1e > 0.0)) throw DomainError("T1e must be positive");
  if (samples < 8) throw DomainError("toy model needs at least 8 samples");
  const auto dim = static_cast<std::size_t>(nuclear_dim() * electron_dim());
  if (dim > dim_cap) {
    std::ostringstream os;
    os << "toy model Hilbert dimension " << dim << " = 2^" << geometry.n_nuclei() << " x " << electron_dim()
       << " exceeds the cap " << dim_cap << " (Liouville dimension " << dim * dim << ")";
    throw NumericalError(os.str());
  }
}

namespace {

// Nuclear Hamiltonian pieces in Hz.
MatC nuclear_hamiltonian(const ToyModelSpec& spec, Segment seg, double hyperfine_scale) {
  const int n = static_cast<int>(spec.geometry.n_nuclei());
  MatC h = spin::dipolar_secular(spec.geometry.dipolar).cast<cplx>();
  h += spec.drive.detuning_hz * spin::qubit_collective(n, 'z');
  if (seg == Segment::pulse) h += spec.drive.rabi_hz * spin::qubit_collective(n, 'x');
  if (hyperfine_scale != 0.0)
    for (int i = 0; i < n; ++i) h += hyperfine_scale * spec.geometry.hyperfine(i, 0) * spin::qubit_op(n, i, 'z');
  return h;
}

MatC commutator_super(const MatC& h) {
  const auto d = h.rows();
  const MatC id = MatC::Identity(d, d);
  return cplx(0, -kTwoPi) * (spin::kron(id, h) - spin::kron(h.transpose(), id));
}

}  // namespace

MatC toy_hamiltonian(const ToyModelSpec& spec, Segment seg) {
  spec.validate();
  const double s = spec.electron_spin();
  const int de = spec.electron_dim();
  const int n = static_cast<int>(spec.geometry.n_nuclei());
  const MatC ide = MatC::Identity(de, de);
  MatC h = spin::kron(nuclear_hamiltonian(spec, seg, 0.0), ide);
  for (int i = 0; i < n; ++i) h += spec.geometry.hyperfine(i, 0) * spin::kron(spin::qubit_op(n, i, 'z'), spin::sz(s));
  return h;
}

SuperOperator build_liouvillian(const ToyModelSpec& spec, Segment seg, std::optional<double> m_s) {
  spec.validate();
  SuperOperator out;
  if (m_s) {
    out.hilbert_dim = spec.nuclear_dim();
    out.m = commutator_super(nuclear_hamiltonian(spec, seg, *m_s));
    return out;
  }
  const double s = spec.electron_spin();
  const MatC h = toy_hamiltonian(spec, seg);
  const auto d = h.rows();
  out.hilbert_dim = static_cast<int>(d);
  out.m = commutator_super(h);
  const double g = spec.gamma();
  if (g > 0.0) {
    const MatC idn = MatC::Identity(spec.nuclear_dim(), spec.nuclear_dim());
    const MatC id = MatC::Identity(d, d);
    const std::array<MatC, 3> ls = {spin::kron(idn, spin::sz(s)), spin::kron(idn, spin::splus(s)) / std::sqrt(2.0),
                                    spin::kron(idn, spin::sminus(s)) / std::sqrt(2.0)};
    for (const MatC& l : ls) {
      const MatC ll = l.adjoint() * l;
      out.m += g * (spin::kron(l.conjugate(), l) - 0.5 * spin::kron(id, ll) - 0.5 * spin::kron(ll.transpose(), id));
    }
  }
  return out;
}

MatR population_rates(const ToyModelSpec& spec) {
  const double s = spec.electron_spin();
  const int de = spec.electron_dim();
  const MatC id = MatC::Identity(de, de);
  const std::array<MatC, 3> ls = {spin::sz(s), spin::splus(s) / std::sqrt(2.0), spin::sminus(s) / std::sqrt(2.0)};
  MatC d = MatC::Zero(de * de, de * de);
  for (const MatC& l : ls) {
    const MatC ll = l.adjoint() * l;
    d += spec.gamma() * (spin::kron(l.conjugate(), l) - 0.5 * spin::kron(id, ll) - 0.5 * spin::kron(ll.transpose(), id));
  }
  // Populations |m><m| sit at vec index m (de + 1).
  MatR w(de, de);
  for (int a = 0; a < de; ++a)
    for (int b = 0; b < de; ++b) w(b, a) = d(b * (de + 1), a * (de + 1)).real();
  return w;
}

MatC block_generator(const ToyModelSpec& spec, Segment seg) {
  spec.validate();
  const double s = spec.electron_spin();
  const int de = spec.electron_dim();
  const int dn = spec.nuclear_dim();
  const int b = dn * dn;
  const MatR w = spec.gamma() > 0.0 ? population_rates(spec) : MatR::Zero(de, de);
  MatC out = MatC::Zero(de * b, de * b);
  for (int a = 0; a < de; ++a) {
    const double m = s - a;
    out.block(a * b, a * b, b, b) = commutator_super(nuclear_hamiltonian(spec, seg, m));
    for (int c = 0; c < de; ++c)
      if (w(a, c) != 0.0) out.block(a * b, c * b, b, b) += w(a, c) * MatC::Identity(b, b);
  }
  return out;
}

MatC one_period_channel(const MatC& l_pulse, const MatC& l_delay, const DriveSequence& d) {
  return linalg::expm(l_pulse * d.pulse_width) * linalg::expm(l_delay * d.delay());
}

void DeviationState::validate(double tol) const {
  const double scale = std::max(1.0, rho.norm());
  if ((rho - rho.adjoint()).norm() > tol * scale) throw NumericalError("deviation state is not Hermitian");
  if (std::abs(rho.trace()) > tol * scale) throw NumericalError("deviation state is not traceless");
}

MagnetizationTrace propagate_stroboscopic(const ToyModelSpec& spec) {
  spec.validate();
  const int de = spec.electron_dim();
  const int n = static_cast<int>(spec.geometry.n_nuclei());
  const int dn = spec.nuclear_dim();
  const int b = dn * dn;
  const MatC phi = one_period_channel(block_generator(spec, Segment::pulse), block_generator(spec, Segment::delay), spec.drive);
  linalg::require_finite(phi, "one-period channel");

  const MatC ix = spin::qubit_collective(n, 'x'), iy = spin::qubit_collective(n, 'y'), iz = spin::qubit_collective(n, 'z');
  const double norm = de * (ix * ix).trace().real();
  auto obs_row = [&](const MatC& o) {
    VecC r(de * b);
    const MatC ot = o.transpose();
    for (int a = 0; a < de; ++a) r.segment(a * b, b) = Eigen::Map<const VecC>(ot.data(), b);
    return r;
  };
  const VecC rx = obs_row(ix), ry = obs_row(iy), rz = obs_row(iz);
  const Vec3 axis = compose_one_cycle(spec.drive).axis;
  VecC v0(de * b);
  for (int a = 0; a < de; ++a) v0.segment(a * b, b) = Eigen::Map<const VecC>(ix.data(), b);

  // Tr(O rho) = vec(O^T) . vec(rho), without conjugation.
  auto tr_o = [](const VecC& row, const VecC& v) { return row.cwiseProduct(v).sum().real(); };
  auto n_value = [&](const VecC& v) {
    return (axis.x() * tr_o(rx, v) + axis.y() * tr_o(ry, v) + axis.z() * tr_o(rz, v)) / norm;
  };

  MagnetizationTrace tr;
  std::vector<MatC> pow2{phi};
  std::uint64_t total = 0;
  if (spec.t_max > 0.0) {
    total = static_cast<std::uint64_t>(std::llround(spec.t_max / spec.drive.period));
    while ((std::uint64_t{1} << (pow2.size() - 1)) < total) pow2.push_back(pow2.back() * pow2.back());
  } else {
    constexpr std::size_t kMaxDoublings = 40;
    const double plateau_time = 10e-3;
    double plateau = std::abs(n_value(v0));
    bool have_plateau = false;
    for (std::size_t k = 0;; ++k) {
      const double t = std::ldexp(1.0, static_cast<int>(k)) * spec.drive.period;
      const double val = std::abs(n_value(pow2[k] * v0));
      if (!have_plateau && t >= plateau_time) {
        plateau = val;
        have_plateau = true;
      } else if (have_plateau && val < std::exp(-3.0) * plateau) {
        total = std::uint64_t{1} << k;
        break;
      }
      if (k == kMaxDoublings) {
        total = std::uint64_t{1} << k;
        tr.truncated = true;
        break;
      }
      pow2.push_back(pow2.back() * pow2.back());
      linalg::require_finite(pow2.back(), "channel power");
    }
  }
  const std::uint64_t stride = std::max<std::uint64_t>(1, (total + spec.samples - 1) / spec.samples);
  MatC step = MatC::Identity(phi.rows(), phi.cols());
  for (std::size_t k = 0; k < pow2.size(); ++k)
    if ((stride >> k) & 1u) step = step * pow2[k];
  if ((stride >> pow2.size()) != 0) step = linalg::matrix_power(phi, stride);

  VecC v = v0;
  const std::uint64_t count = total / stride;
  for (std::uint64_t s = 0; s <= count; ++s) {
    if (s > 0) v = step * v;
    const double x = tr_o(rx, v) / norm, y = tr_o(ry, v) / norm, z = tr_o(rz, v) / norm;
    tr.times.push_back(static_cast<double>(s * stride) * spec.drive.period);
    tr.ix.push_back(x);
    tr.iy.push_back(y);
    tr.iz.push_back(z);
    tr.n_eff.push_back(axis.x() * x + axis.y() * y + axis.z() * z);
    tr.m_pre.push_back(std::hypot(x, y));
    if (!std::isfinite(x + y + z)) throw NumericalError("non-finite magnetisation in stroboscopic propagation");
  }
  return tr;
}

DecayFit extract_heating_rate(const MagnetizationTrace& trace, const FitTolerances& tol) {
  if (trace.times.size() < 9) throw DomainError("extract_heating_rate: trace too short");
  const double ref = trace.n_eff[1];
  if (std::abs(ref) < 1e-12) {
    DecayFit f;
    f.note = "no prethermal plateau";
    return f;
  }
  std::vector<double> t(trace.times.begin() + 1, trace.times.end()), y;
  for (std::size_t k = 1; k < trace.n_eff.size(); ++k) y.push_back(trace.n_eff[k] / ref);
  DecayFit f = fit_product_decay(t, y, tol);
  if (trace.truncated) f.note += (f.note.empty() ? "" : "; ") + std::string("trace did not decay within the period cap");
  return f;
}

std::vector<ExactSweepPoint> sweep_exact(const ToyModelSpec& spec, const std::vector<double>& detunings, Exec exec,
                                         int jobs, const FitTolerances& tol) {
  return parallel_map(detunings.size(), exec, [&](std::size_t i) {
    ToyModelSpec s = spec;
    s.drive = spec.drive.with_detuning(detunings[i]);
    ExactSweepPoint p;
    p.detuning_hz = detunings[i];
    p.fit = extract_heating_rate(propagate_stroboscopic(s), tol);
    return p;
  }, jobs);
}

}  // namespace floq
