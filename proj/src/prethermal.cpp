#include "floq/prethermal.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "floq/linalg.hpp"
#include "floq/spin.hpp"

namespace floq {
namespace {

// exp(-i 2pi t H) for real symmetric H as (cos, sin) parts via one eigendecomposition.
MatC real_symmetric_propagator(const MatR& h, double t) {
  const Eigen::SelfAdjointEigenSolver<MatR> es(h);
  const VecR ph = es.eigenvalues() * (kTwoPi * t);
  const MatR& v = es.eigenvectors();
  const MatR c = v * ph.array().cos().matrix().asDiagonal() * v.transpose();
  const MatR s = v * ph.array().sin().matrix().asDiagonal() * v.transpose();
  MatC out(h.rows(), h.cols());
  out.real() = c;
  out.imag() = -s;
  return out;
}

// Right-multiplies a by exp(-i 2pi t H) for magnetisation-conserving H, one
// block per excitation number.
MatC times_block_propagator(const MatC& a, const MatR& h, int n, double t) {
  const int dim = 1 << n;
  MatC out(a.rows(), dim);
  for (int k = 0; k <= n; ++k) {
    std::vector<int> idx;
    for (int b = 0; b < dim; ++b)
      if (std::popcount(static_cast<unsigned>(b)) == k) idx.push_back(b);
    const auto m = static_cast<Eigen::Index>(idx.size());
    MatR blk(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) blk(i, j) = h(idx[i], idx[j]);
    const MatC u = real_symmetric_propagator(blk, t);
    const MatC cols = a(Eigen::all, idx) * u;
    for (Eigen::Index j = 0; j < m; ++j) out.col(idx[j]) = cols.col(j);
  }
  return out;
}

// mean over n in [n1, n2] of cos(delta n)
double window_filter(double delta, long n1, long n2) {
  const double len = static_cast<double>(n2 - n1 + 1);
  const double half = 0.5 * delta;
  if (std::abs(std::sin(half)) < 1e-12) return std::cos(delta * n1);
  return std::sin(half * len) / (len * std::sin(half)) * std::cos(delta * 0.5 * static_cast<double>(n1 + n2));
}

}  // namespace

PrethermalResult prethermal_state(const SpinClusterGeometry& g, const DriveSequence& d, const PrethermalOptions& opt) {
  d.validate();
  const int n = static_cast<int>(g.n_nuclei());
  if (n < 1) throw DomainError("prethermal_state: cluster has no nuclei");
  if (static_cast<std::size_t>(n) > opt.max_spins) throw DomainError("prethermal_state: cluster too large");
  if (!(opt.window_end > opt.window_start) || opt.window_start < 0.0)
    throw DomainError("prethermal_state: bad averaging window");
  const int dim = 1 << n;

  const MatR hdd = n > 1 ? spin::dipolar_secular(g.dipolar) : MatR::Zero(dim, dim);
  const MatR ix = spin::qubit_collective_real(n, 'x');
  const MatR iz = spin::qubit_collective_real(n, 'z');
  const MatR h_delay = hdd + d.detuning_hz * iz;
  const MatR h_pulse = h_delay + d.rabi_hz * ix;

  // Symmetric frame: U_s = E U_delay E with E the half pulse. Every factor is
  // complex symmetric, so U_s = C + iS with C, S real symmetric and commuting.
  const MatC e = real_symmetric_propagator(h_pulse, 0.5 * d.pulse_width);
  const MatC us = times_block_propagator(e, h_delay, n, d.delay()) * e;
  linalg::require_finite(us, "one-cycle propagator");
  const MatR c = 0.5 * (us.real() + us.real().transpose());
  const MatR s = 0.5 * (us.imag() + us.imag().transpose());

  // Generic combination separates eigenvalues; clusters are refined with C.
  const double kappa = std::sqrt(2.0) - 0.5;
  Eigen::SelfAdjointEigenSolver<MatR> es(c + kappa * s);
  MatR r = es.eigenvectors();
  const VecR lam = es.eigenvalues();
  for (int a = 0; a < dim;) {
    int b = a + 1;
    while (b < dim && lam(b) - lam(b - 1) < 1e-10) ++b;
    if (b - a > 1) {
      const MatR sub = r.middleCols(a, b - a);
      const MatR ca = sub.transpose() * c * sub;
      Eigen::SelfAdjointEigenSolver<MatR> ec(0.5 * (ca + ca.transpose()));
      r.middleCols(a, b - a) = sub * ec.eigenvectors();
    }
    a = b;
  }
  // U_s r = (C + iS) r = e^{i phi} r, and r.(C + kappa S) r is already known
  VecR phi(dim);
  const MatR cr = c * r;
  for (int a = 0; a < dim; ++a) {
    const double cs = r.col(a).dot(cr.col(a));
    phi(a) = std::atan2((lam(a) - cs) / kappa, cs);
  }

  // Eigenvectors of the stroboscopic propagator U = E U_s E^-1 are E r.
  const MatC w = e * r.cast<cplx>();
  const MatC xt = w.adjoint() * ix.cast<cplx>() * w;
  const double norm = (ix * ix).trace();

  // Group quasi-energies on the circle.
  std::vector<int> order(static_cast<std::size_t>(dim));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return phi(a) < phi(b); });
  std::vector<int> group(static_cast<std::size_t>(dim));
  int ng = 0;
  for (int k = 0; k < dim; ++k) {
    if (k > 0 && phi(order[k]) - phi(order[k - 1]) >= opt.degeneracy_tol) ++ng;
    group[order[k]] = ng;
  }
  if (dim > 1 && phi(order.front()) + kTwoPi - phi(order.back()) < opt.degeneracy_tol) {
    const int last = group[order.back()];
    for (int& gid : group)
      if (gid == last) gid = 0;
  }

  const long n1 = static_cast<long>(std::ceil(opt.window_start / d.period - 1e-9));
  const long n2 = static_cast<long>(std::floor(opt.window_end / d.period + 1e-9));
  if (n2 < n1) throw DomainError("prethermal_state: averaging window shorter than one period");

  PrethermalResult out;
  double inf = 0.0, win = 0.0;
  for (int b = 0; b < dim; ++b)
    for (int a = 0; a < dim; ++a) {
      const double p = std::norm(xt(a, b));
      if (group[a] == group[b]) inf += p;
      win += p * window_filter(phi(a) - phi(b), n1, n2);
    }
  out.m_pre = inf / norm;
  out.m_pre_window = win / norm;
  out.quasi_energies = phi;
  out.degenerate_groups = static_cast<std::size_t>(*std::max_element(group.begin(), group.end()) + 1);

  if (opt.keep_state) {
    MatC masked = MatC::Zero(dim, dim);
    for (int b = 0; b < dim; ++b)
      for (int a = 0; a < dim; ++a)
        if (group[a] == group[b]) masked(a, b) = xt(a, b);
    out.state.rho = w * masked * w.adjoint();
  }
  return out;
}

double pauli_weight(const DeviationState& st) {
  const auto dim = st.rho.rows();
  if (dim < 2 || st.rho.cols() != dim || (dim & (dim - 1)) != 0) throw DomainError("pauli_weight: not a qubit register");
  const int n = std::countr_zero(static_cast<unsigned>(dim));
  if (n > 12) throw DomainError("pauli_weight: more than 12 spins");
  // For each flip mask x the coefficients over phase masks z come from a
  // Walsh-Hadamard transform of the x-shifted diagonal.
  double num = 0.0, den = 0.0;
  VecC v(dim);
  for (Eigen::Index x = 0; x < dim; ++x) {
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = st.rho(i ^ x, i);
    for (Eigen::Index h = 1; h < dim; h <<= 1)
      for (Eigen::Index i = 0; i < dim; i += 2 * h)
        for (Eigen::Index j = i; j < i + h; ++j) {
          const cplx a = v(j), b = v(j + h);
          v(j) = a + b;
          v(j + h) = a - b;
        }
    for (Eigen::Index z = 0; z < dim; ++z) {
      if (x == 0 && z == 0) continue;
      const double p = std::norm(v(z));
      num += p * std::popcount(static_cast<unsigned>(x | z));
      den += p;
    }
  }
  if (!(den > 0.0))
    throw DomainError("pauli_weight: traceless part vanishes");
  return num / den;
}

std::vector<PrethermalSweepPoint> sweep_prethermal(const SpinClusterGeometry& g, const DriveSequence& d,
                                                   const std::vector<double>& detunings, bool with_weight, Exec exec,
                                                   int jobs, const PrethermalOptions& opt) {
  PrethermalOptions o = opt;
  o.keep_state = with_weight;
  return parallel_map(detunings.size(), exec, [&](std::size_t i) {
    const PrethermalResult r = prethermal_state(g, d.with_detuning(detunings[i]), o);
    PrethermalSweepPoint p;
    p.detuning_hz = detunings[i];
    p.m_pre = r.m_pre;
    p.m_pre_window = r.m_pre_window;
    p.pauli_weight = with_weight ? pauli_weight(r.state) : std::numeric_limits<double>::quiet_NaN();
    return p;
  }, jobs);
}

}  // namespace floq
