#include "floq/montecarlo.hpp"

#include <cmath>
#include <limits>

#include "floq/bimodal.hpp"
#include "floq/linalg.hpp"
#include "floq/log.hpp"

namespace floq {

void MonteCarloConfig::validate() const {
  lattice.validate();
  if (!(eta >= 0.0)) throw DomainError("eta must be nonnegative");
  if (!(kappa2j0 >= 0.0)) throw DomainError("kappa2J0 must be nonnegative");
  if (n_configs < 1) throw DomainError("n_configs must be at least 1");
  if (n_max < 1) throw DomainError("n_max must be positive");
  drive.validate();
  for (std::size_t k = 0; k < time_grid.size(); ++k) {
    if (!(time_grid[k] >= 0.0)) throw DomainError("time grid must be nonnegative");
    if (k > 0 && !(time_grid[k] > time_grid[k - 1])) throw DomainError("time grid must increase");
  }
}

std::vector<double> MonteCarloConfig::times() const {
  if (!time_grid.empty()) return time_grid;
  // 0 .. 0.4 s, dense at early times so the sqrt(t) term is resolved
  std::vector<double> t;
  for (int k = 0; k <= 160; ++k) t.push_back(0.4 * std::pow(k / 160.0, 2.0));
  return t;
}

CouplingScales coupling_scales(const EffectiveDrive& eff, const FourierCoefficientTable& f1,
                               const FourierCoefficientTable& f2, double imag_tol) {
  const MatC c1 = tilted_coefficients(eff, f1), c2 = tilted_coefficients(eff, f2);
  const cplx s1 = c1(1, f1.n_max), s2 = c2(2, f2.n_max);
  CouplingScales s;
  s.hyperfine = s1.real();
  s.dipolar = s2.real();
  s.hyperfine_imag = s1.imag();
  s.dipolar_imag = s2.imag();
  s.flagged = std::abs(s1.imag()) > imag_tol || std::abs(s2.imag()) > imag_tol;
  if (s.flagged) warn("coupling_scales: imaginary residue above tolerance");
  return s;
}

CouplingScales coupling_scales(const DriveSequence& d, int n_max, std::size_t grid_points) {
  const MicromotionTrajectory traj = micromotion(d, grid_points);
  return coupling_scales(traj.eff, fourier_coefficients(traj, 1, n_max), fourier_coefficients(traj, 2, n_max));
}

RescaledCouplings rescale_couplings(const SpinClusterGeometry& g, const CouplingScales& s) {
  return {g.dipolar * s.dipolar, g.hyperfine * s.hyperfine, s};
}

MatR TransportModel::generator() const {
  MatR g = transport;
  g.diagonal() += relaxation;
  return g;
}

TransportModel build_transport(const SpinClusterGeometry& g, const RescaledCouplings& c, double eta,
                               double kappa2j0, HyperfineWeighting weighting) {
  if (!(eta >= 0.0) || !(kappa2j0 >= 0.0)) throw DomainError("build_transport: negative parameter");
  const auto n = static_cast<Eigen::Index>(g.n_nuclei());
  TransportModel m;
  m.dipolar = c.dipolar;
  m.hyperfine = c.hyperfine;
  m.relaxation = VecR::Zero(n);
  const double nonsec = std::max(0.0, 1.0 - c.scales.hyperfine * c.scales.hyperfine);
  for (Eigen::Index i = 0; i < n; ++i) {
    double h2 = 0.0;
    if (weighting == HyperfineWeighting::secular) h2 = c.hyperfine.row(i).squaredNorm();
    else h2 = g.hyperfine.row(i).squaredNorm() * nonsec;
    m.relaxation(i) = -eta * h2;
  }
  m.transport = MatR::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) m.transport(i, j) = c.dipolar(i, j) * c.dipolar(i, j) * kappa2j0;
  // Diagonal keeps every column sum at zero; summed in a fixed order.
  for (Eigen::Index j = 0; j < n; ++j) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (i != j) s += m.transport(i, j);
    m.transport(j, j) = -s;
  }
  return m;
}

PolarizationTrajectory propagate_polarization(const TransportModel& m, const VecR& p0,
                                              const std::vector<double>& times) {
  const auto n = m.relaxation.size();
  if (p0.size() != n) throw DomainError("propagate_polarization: p0 size mismatch");
  if (!p0.allFinite()) throw DomainError("propagate_polarization: p0 not finite");
  PolarizationTrajectory tr;
  tr.times = times;
  tr.p.resize(n, static_cast<Eigen::Index>(times.size()));
  if (n == 0) {
    tr.mean.assign(times.size(), 0.0);
    return tr;
  }
  const MatR g = m.generator();
  Eigen::SelfAdjointEigenSolver<MatR> es(g);
  if (es.info() == Eigen::Success && es.eigenvalues().allFinite()) {
    const MatR& v = es.eigenvectors();
    const VecR c = v.transpose() * p0;
    // The spectrum is nonpositive; rounding-level eigenvalues are set to zero
    // so conserved modes stay conserved at long times.
    const double floor = 8.0 * static_cast<double>(n) * std::numeric_limits<double>::epsilon() *
                         g.cwiseAbs().colwise().sum().maxCoeff();
    VecR lam = es.eigenvalues();
    for (auto& l : lam)
      if (l > -floor) l = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k)
      tr.p.col(static_cast<Eigen::Index>(k)) = v * (lam.array() * times[k]).exp().matrix().cwiseProduct(c);
  } else {
    warn("propagate_polarization: eigensolver failed, using the matrix exponential");
    for (std::size_t k = 0; k < times.size(); ++k)
      tr.p.col(static_cast<Eigen::Index>(k)) = linalg::expm((g * times[k]).cast<cplx>()).real() * p0;
  }
  for (std::size_t k = 0; k < times.size(); ++k) tr.mean.push_back(tr.p.col(static_cast<Eigen::Index>(k)).mean());
  return tr;
}

std::vector<SpinClusterGeometry> sample_ensemble(const MonteCarloConfig& cfg) {
  cfg.validate();
  std::vector<SpinClusterGeometry> out;
  std::uint64_t draw = 0;
  const std::uint64_t cap = 100 * cfg.n_configs + 100;
  while (out.size() < cfg.n_configs) {
    if (draw >= cap) throw NumericalError("sample_ensemble: too many empty configurations");
    LatticeConfig l = cfg.lattice;
    l.seed = cfg.lattice.seed + draw++;  // one seed per configuration
    SampledConfiguration sc = sample_configuration(l);
    if (!sc.empty) out.push_back(std::move(sc.geometry));
  }
  return out;
}

std::vector<MonteCarloPoint> ensemble_sweep(const MonteCarloConfig& cfg, const std::vector<double>& detunings,
                                            Exec exec, int jobs, const FitTolerances& tol) {
  cfg.validate();
  if (detunings.empty()) throw DomainError("ensemble_sweep: empty detuning grid");
  const std::vector<SpinClusterGeometry> ens = sample_ensemble(cfg);
  const std::vector<double> t = cfg.times();
  double n_mean = 0.0;
  for (const auto& g : ens) n_mean += static_cast<double>(g.n_nuclei());
  n_mean /= static_cast<double>(ens.size());

  std::vector<MonteCarloPoint> out;
  for (double dw : detunings) {
    MonteCarloPoint pt;
    pt.detuning_hz = dw;
    pt.n_spins_mean = n_mean;
    pt.scales = coupling_scales(cfg.drive.with_detuning(dw), cfg.n_max, cfg.grid_points);
    const auto parts = parallel_map(ens.size(), exec, [&](std::size_t i) {
      const TransportModel m = build_transport(ens[i], rescale_couplings(ens[i], pt.scales), cfg.eta, cfg.kappa2j0,
                                               cfg.weighting);
      const PolarizationTrajectory tr =
          propagate_polarization(m, VecR::Ones(static_cast<Eigen::Index>(ens[i].n_nuclei())), t);
      return VecR(Eigen::Map<const VecR>(tr.mean.data(), static_cast<Eigen::Index>(tr.mean.size())));
    }, jobs);
    const VecR mean = pairwise_sum(parts, 0, parts.size()) / static_cast<double>(parts.size());
    pt.mean_trajectory.assign(mean.data(), mean.data() + mean.size());
    try {
      pt.fit = fit_product_decay(t, pt.mean_trajectory, tol);
      pt.flagged = !pt.fit.converged || pt.scales.flagged;
    } catch (const DomainError& e) {
      pt.fit.note = e.what();
      pt.flagged = true;
    }
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace floq
