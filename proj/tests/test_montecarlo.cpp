#include "doctest.h"

#include <random>

#include <boost/numeric/odeint.hpp>

#include "fixtures.hpp"
#include "floq/montecarlo.hpp"
#include "floq/spin.hpp"

using namespace floq;

namespace {

FourierCoefficientTable trivial_table(int l) {
  FourierCoefficientTable f;
  f.l = l;
  f.n_max = 2;
  f.coeff = MatC::Zero(2 * l + 1, 5);
  f.coeff(l, 2) = 1.0;
  return f;
}

MonteCarloConfig small_config() {
  MonteCarloConfig c;
  c.lattice.box_halfwidth = 1.5e-9;
  c.lattice.electron_density_ppm = 200.0;
  c.lattice.seed = 4;
  c.n_configs = 4;
  return c;
}

}  // namespace

TEST_CASE("identity frame leaves couplings unscaled") {
  EffectiveDrive eff;
  eff.theta_eff = 0.0;
  eff.phi_eff = 0.0;
  const CouplingScales s = coupling_scales(eff, trivial_table(1), trivial_table(2));
  CHECK(s.hyperfine == doctest::Approx(1.0));
  CHECK(s.dipolar == doctest::Approx(1.0));
  CHECK_FALSE(s.flagged);
}

TEST_CASE("magic-angle axis removes the dipolar scale only") {
  EffectiveDrive eff;
  eff.theta_eff = std::acos(1.0 / std::sqrt(3.0));
  eff.phi_eff = 0.7;
  const CouplingScales s = coupling_scales(eff, trivial_table(1), trivial_table(2));
  CHECK(std::abs(s.dipolar) < 1e-12);
  CHECK(s.hyperfine == doctest::Approx(1.0 / std::sqrt(3.0)));
}

TEST_CASE("scale factors equal the period average of the rotated field direction") {
  for (double dw : {0.0, 900.0, 3100.0}) {
    const DriveSequence d = fixtures::reference_drive(dw);
    const EffectiveDrive eff = compose_one_cycle(d);
    const CouplingScales s = coupling_scales(d, 12, 2048);
    // Oracle: u(t) from P(t)^-1 Iz P(t) with P(t) = U(t) exp(+i t w_eff n.sigma / 2),
    // averaged with a fine midpoint rule.
    const int steps = 20000;
    const Vec3 n = eff.axis;
    double s1 = 0.0, s2 = 0.0;
    Mat2 px, py, pz;
    px << 0, 0.5, 0.5, 0;
    py << 0, cplx(0, -0.5), cplx(0, 0.5), 0;
    pz << 0.5, 0, 0, -0.5;
    for (int k = 0; k < steps; ++k) {
      const double t = (k + 0.5) / steps * d.period;
      const double ang = kTwoPi * eff.omega_eff_hz * t;
      const Mat2 gen = n.x() * px + n.y() * py + n.z() * pz;
      const Mat2 rot = std::cos(0.5 * ang) * Mat2::Identity() + cplx(0, 2.0 * std::sin(0.5 * ang)) * gen;
      const Mat2 p = drive_propagator(d, t) * rot;
      const Mat2 z = p.adjoint() * pz * p;
      const Vec3 u(2.0 * (z * px).trace().real(), 2.0 * (z * py).trace().real(), 2.0 * (z * pz).trace().real());
      const double c = n.dot(u);
      s1 += c / steps;
      s2 += 0.5 * (3.0 * c * c - 1.0) / steps;
    }
    CHECK(std::abs(s.hyperfine) == doctest::Approx(std::abs(s1)).epsilon(1e-5));
    CHECK(s.dipolar == doctest::Approx(s2).epsilon(1e-5));
    CHECK(std::abs(s.hyperfine_imag) < 1e-8);
    CHECK(std::abs(s.dipolar_imag) < 1e-8);
  }
}

TEST_CASE("transport matrices follow the hand-assembled form") {
  const double a = phys::diamond_a0;
  const SpinClusterGeometry g =
      make_geometry({a * Vec3(0, 0, 0), a * Vec3(0.25, 0.25, 0.25), a * Vec3(0.5, 0.5, 0)}, {a * Vec3(0, 0, 6)}, {0.5});
  CouplingScales s;
  s.hyperfine = 0.3;
  s.dipolar = -0.4;
  const double eta = 1e-3, k = 0.2;
  for (HyperfineWeighting w : {HyperfineWeighting::secular, HyperfineWeighting::non_secular}) {
    const TransportModel m = build_transport(g, rescale_couplings(g, s), eta, k, w);
    MatR expect = MatR::Zero(3, 3);
    for (int i = 0; i < 3; ++i) {
      const double h = g.hyperfine(i, 0);
      expect(i, i) = -eta * (w == HyperfineWeighting::secular ? 0.09 * h * h : 0.91 * h * h);
      for (int j = 0; j < 3; ++j)
        if (j != i) {
          const double dt = -0.4 * g.dipolar(i, j);
          expect(i, j) = k * dt * dt;
          expect(i, i) -= k * dt * dt;
        }
    }
    CHECK((m.generator() - expect).norm() < 1e-12 * expect.norm());
  }
}

TEST_CASE("no electrons means no relaxation and conserved polarization") {
  LatticeConfig l;
  l.carbon_occupancy = 0.2;
  l.box_halfwidth = 1e-9;
  l.seed = 9;
  const SampledConfiguration sc = sample_configuration(l);
  REQUIRE(sc.geometry.n_electrons() == 0);
  const TransportModel m = build_transport(sc.geometry, rescale_couplings(sc.geometry, CouplingScales{}), 1e-3, 0.5);
  CHECK(m.relaxation.cwiseAbs().maxCoeff() == 0.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  VecR p0(static_cast<Eigen::Index>(sc.geometry.n_nuclei()));
  for (auto& x : p0) x = u(rng);
  const PolarizationTrajectory tr = propagate_polarization(m, p0, {0.0, 0.01, 0.1, 1.0, 10.0});
  for (Eigen::Index k = 0; k < tr.p.cols(); ++k) CHECK(std::abs(tr.p.col(k).sum() - p0.sum()) < 1e-10 * p0.sum());
}

TEST_CASE("isolated nucleus decays exponentially") {
  const double a = phys::diamond_a0;
  const SpinClusterGeometry g = make_geometry({Vec3::Zero()}, {a * Vec3(1, 2, 5)}, {1.0});
  const TransportModel m = build_transport(g, rescale_couplings(g, CouplingScales{}), 2e-5, 0.3);
  CHECK(m.transport(0, 0) == 0.0);
  const PolarizationTrajectory tr = propagate_polarization(m, VecR::Ones(1), {0.0, 0.003, 0.02});
  for (std::size_t k = 0; k < tr.times.size(); ++k)
    CHECK(tr.mean[k] == doctest::Approx(std::exp(m.relaxation(0) * tr.times[k])).epsilon(1e-12));
}

TEST_CASE("sampled transport matrices keep their structure") {
  const MonteCarloConfig c = small_config();
  for (const auto& g : sample_ensemble(c)) {
    const TransportModel m = build_transport(g, rescale_couplings(g, coupling_scales(c.drive)), c.eta, c.kappa2j0);
    const auto n = m.transport.rows();
    for (Eigen::Index j = 0; j < n; ++j) CHECK(std::abs(m.transport.col(j).sum()) < 1e-12 * std::max(1.0, m.transport.norm()));
    CHECK((m.transport - m.transport.transpose()).norm() == 0.0);
    CHECK((m.relaxation.array() <= 0.0).all());
    MatR off = m.transport;
    off.diagonal().setZero();
    CHECK(off.minCoeff() >= 0.0);
    CHECK(Eigen::SelfAdjointEigenSolver<MatR>(m.generator()).eigenvalues().maxCoeff() < 1e-9 * m.generator().norm());
  }
}

TEST_CASE("eigen propagation matches an adaptive integrator on a 20-spin configuration") {
  LatticeConfig l;
  l.carbon_occupancy = 0.03;
  l.box_halfwidth = 1.2e-9;
  l.electron_density_ppm = 300.0;
  l.seed = 21;
  SampledConfiguration sc = sample_configuration(l);
  std::vector<Vec3> nuc = sc.geometry.nuclear_positions;
  REQUIRE(nuc.size() >= 20);
  nuc.resize(20);
  std::vector<Vec3> el = sc.geometry.electron_positions;
  if (el.empty()) el.push_back(Vec3(0, 0, 2.5e-9));
  const SpinClusterGeometry g = make_geometry(nuc, el, std::vector<double>(el.size(), 0.5));
  const TransportModel m = build_transport(g, rescale_couplings(g, coupling_scales(fixtures::reference_drive(700.0))),
                                           2e-4, 0.1);
  const std::vector<double> times = {0.0, 0.001, 0.01, 0.05, 0.2};
  const PolarizationTrajectory tr = propagate_polarization(m, VecR::Ones(20), times);

  using State = std::vector<double>;
  const MatR gen = m.generator();
  State x(20, 1.0);
  auto rhs = [&](const State& s, State& ds, double) {
    const VecR v = gen * Eigen::Map<const VecR>(s.data(), 20);
    ds.assign(v.data(), v.data() + 20);
  };
  namespace ode = boost::numeric::odeint;
  auto stepper = ode::make_controlled(1e-13, 1e-13, ode::runge_kutta_dopri5<State>());
  double worst = 0.0;
  for (std::size_t k = 1; k < times.size(); ++k) {
    ode::integrate_adaptive(stepper, rhs, x, times[k - 1], times[k], 1e-6);
    for (int i = 0; i < 20; ++i) worst = std::max(worst, std::abs(x[i] - tr.p(i, static_cast<Eigen::Index>(k))));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("mean polarization never increases under relaxation") {
  MonteCarloConfig c = small_config();
  const auto pts = ensemble_sweep(c, {0.0, 2500.0}, Exec::serial);
  for (const auto& p : pts)
    for (std::size_t k = 1; k < p.mean_trajectory.size(); ++k)
      CHECK(p.mean_trajectory[k] <= p.mean_trajectory[k - 1] + 1e-15);
}

TEST_CASE("ensemble sweeps are reproducible") {
  const MonteCarloConfig c = small_config();
  const auto a = ensemble_sweep(c, {500.0, 4000.0}, Exec::serial);
  const auto b = ensemble_sweep(c, {500.0, 4000.0}, Exec::serial);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].fit.rp == b[i].fit.rp);
    CHECK(a[i].mean_trajectory == b[i].mean_trajectory);
  }
}

TEST_CASE("without electrons the fitted rates vanish") {
  MonteCarloConfig c = small_config();
  c.lattice.electron_density_ppm = 0.0;
  c.n_configs = 1;
  const auto pts = ensemble_sweep(c, {0.0}, Exec::serial);
  CHECK(pts[0].fit.rp < 1e-8);
  CHECK(pts[0].fit.rd < 1e-8);
}

TEST_CASE("doubling eta doubles the rate without transport") {
  MonteCarloConfig c = small_config();
  c.kappa2j0 = 0.0;
  const std::vector<double> t = c.times();
  const auto base = ensemble_sweep(c, {1200.0}, Exec::serial);
  c.eta *= 2.0;
  // Same physical decay on a grid compressed by two.
  std::vector<double> half;
  for (double x : t) half.push_back(0.5 * x);
  c.time_grid = half;
  const auto twice = ensemble_sweep(c, {1200.0}, Exec::serial);
  CHECK(twice[0].fit.rp == doctest::Approx(2.0 * base[0].fit.rp).epsilon(1e-6));
  CHECK(twice[0].fit.rd == doctest::Approx(2.0 * base[0].fit.rd).epsilon(1e-6).scale(1e-6));
}

TEST_CASE("configuration errors are reported") {
  MonteCarloConfig c;
  c.eta = -1.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = MonteCarloConfig{};
  c.n_configs = 0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = MonteCarloConfig{};
  CHECK_THROWS_AS(ensemble_sweep(c, {}), DomainError);
}
