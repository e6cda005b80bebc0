#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "floq/bimodal.hpp"
#include "floq/linalg.hpp"
#include "floq/spin.hpp"

using namespace floq;
using fixtures::reference_drive;

namespace {

struct Tables {
  MicromotionTrajectory tr;
  FourierCoefficientTable f1, f2;
};

Tables tables(const DriveSequence& s, int n_max = 10, std::size_t grid = 512) {
  Tables t{micromotion(s, grid), {}, {}};
  t.f1 = fourier_coefficients(t.tr, 1, n_max);
  t.f2 = fourier_coefficients(t.tr, 2, n_max);
  return t;
}

SpinClusterGeometry two_spins_with_electron() {
  const double a = phys::diamond_a0;
  return make_geometry({a * Vec3(0, 0, 0), a * Vec3(0.25, 0.25, 0.75)}, {a * Vec3(1.0, -0.5, 6.0)}, {0.5});
}

// Lab-frame interaction conjugated into the micromotion and tilted frame.
MatC brute_force_frame(const SpinClusterGeometry& g, const DriveSequence& s, double m_s, double t) {
  const int n = static_cast<int>(g.n_nuclei());
  const auto eff = compose_one_cycle(s);
  MatC h = spin::dipolar_secular(g.dipolar).cast<cplx>();
  for (int i = 0; i < n; ++i) h += m_s * g.hyperfine(i, 0) * spin::qubit_op(n, i, 'z');
  const MatC p = spin::tensor_power(micromotion_operator(s, eff, t), n);
  const MatC q = spin::tensor_power(su2_euler(Euler{eff.phi_eff, eff.theta_eff, 0.0}), n);
  const MatC rz = spin::tensor_power(su2_axis_angle(Vec3::UnitZ(), kTwoPi * eff.omega_eff_hz * t), n);
  const MatC x = p * q * rz;
  return x.adjoint() * h * x;
}

}  // namespace

TEST_CASE("static hyperfine part vanishes for an equatorial effective axis") {
  const double a = phys::diamond_a0;
  const auto g = make_geometry({Vec3::Zero()}, {a * Vec3(0.3, 0.1, 5.0)}, {0.5});
  const auto t = tables(reference_drive(0.0));
  CHECK(t.tr.eff.theta_eff == doctest::Approx(kPi / 2).epsilon(1e-9));
  const auto c = decompose(g, t.tr.eff, t.f1, t.f2, 0.5);
  CHECK(c.at(0, 0).norm() < 1e-10 * std::abs(g.hyperfine(0, 0)));
  double rest = 0.0;
  for (const auto& m : c.h) rest += m.squaredNorm();
  CHECK(std::sqrt(rest) > 1e-2 * std::abs(g.hyperfine(0, 0)));
}

TEST_CASE("single nucleus without electrons has no components") {
  const auto g = make_geometry({Vec3::Zero()}, {}, {});
  const auto t = tables(reference_drive(700.0));
  const auto c = decompose(g, t.tr.eff, t.f1, t.f2, 0.0);
  for (const auto& m : c.h) CHECK(m.norm() == 0.0);
}

TEST_CASE("exact frame identity and Fourier resummation") {
  const auto g = two_spins_with_electron();
  const auto s = reference_drive(1300.0);
  const auto eff = compose_one_cycle(s);
  // Before truncation: sum_q T_q sum_m D_qm(Q^-1) D_m0(P^-1) e^{i q w t} is exact.
  const MatC dinv2 = wigner_D(2, Euler{eff.phi_eff, eff.theta_eff, 0.0}).adjoint();
  const MatC dinv1 = wigner_D(1, Euler{eff.phi_eff, eff.theta_eff, 0.0}).adjoint();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, s.period);
  for (int trial = 0; trial < 4; ++trial) {
    const double t = u(rng);
    const Mat3 pr = so3_from_su2(micromotion_operator(s, eff, t));
    const Euler pe = euler_from_so3(pr);
    MatC direct = MatC::Zero(4, 4);
    for (int q = -2; q <= 2; ++q) {
      cplx c2 = 0.0, c1 = 0.0;
      for (int m = -2; m <= 2; ++m) c2 += dinv2(q + 2, m + 2) * std::conj(big_D(2, 0, m, pe));
      if (std::abs(q) <= 1)
        for (int m = -1; m <= 1; ++m) c1 += dinv1(q + 1, m + 1) * std::conj(big_D(1, 0, m, pe));
      const cplx ph = std::exp(cplx(0, kTwoPi * q * eff.omega_eff_hz * t));
      direct += ph * c2 * g.dipolar(0, 1) * spin::tensor2(2, 0, 1, q);
      if (std::abs(q) <= 1)
        for (int i = 0; i < 2; ++i) direct += ph * c1 * 0.5 * g.hyperfine(i, 0) * spin::tensor1(2, i, q);
    }
    const MatC brute = brute_force_frame(g, s, 0.5, t);
    CHECK((direct - brute).norm() < 1e-10 * brute.norm());
  }
  // Truncated series: error governed by the harmonic tail.
  const auto t = tables(s, 60, 4096);
  const auto c = decompose(g, t.tr.eff, t.f1, t.f2, 0.5);
  for (int trial = 0; trial < 4; ++trial) {
    const double tt = u(rng);
    const MatC brute = brute_force_frame(g, s, 0.5, tt);
    CHECK((c.resum(tt) - brute).norm() < 5e-3 * brute.norm());
  }
  // Hermiticity pairing.
  for (int n = -c.n_max; n <= c.n_max; ++n)
    for (int q = -2; q <= 2; ++q) CHECK((c.at(-n, -q) - c.at(n, q).adjoint()).norm() < 1e-12 * brute_force_frame(g, s, 0.5, 0).norm());
}

TEST_CASE("off resonance the effective generator conserves tilted Iz") {
  const auto g = fixtures::three_spin_geometry(0.5);
  const auto t = tables(reference_drive(1500.0));
  const auto c = decompose(g, t.tr.eff, t.f1, t.f2, 0.5);
  const auto gen = effective_generator(c);
  REQUIRE(gen.resonant_set.size() == 1);
  const MatC iz = spin::qubit_collective(3, 'z');
  const MatC h = gen.total();
  CHECK((iz * h - h * iz).norm() < 1e-10 * h.norm());
  CHECK(gen.resonant_second_order.norm() == 0.0);
  CHECK(std::abs(h(7, 0)) < 1e-12 * h.norm());
}

TEST_CASE("triple flip appears at second order on the k = 3 resonance") {
  const auto g = fixtures::three_spin_geometry(0.5);
  const double res = find_resonances(reference_drive(), 3).at(0);
  const auto t = tables(reference_drive(res));
  const auto c = decompose(g, t.tr.eff, t.f1, t.f2, 0.5);
  const auto gen = effective_generator(c);
  bool has13 = false;
  for (const auto& [n0, q0] : gen.resonant_set) has13 |= (n0 == 1 && q0 == -3);
  CHECK(has13);
  CHECK(std::abs(gen.first_order(7, 0)) == 0.0);
  // Element-wise oracle: <down down down| [A, B] |up up up> over all component pairs.
  cplx elem = 0.0;
  for (int n0 : {1, -1}) {
    const int q0 = -3 * n0;
    for (int n = -c.n_max; n <= c.n_max; ++n)
      for (int q = -2; q <= 2; ++q) {
        const int n1 = n0 - n, q1 = q0 - q;
        if (std::abs(n1) > c.n_max || std::abs(q1) > 2) continue;
        const double nu = n * c.drive_hz + q * c.omega_eff_hz;
        if (std::abs(nu) < 1e-3 * c.drive_hz) continue;
        const MatC& a = c.h[(n1 + c.n_max) * 5 + q1 + 2];
        const MatC& b = c.h[(n + c.n_max) * 5 + q + 2];
        cplx ab = 0.0, ba = 0.0;
        for (int k = 0; k < 8; ++k) {
          ab += a(7, k) * b(k, 0);
          ba += b(7, k) * a(k, 0);
        }
        elem += -0.5 * (ab - ba) / nu;
      }
  }
  CHECK(std::abs(elem) > 1e-6);
  CHECK(std::abs(gen.second_order(7, 0) - elem) < 1e-10 * std::abs(elem));
  CHECK(std::abs(gen.resonant_second_order(7, 0) - elem) < 1e-10 * std::abs(elem));
}

TEST_CASE("resonant block scales inversely with drive frequency") {
  const auto g = fixtures::three_spin_geometry(0.5);
  const auto base = reference_drive();
  const double res = find_resonances(base, 3).at(0);
  std::vector<double> norms;
  for (double s : {1.0, 2.0}) {
    DriveSequence d{base.pulse_width / s, base.period / s, base.rabi_hz * s, res * s};
    const auto t = tables(d);
    const auto gen = effective_generator(decompose(g, t.tr.eff, t.f1, t.f2, 0.5));
    norms.push_back(linalg::op_norm(gen.resonant_second_order));
  }
  CHECK(norms[1] == doctest::Approx(norms[0] / 2).epsilon(1e-6));
}

TEST_CASE("kick angles") {
  auto g = fixtures::three_spin_geometry(0.5);
  const auto t = tables(reference_drive(900.0));
  const auto up = decompose(g, t.tr.eff, t.f1, t.f2, 0.5);
  const auto dn = decompose(g, t.tr.eff, t.f1, t.f2, -0.5);
  CHECK(kick_angle(up, up) == doctest::Approx(0.0));
  const double eps = kick_angle(up, dn);
  CHECK(eps > 0.0);
  CHECK(eps < 0.5 * kPi);

  // Dense oracle: kicks assembled straight from tensors and coefficient tables,
  // exponentiated with the general Pade routine.
  const MatC c1 = tilted_coefficients(t.tr.eff, t.f1), c2 = tilted_coefficients(t.tr.eff, t.f2);
  auto dense_kick = [&](double ms) {
    MatC k = MatC::Zero(8, 8);
    for (int n = -10; n <= 10; ++n)
      for (int q = -2; q <= 2; ++q) {
        const double nu = n * t.tr.eff.drive_hz + q * t.tr.eff.omega_eff_hz;
        if (std::abs(nu) < 1e-3 * t.tr.eff.drive_hz) continue;
        MatC h = MatC::Zero(8, 8);
        for (int i = 0; i < 3; ++i)
          for (int j = i + 1; j < 3; ++j) h += g.dipolar(i, j) * c2(q + 2, n + 10) * spin::tensor2(3, i, j, q);
        if (std::abs(q) <= 1)
          for (int i = 0; i < 3; ++i) h += ms * g.hyperfine(i, 0) * c1(q + 1, n + 10) * spin::tensor1(3, i, q);
        k += h / nu;
      }
    return MatC(cplx(0, -1) * k);
  };
  const MatC w = linalg::expm(kI * dense_kick(-0.5)) * linalg::expm(-kI * dense_kick(0.5));
  const MatC iz = spin::qubit_collective(3, 'z');
  const double ov = (iz * w * iz * w.adjoint()).trace().real() / (iz * iz).trace().real();
  CHECK(eps == doctest::Approx(std::acos(ov)).epsilon(1e-8));

  // Linear in a small hyperfine scale.
  std::vector<double> e;
  for (double lam : {1e-3, 2e-3}) {
    auto gs = g;
    gs.hyperfine *= lam;
    e.push_back(kick_angle(decompose(gs, t.tr.eff, t.f1, t.f2, 0.5), decompose(gs, t.tr.eff, t.f1, t.f2, -0.5)) / lam);
  }
  CHECK(e[1] == doctest::Approx(e[0]).epsilon(0.01));
}

TEST_CASE("kick-dephasing rate formula") {
  CHECK(rate_kick(0.0, 0.05) == 0.0);
  CHECK(rate_kick(kPi / 3, 0.05) == doctest::Approx(20.0 * std::log(2.0)).epsilon(1e-14));
  const double e = 0.05;
  CHECK(rate_kick(e, 0.05) == doctest::Approx(e * e / (2 * 0.05)).epsilon(0.01));
  CHECK(std::isinf(rate_kick(kPi / 2, 0.05)));
  CHECK_THROWS_AS(rate_kick(0.1, 0.0), DomainError);

  // Two manifolds with equal rates reduce to the single-angle formula.
  auto g = fixtures::three_spin_geometry(0.5);
  const auto t = tables(reference_drive(900.0));
  std::vector<BimodalComponents> pm = {decompose(g, t.tr.eff, t.f1, t.f2, 0.5), decompose(g, t.tr.eff, t.f1, t.f2, -0.5)};
  CHECK(rate_kick_manifolds(pm, electron_rate_matrix(0.5, 0.05)) ==
        doctest::Approx(rate_kick(kick_angle(pm[0], pm[1]), 0.05)).epsilon(1e-12));
}

TEST_CASE("electron rate matrices conserve population") {
  for (double s : {0.5, 1.0}) {
    const MatR w = electron_rate_matrix(s, 0.05);
    CHECK(w.colwise().sum().cwiseAbs().maxCoeff() == 0.0);
    CHECK(w.rowwise().sum().cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("Lorentzian superposition") {
  const double t1e = 0.05;
  const LorentzianLine l{2442.0, 1.0};
  CHECK(lorentzian_rate(2442.0, l, t1e) == doctest::Approx(t1e / 9).epsilon(1e-14));
  const auto far = rate_multiflip(100.0, 0.3, {l}, {l}, t1e);
  CHECK(far.total == doctest::Approx(0.3).epsilon(1e-6));
  const auto none = rate_multiflip(2442.0, 0.3, {}, {LorentzianLine{2442.0, 0.0}}, t1e);
  CHECK(none.total == 0.3);
  // Half width at half maximum in detuning is 3 / (4 pi T1e).
  const double hw = 3.0 / (4 * kPi * t1e);
  CHECK(lorentzian_rate(2442.0 + hw, l, t1e) == doctest::Approx(0.5 * t1e / 9).epsilon(1e-12));
}

TEST_CASE("analytic model: per-manifold lines for a spin-1 electron") {
  const auto g = fixtures::three_spin_geometry(1.0);
  const AnalyticRateModel model(g, reference_drive());
  REQUIRE(model.three_flip().size() == 3);
  REQUIRE(model.two_flip().size() == 3);
  const double mean_h = g.hyperfine.col(0).mean();
  const double root3 = find_resonances(reference_drive(), 3).at(0);
  CHECK(model.three_flip()[1].center_hz == doctest::Approx(root3));
  CHECK(model.three_flip()[0].center_hz - model.three_flip()[1].center_hz == doctest::Approx(-mean_h));
  CHECK(model.three_flip()[1].center_hz - model.three_flip()[2].center_hz == doctest::Approx(-mean_h));
  for (const auto& l : model.three_flip()) CHECK(l.amplitude > 0.0);
  const auto r0 = model.at(0.0);
  CHECK(std::isfinite(r0.kick));
  CHECK(r0.kick > 0.0);
}

TEST_CASE("occupancy scaling of multi-flip amplitudes") {
  // One conventional cell: every site pair and triple gets its resonant
  // amplitude once; occupancy sampling then weights the tuples.
  const auto sites = diamond_sites(phys::diamond_a0, 0.5 * phys::diamond_a0);
  const auto drive = reference_drive();
  const double r2 = find_resonances(drive, 2).at(0), r3 = find_resonances(drive, 3).at(0);
  const auto t2 = tables(drive.with_detuning(r2)), t3 = tables(drive.with_detuning(r3));
  const std::size_t ns = sites.size();
  MatR a2 = MatR::Zero(ns, ns);
  std::vector<std::array<std::size_t, 3>> triples;
  std::vector<double> a3;
  for (std::size_t i = 0; i < ns; ++i)
    for (std::size_t j = i + 1; j < ns; ++j) {
      const auto g = make_geometry({sites[i], sites[j]}, {}, {});
      a2(i, j) = std::pow(linalg::op_norm(effective_generator(decompose(g, t2.tr.eff, t2.f1, t2.f2, 0.0)).resonant_first_order), 2);
      for (std::size_t k = j + 1; k < ns; ++k) {
        const auto g3 = make_geometry({sites[i], sites[j], sites[k]}, {}, {});
        triples.push_back({i, j, k});
        a3.push_back(std::pow(linalg::op_norm(effective_generator(decompose(g3, t3.tr.eff, t3.f1, t3.f2, 0.0)).resonant_second_order), 2));
      }
    }
  auto ensemble = [&](double p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution occ(p);
    double s2 = 0.0, s3 = 0.0;
    const int configs = 20000;
    for (int c = 0; c < configs; ++c) {
      std::vector<bool> on(ns);
      for (std::size_t i = 0; i < ns; ++i) on[i] = occ(rng);
      for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t j = i + 1; j < ns; ++j) if (on[i] && on[j]) s2 += a2(i, j);
      for (std::size_t k = 0; k < triples.size(); ++k)
        if (on[triples[k][0]] && on[triples[k][1]] && on[triples[k][2]]) s3 += a3[k];
    }
    return std::make_pair(s2 / configs, s3 / configs);
  };
  const auto lo = ensemble(0.25, 1), hi = ensemble(0.5, 2);
  CHECK(std::log(hi.first / lo.first) / std::log(2.0) == doctest::Approx(2.0).epsilon(0.08));
  CHECK(std::log(hi.second / lo.second) / std::log(2.0) == doctest::Approx(3.0).epsilon(0.08));
}
