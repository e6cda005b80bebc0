#include <cmath>

#include "doctest.h"
#include "floq/drive.hpp"
#include "floq/linalg.hpp"
#include "floq/log.hpp"

using namespace floq;

namespace {

DriveSequence fig1(double dw = 0.0) { return DriveSequence{56e-6, 92e-6, 4460.0, dw}; }

// Independent propagator: dense exponentials of the Pauli-matrix generators.
Mat2 naive_generator(double wx, double wz) {
  Mat2 h;
  h << 0.5 * wz, 0.5 * wx, 0.5 * wx, -0.5 * wz;
  return h * kTwoPi;
}

Mat2 naive_cycle(const DriveSequence& s, double t) {
  const double tb = s.period - s.pulse_width;
  const Mat2 d = linalg::expm(MatC(cplx(0, -std::min(t, tb)) * naive_generator(0.0, s.detuning_hz)));
  if (t <= tb) return d;
  return linalg::expm(MatC(cplx(0, -(t - tb)) * naive_generator(s.rabi_hz, s.detuning_hz))) * d;
}

// Rotation angle from the eigenphases, folded onto [0, pi].
double naive_angle(const Mat2& u) {
  Eigen::ComplexEigenSolver<Mat2> es(u);
  const double ph = std::abs(std::arg(es.eigenvalues()(0)) - std::arg(es.eigenvalues()(1)));
  const double a = std::fmod(ph, kTwoPi);
  return a > kPi ? kTwoPi - a : a;
}

double phase_distance(const Mat2& a, const Mat2& b) {
  return std::min((a - b).norm(), (a + b).norm());
}

}  // namespace

TEST_CASE("quarter-cycle x pulse") {
  const DriveSequence s{50e-6, 100e-6, 5000.0, 0.0};
  const auto e = compose_one_cycle(s);
  CHECK(e.theta_eff == doctest::Approx(kPi / 2).epsilon(1e-12));
  CHECK(std::abs(e.phi_eff) < 1e-12);
  CHECK(e.omega_eff_hz == doctest::Approx(s.drive_hz() / 4).epsilon(1e-12));
  CHECK_FALSE(e.degenerate_axis);
}

TEST_CASE("reference parameters: effective frequency from eigenphases") {
  const auto s = fig1();
  const auto e = compose_one_cycle(s);
  const double ref = naive_angle(naive_cycle(s, s.period)) / kTwoPi * s.drive_hz();
  CHECK(e.omega_eff_hz == doctest::Approx(ref).epsilon(1e-10));
  CHECK(e.omega_eff_hz == doctest::Approx(2714.78).epsilon(1e-5));
}

TEST_CASE("full-cycle pulse is degenerate") {
  const DriveSequence s{50e-6, 100e-6, 20000.0, 0.0};
  const auto e = compose_one_cycle(s);
  CHECK(e.degenerate_axis);
  CHECK(e.omega_eff_hz == 0.0);
}

TEST_CASE("reconstruction, axis phase and large-detuning limit over a detuning grid") {
  int flipped = 0;
  for (int k = 0; k < 200; ++k) {
    const double dw = -6000.0 + 12000.0 * k / 199.0;
    const auto s = fig1(dw);
    const auto e = compose_one_cycle(s);
    CHECK(phase_distance(e.reconstructed(), naive_cycle(s, s.period)) < 1e-9);
    CHECK(e.omega_eff_hz >= 0.0);
    CHECK(e.omega_eff_hz <= 0.5 * s.drive_hz() + 1e-9);
    CHECK(e.closed_form_consistent);
    if (!e.degenerate_axis && std::sin(e.theta_eff) > 1e-6) {
      // Axis orientation is fixed only up to sign on the principal branch.
      const double diff = std::remainder(e.phi_eff + 0.5 * e.interpulse_phase, kPi);
      CHECK(std::abs(diff) < 1e-9);
      if (!e.branch_flipped) CHECK(std::abs(std::remainder(e.phi_eff + 0.5 * e.interpulse_phase, kTwoPi)) < 1e-9);
    }
    flipped += e.branch_flipped;
  }
  CHECK(flipped > 0);  // grid reaches past the k = 2 point
  const auto far = compose_one_cycle(fig1(2e6));
  CHECK(std::sin(far.theta_eff) < 0.01);
}

TEST_CASE("micromotion trajectory") {
  const auto s = fig1(1300.0);
  const auto tr = micromotion(s, 512);
  REQUIRE(tr.times.size() == 513);
  CHECK(tr.times.front() == 0.0);
  CHECK(tr.times.back() == s.period);
  CHECK(tr.times[tr.breakpoint] == doctest::Approx(s.delay()));
  CHECK((so3_euler(tr.angles.front()) - Mat3::Identity()).norm() < 1e-12);
  CHECK((so3_euler(tr.angles.back()) - Mat3::Identity()).norm() < 1e-10);
  for (std::size_t k = 1; k < tr.angles.size(); ++k) {
    // alpha and gamma are only meaningful away from the poles
    CHECK(std::abs(tr.angles[k].beta - tr.angles[k - 1].beta) < 0.1);
    if (std::abs(std::sin(tr.angles[k].beta)) > 0.1) {
      CHECK(std::abs(tr.angles[k].alpha - tr.angles[k - 1].alpha) < 0.5);
      CHECK(std::abs(tr.angles[k].gamma - tr.angles[k - 1].gamma) < 0.5);
    }
  }
  // Mid-pulse sample against the dense-exponential propagator.
  const std::size_t mid = tr.breakpoint + (tr.times.size() - tr.breakpoint) / 2;
  const double t = tr.times[mid];
  const auto e = compose_one_cycle(s);
  const Mat2 p = naive_cycle(s, t) * linalg::expm(MatC(cplx(0, t / s.period * e.rotation_angle() / kTwoPi) *
                                                       (e.axis.x() * naive_generator(1, 0) + e.axis.z() * naive_generator(0, 1) +
                                                        e.axis.y() * (Mat2() << 0, cplx(0, -kPi), cplx(0, kPi), 0).finished())));
  CHECK((so3_euler(tr.angles[mid]) - so3_from_su2(p)).norm() < 1e-10);
  CHECK_THROWS_AS(micromotion(s, 32), DomainError);
}

TEST_CASE("Fourier coefficients of a uniform x rotation") {
  // tau_p = T, no delay; the micromotion is R_x(2 pi t / T).
  const DriveSequence s{100e-6, 100e-6, 7000.0, 0.0};
  const auto tr = micromotion(s, 256);
  const auto f1 = fourier_coefficients(tr, 1, 4);
  const auto f2 = fourier_coefficients(tr, 2, 4);
  const double r = 1.0 / (2.0 * std::sqrt(2.0));
  // D^1_{m0}(R_x(-phi)): m = 0 -> cos(phi), m = +-1 -> i sin(phi)/sqrt(2)
  for (int n = -4; n <= 4; ++n) {
    const cplx e0 = (std::abs(n) == 1) ? cplx(0.5) : cplx(0.0);
    const cplx e1 = (n == 1) ? cplx(r) : (n == -1) ? cplx(-r) : cplx(0.0);
    CHECK(std::abs(f1.at(0, n) - e0) < 1e-12);
    CHECK(std::abs(f1.at(1, n) - e1) < 1e-12);
    CHECK(std::abs(f1.at(-1, n) - e1) < 1e-12);
    // D^2_{00} = (1 + 3 cos 2phi) / 4
    const cplx e20 = (n == 0) ? cplx(0.25) : (std::abs(n) == 2) ? cplx(0.375) : cplx(0.0);
    CHECK(std::abs(f2.at(0, n) - e20) < 1e-12);
  }
}

TEST_CASE("Fourier series at t = 0 and resolution stability") {
  const auto s = fig1(800.0);
  const auto fine = fourier_coefficients(micromotion(s, 4096), 2, 200);
  for (int m = -2; m <= 2; ++m) {
    cplx sum = 0.0;
    for (int n = -200; n <= 200; ++n) sum += fine.at(m, n);
    CHECK(std::abs(sum - (m == 0 ? 1.0 : 0.0)) < 2e-3);
  }
  const auto a = fourier_coefficients(micromotion(s, 512), 2, 10);
  const auto b = fourier_coefficients(micromotion(s, 1024), 2, 10);
  CHECK((a.coeff - b.coeff).cwiseAbs().maxCoeff() < 1e-4);
  CHECK(a.quadrature_error < 1e-4);
  CHECK(a.tail_energy < 1e-3);
  // Harmonics decay.
  CHECK(a.coeff.col(10 + 10).norm() < a.coeff.col(10 + 1).norm());
}

TEST_CASE("resonance roots") {
  const auto k2 = find_resonances(fig1(), 2);
  const auto k3 = find_resonances(fig1(), 3);
  REQUIRE(k2.size() == 1);
  REQUIRE(k3.size() == 1);
  CHECK(k2[0] == doctest::Approx(4900).epsilon(0.2 / 4.9));
  CHECK(k3[0] == doctest::Approx(2500).epsilon(0.2 / 2.5));
  const double wd = fig1().drive_hz();
  CHECK(2 * compose_one_cycle(fig1(k2[0])).omega_eff_hz == doctest::Approx(wd).epsilon(1e-6));
  CHECK(3 * compose_one_cycle(fig1(k3[0])).omega_eff_hz == doctest::Approx(wd).epsilon(1e-9));

  // k = 4 root lies below the k = 3 one; dense scan oracle.
  const auto k4 = find_resonances(fig1(), 4);
  REQUIRE(!k4.empty());
  CHECK(k4[0] < k3[0]);
  double prev = 4 * compose_one_cycle(fig1(0.0)).omega_eff_hz - wd, hit = -1;
  for (double dw = 1.0; dw <= 6000.0; dw += 1.0) {
    const double cur = 4 * compose_one_cycle(fig1(dw)).omega_eff_hz - wd;
    if (prev * cur <= 0) { hit = dw; break; }
    prev = cur;
  }
  CHECK(std::abs(k4[0] - hit) < 1.0);

  ResonanceScan narrow;
  narrow.scan_max_hz = 50.0;
  CHECK(find_resonances(fig1(), 3, narrow).empty());

  ResonanceScan coarse, dense;
  coarse.points = 300;
  dense.points = 3000;
  const auto rc = find_resonances(fig1(), 3, coarse), rd = find_resonances(fig1(), 3, dense);
  REQUIRE(rc.size() == rd.size());
  for (std::size_t i = 0; i < rc.size(); ++i) CHECK(std::abs(rc[i] - rd[i]) < 1e-6);
  CHECK_THROWS_AS(find_resonances(fig1(), 1), DomainError);
}
