#include "floq/wigner.hpp"

#include <array>
#include <cmath>

namespace floq {
namespace {

double fact(int n) { return std::tgamma(n + 1.0); }

double wrap_near(double x, double target) {
  return x + kTwoPi * std::round((target - x) / kTwoPi);
}

}  // namespace

double small_d(int l, int m, int mp, double beta) {
  if (l < 0 || std::abs(m) > l || std::abs(mp) > l) throw DomainError("small_d: index out of range");
  const double c = std::cos(0.5 * beta), s = std::sin(0.5 * beta);
  const double pre = std::sqrt(fact(l + m) * fact(l - m) * fact(l + mp) * fact(l - mp));
  double sum = 0.0;
  for (int k = std::max(0, mp - m); k <= std::min(l + mp, l - m); ++k) {
    const double den = fact(l + mp - k) * fact(k) * fact(l - m - k) * fact(k + m - mp);
    const double sign = ((k + m - mp) % 2 == 0) ? 1.0 : -1.0;
    sum += sign / den * std::pow(c, 2 * l - 2 * k - m + mp) * std::pow(s, 2 * k + m - mp);
  }
  return pre * sum;
}

cplx big_D(int l, int m, int mp, const Euler& e) {
  return std::exp(cplx(0, -m * e.alpha)) * small_d(l, m, mp, e.beta) * std::exp(cplx(0, -mp * e.gamma));
}

MatC wigner_D(int l, const Euler& e) {
  MatC out(2 * l + 1, 2 * l + 1);
  for (int m = -l; m <= l; ++m)
    for (int mp = -l; mp <= l; ++mp) out(m + l, mp + l) = big_D(l, m, mp, e);
  return out;
}

Mat2 su2_axis_angle(const Vec3& axis, double angle) {
  const double c = std::cos(0.5 * angle), s = std::sin(0.5 * angle);
  Mat2 u;
  u << cplx(c, -s * axis.z()), cplx(-s * axis.y(), -s * axis.x()),
      cplx(s * axis.y(), -s * axis.x()), cplx(c, s * axis.z());
  return u;
}

Mat2 su2_euler(const Euler& e) {
  return su2_axis_angle(Vec3::UnitZ(), e.alpha) * su2_axis_angle(Vec3::UnitY(), e.beta) *
         su2_axis_angle(Vec3::UnitZ(), e.gamma);
}

Mat3 so3_from_su2(const Mat2& u) {
  static const std::array<Mat2, 3> sigma = [] {
    std::array<Mat2, 3> s;
    s[0] << 0, 1, 1, 0;
    s[1] << 0, cplx(0, -1), cplx(0, 1), 0;
    s[2] << 1, 0, 0, -1;
    return s;
  }();
  Mat3 r;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) r(a, b) = 0.5 * (sigma[a] * u * sigma[b] * u.adjoint()).trace().real();
  return r;
}

Mat3 so3_euler(const Euler& e) {
  using Eigen::AngleAxisd;
  return (AngleAxisd(e.alpha, Vec3::UnitZ()) * AngleAxisd(e.beta, Vec3::UnitY()) *
          AngleAxisd(e.gamma, Vec3::UnitZ()))
      .toRotationMatrix();
}

Euler euler_from_so3(const Mat3& r, const Euler& hint) {
  constexpr double pole_tol = 1e-9;
  const double sb = std::hypot(r(0, 2), r(1, 2));
  Euler e;
  if (sb < pole_tol) {
    e.alpha = hint.alpha;
    if (r(2, 2) > 0) {
      e.beta = 0.0;
      e.gamma = wrap_near(std::atan2(r(1, 0), r(0, 0)) - e.alpha, hint.gamma);
    } else {
      e.beta = hint.beta < 0 ? -kPi : kPi;
      // Rz(a) Ry(+-pi) Rz(g) = Rz(a - g) Ry(pi) for either sign of pi.
      e.gamma = wrap_near(e.alpha - std::atan2(-r(0, 1), r(1, 1)), hint.gamma);
    }
    return e;
  }
  const double beta = std::atan2(sb, r(2, 2));
  const double a = std::atan2(r(1, 2), r(0, 2));
  const double g = std::atan2(r(2, 1), -r(2, 0));
  // (a, b, g) and (a + pi, -b, g + pi) describe the same rotation.
  const Euler e1{wrap_near(a, hint.alpha), beta, wrap_near(g, hint.gamma)};
  const Euler e2{wrap_near(a + kPi, hint.alpha), -beta, wrap_near(g + kPi, hint.gamma)};
  auto dist = [&](const Euler& x) {
    return std::abs(x.alpha - hint.alpha) + std::abs(x.beta - hint.beta) + std::abs(x.gamma - hint.gamma);
  };
  return dist(e1) <= dist(e2) ? e1 : e2;
}

}  // namespace floq
