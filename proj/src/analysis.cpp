#include "floq/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>
#include <unsupported/Eigen/NonLinearOptimization>

#include "floq/log.hpp"

namespace floq {
namespace {

using Eigen::Index;

// Least-squares problem with a subset of parameters held fixed.
struct Problem {
  virtual ~Problem() = default;
  virtual int n_params() const = 0;
  virtual int n_values() const = 0;
  virtual void residual(const VecR& p, VecR& r) const = 0;
  virtual void jacobian(const VecR& p, MatR& j) const = 0;
};

struct Masked {
  const Problem& pb;
  std::vector<int> free;  // indices into the full parameter vector
  VecR full;

  using Scalar = double;
  using InputType = VecR;
  using ValueType = VecR;
  using JacobianType = MatR;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  int inputs() const { return static_cast<int>(free.size()); }
  int values() const { return pb.n_values(); }

  VecR expand(const VecR& x) const {
    VecR p = full;
    for (std::size_t k = 0; k < free.size(); ++k) p(free[k]) = x(static_cast<Index>(k));
    return p;
  }
  int operator()(const VecR& x, VecR& f) const {
    pb.residual(expand(x), f);
    return 0;
  }
  int df(const VecR& x, MatR& j) const {
    MatR jf(pb.n_values(), pb.n_params());
    pb.jacobian(expand(x), jf);
    j.resize(pb.n_values(), inputs());
    for (std::size_t k = 0; k < free.size(); ++k) j.col(static_cast<Index>(k)) = jf.col(free[k]);
    return 0;
  }
};

struct LmResult {
  VecR p;
  double rss = 0.0;
  bool converged = false;
  int iterations = 0;
};

LmResult solve(const Problem& pb, const VecR& start, const std::vector<int>& free, const FitTolerances& tol) {
  Masked m{pb, free, start};
  LmResult out;
  VecR x(static_cast<Index>(free.size()));
  for (std::size_t k = 0; k < free.size(); ++k) x(static_cast<Index>(k)) = start(free[k]);
  if (!free.empty()) {
    Eigen::LevenbergMarquardt<Masked> lm(m);
    lm.parameters.gtol = tol.gradient;
    lm.parameters.ftol = 1e-14;
    lm.parameters.xtol = 1e-14;
    lm.parameters.maxfev = tol.max_iterations;
    const auto status = lm.minimize(x);
    out.iterations = static_cast<int>(lm.nfev);
    out.converged = status == Eigen::LevenbergMarquardtSpace::RelativeReductionTooSmall ||
                    status == Eigen::LevenbergMarquardtSpace::RelativeErrorTooSmall ||
                    status == Eigen::LevenbergMarquardtSpace::RelativeErrorAndReductionTooSmall ||
                    status == Eigen::LevenbergMarquardtSpace::CosinusTooSmall ||
                    status == Eigen::LevenbergMarquardtSpace::XtolTooSmall ||
                    status == Eigen::LevenbergMarquardtSpace::FtolTooSmall ||
                    status == Eigen::LevenbergMarquardtSpace::GtolTooSmall;
  } else {
    out.converged = true;
  }
  out.p = m.expand(x);
  VecR r(pb.n_values());
  pb.residual(out.p, r);
  out.rss = r.squaredNorm();
  return out;
}

// Parameters: amplitude, s = sqrt(R_p), R_d.
struct DecayProblem final : Problem {
  VecR t, y, w;  // w: inverse residual scale
  int n_params() const override { return 3; }
  int n_values() const override { return static_cast<int>(t.size()); }
  void residual(const VecR& p, VecR& r) const override {
    r = (p(0) * (-p(1) * t.array().sqrt() - p(2) * t.array()).exp() - y.array()) * w.array();
  }
  void jacobian(const VecR& p, MatR& j) const override {
    const Eigen::ArrayXd e = (-p(1) * t.array().sqrt() - p(2) * t.array()).exp() * w.array();
    j.col(0) = e;
    j.col(1) = -p(0) * t.array().sqrt() * e;
    j.col(2) = -p(0) * t.array() * e;
  }
};

// Linear least squares y = a + b x on the given index range.
std::pair<double, double> line_fit(const VecR& x, const VecR& y, Index lo, Index hi) {
  const Index n = hi - lo;
  const double mx = x.segment(lo, n).mean(), my = y.segment(lo, n).mean();
  double sxy = 0.0, sxx = 0.0;
  for (Index k = lo; k < hi; ++k) {
    sxy += (x(k) - mx) * (y(k) - my);
    sxx += (x(k) - mx) * (x(k) - mx);
  }
  const double b = sxx > 0 ? sxy / sxx : 0.0;
  return {my - b * mx, b};
}

}  // namespace

double DecayFit::value(double t) const { return amplitude * std::exp(-std::sqrt(rp * t) - rd * t); }

double DecayFit::effective_rate() const {
  const double s = std::sqrt(rp);
  if (rd <= 0.0 && s <= 0.0) return 0.0;
  // s u + rd u^2 = 1 with u = sqrt(t)
  const double u = rd > 0.0 ? (-s + std::sqrt(s * s + 4.0 * rd)) / (2.0 * rd) : 1.0 / s;
  return 1.0 / (u * u);
}

DecayFit fit_product_decay(const std::vector<double>& t, const std::vector<double>& y, const FitTolerances& tol) {
  if (t.size() != y.size()) throw DomainError("fit_product_decay: size mismatch");
  if (t.size() < 8) throw DomainError("fit_product_decay: need at least 8 samples");
  if (!(y.front() > 0.0)) throw DomainError("fit_product_decay: initial value must be positive");
  DecayProblem pb;
  pb.t = Eigen::Map<const VecR>(t.data(), static_cast<Index>(t.size()));
  pb.y = Eigen::Map<const VecR>(y.data(), static_cast<Index>(y.size()));
  if ((pb.t.array() < 0).any()) throw DomainError("fit_product_decay: negative times");
  const Index n = pb.t.size();
  const double ymax = pb.y.cwiseAbs().maxCoeff();
  pb.w = VecR::Ones(n);
  if (tol.relative_floor > 0.0 && std::isfinite(tol.relative_floor))
    for (Index k = 0; k < n; ++k) pb.w(k) = 1.0 / std::max(std::abs(pb.y(k)), tol.relative_floor * ymax);

  // Initial guess: R_d from the log-slope of the last third, R_p from the
  // early-time residual after removing it.
  VecR ly(n);
  for (Index k = 0; k < n; ++k) ly(k) = std::log(std::max(pb.y(k), 1e-300));
  Index lo = 2 * n / 3;
  while (lo > 0 && pb.y(n - 1) <= 0.0) --lo;
  const auto [c_late, b_late] = line_fit(pb.t, ly, lo, n);
  double rd0 = std::max(0.0, -b_late);
  const double a0 = pb.y(0) * std::exp(rd0 * pb.t(0));
  double num = 0.0, den = 0.0;
  for (Index k = 0; k < n / 2; ++k) {
    if (pb.y(k) <= 0.0) continue;
    const double r = -(ly(k) - std::log(a0) + rd0 * pb.t(k));
    num += r * std::sqrt(pb.t(k));
    den += pb.t(k);
  }
  double s0 = den > 0.0 ? std::max(0.0, num / den) : 0.0;
  if (!std::isfinite(s0)) s0 = 0.0;
  if (!std::isfinite(rd0)) rd0 = 0.0;
  (void)c_late;
  VecR start(3);
  start << a0, s0, rd0;

  // Bounds s >= 0, R_d >= 0 handled by enumerating active sets.
  LmResult best;
  best.rss = std::numeric_limits<double>::infinity();
  for (const auto& fr : std::vector<std::vector<int>>{{0, 1, 2}, {0, 2}, {0, 1}, {0}}) {
    VecR st = start;
    for (int k : {1, 2})
      if (std::find(fr.begin(), fr.end(), k) == fr.end()) st(k) = 0.0;
    const LmResult r = solve(pb, st, fr, tol);
    if (r.p(1) < 0.0 || r.p(2) < 0.0 || !std::isfinite(r.rss)) continue;
    if (r.rss < best.rss * (1 - 1e-12)) best = r;
  }
  DecayFit f;
  if (!std::isfinite(best.rss)) {
    f.note = "no feasible fit";
    return f;
  }
  f.amplitude = best.p(0);
  f.rp = best.p(1) * best.p(1);
  f.rd = best.p(2);
  f.residual_norm = std::sqrt(best.rss);
  f.converged = best.converged;
  f.iterations = best.iterations;
  if (!f.converged) f.note = "iteration cap reached";
  return f;
}

namespace {

// Parameters: A, x0, G, b0, b1 in scaled units u = (x - xm) / xs.
struct LorentzProblem final : Problem {
  VecR u, y;
  int n_params() const override { return 5; }
  int n_values() const override { return static_cast<int>(u.size()); }
  void residual(const VecR& p, VecR& r) const override {
    const Eigen::ArrayXd z = (u.array() - p(1)) / p(2);
    r = p(0) / (1.0 + z * z) + p(3) + p(4) * u.array() - y.array();
  }
  void jacobian(const VecR& p, MatR& j) const override {
    const Eigen::ArrayXd z = (u.array() - p(1)) / p(2);
    const Eigen::ArrayXd l = 1.0 / (1.0 + z * z);
    j.col(0) = l;
    j.col(1) = p(0) * l * l * 2.0 * z / p(2);
    j.col(2) = p(0) * l * l * 2.0 * z * z / p(2);
    j.col(3).setOnes();
    j.col(4) = u;
  }
};

}  // namespace

double ResonanceFit::value(double x) const {
  const double z = (x - center_hz) / width_hz;
  return amplitude / (1.0 + z * z) + background0 + background1 * (x - center_hz);
}

ResonanceFit fit_lorentzian_sweep(const std::vector<double>& x, const std::vector<double>& y, const FitTolerances& tol) {
  if (x.size() != y.size()) throw DomainError("fit_lorentzian_sweep: size mismatch");
  if (x.size() < 10) throw DomainError("fit_lorentzian_sweep: need at least 10 points");
  const Index n = static_cast<Index>(x.size());
  const VecR xv = Eigen::Map<const VecR>(x.data(), n), yv = Eigen::Map<const VecR>(y.data(), n);
  const double xm = 0.5 * (xv.maxCoeff() + xv.minCoeff());
  const double xs = 0.5 * (xv.maxCoeff() - xv.minCoeff());
  if (!(xs > 0.0)) throw DomainError("fit_lorentzian_sweep: degenerate grid");
  LorentzProblem pb;
  pb.u = (xv.array() - xm) / xs;
  pb.y = yv;

  // Background from the outer fifths, peak from the largest excess.
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return pb.u(a) < pb.u(b); });
  VecR us(n), ys(n);
  for (Index k = 0; k < n; ++k) { us(k) = pb.u(order[k]); ys(k) = pb.y(order[k]); }
  const Index edge = std::max<Index>(2, n / 5);
  VecR ue(2 * edge), ye(2 * edge);
  ue << us.head(edge), us.tail(edge);
  ye << ys.head(edge), ys.tail(edge);
  const auto [b0, b1] = line_fit(ue, ye, 0, 2 * edge);
  const VecR excess = ys.array() - b0 - b1 * us.array();
  Index kmax = 0;
  excess.maxCoeff(&kmax);
  const double a0 = excess(kmax);
  Index above = 0;
  for (Index k = 0; k < n; ++k) above += excess(k) > 0.5 * a0;
  const double spacing = 2.0 / static_cast<double>(n - 1);
  const double g0 = std::max(spacing, 0.5 * static_cast<double>(above) * spacing);
  VecR start(5);
  start << a0, us(kmax), g0, b0, b1;

  LmResult peak = solve(pb, start, {0, 1, 2, 3, 4}, tol);
  peak.p(2) = std::abs(peak.p(2));

  ResonanceFit f;
  f.converged = peak.converged;
  const double scale = std::max(yv.cwiseAbs().maxCoeff(), 1e-300);
  bool ok = peak.p(0) > 0.0 && std::isfinite(peak.rss) && peak.p(2) > 0.0;
  if (ok) {
    MatR j(n, 5);
    pb.jacobian(peak.p, j);
    const double s2 = peak.rss / static_cast<double>(std::max<Index>(1, n - 5));
    const MatR cov = (j.transpose() * j).ldlt().solve(MatR::Identity(5, 5)) * s2;
    f.amplitude_sigma = std::sqrt(std::max(0.0, cov(0, 0)));
    f.amplitude = peak.p(0);
    f.center_hz = xm + xs * peak.p(1);
    f.width_hz = xs * peak.p(2);
    f.background1 = peak.p(4) / xs;
    f.background0 = peak.p(3) + peak.p(4) * peak.p(1);
    f.residual_norm = std::sqrt(peak.rss);
    f.detected = f.amplitude > 2.0 * f.amplitude_sigma && f.amplitude > 1e-9 * scale &&
                 f.center_hz >= xv.minCoeff() && f.center_hz <= xv.maxCoeff();
  }
  if (!ok) {
    // Background-only description.
    const auto [c0, c1] = line_fit(pb.u, pb.y, 0, n);
    f.amplitude = 0.0;
    f.width_hz = xs;
    f.center_hz = xm;
    f.background0 = c0;
    f.background1 = c1 / xs;
    f.residual_norm = std::sqrt((pb.y.array() - c0 - c1 * pb.u.array()).square().sum());
    f.detected = false;
  }
  return f;
}

ResonanceFit fit_lorentzian_window(const std::vector<double>& x, const std::vector<double>& y, double centre,
                                   double halfwidth, const FitTolerances& tol) {
  std::vector<double> xw, yw;
  for (std::size_t k = 0; k < x.size(); ++k)
    if (std::abs(x[k] - centre) <= halfwidth) {
      xw.push_back(x[k]);
      yw.push_back(y[k]);
    }
  return fit_lorentzian_sweep(xw, yw, tol);
}

ScalingFit scaling_check(const std::vector<double>& drive_hz, const std::vector<double>& amplitude) {
  if (drive_hz.size() != amplitude.size()) throw DomainError("scaling_check: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < drive_hz.size(); ++k) {
    if (amplitude[k] > 0.0 && drive_hz[k] > 0.0) {
      lx.push_back(std::log(drive_hz[k]));
      ly.push_back(std::log(amplitude[k]));
    } else {
      warn("scaling_check: dropping non-positive point");
    }
  }
  if (lx.size() < 3) throw DomainError("scaling_check: need at least 3 positive points");
  const Index n = static_cast<Index>(lx.size());
  const VecR xv = Eigen::Map<const VecR>(lx.data(), n), yv = Eigen::Map<const VecR>(ly.data(), n);
  const auto [a, b] = line_fit(xv, yv, 0, n);
  const double resid = (yv.array() - a - b * xv.array()).square().sum();
  const double sxx = (xv.array() - xv.mean()).square().sum();
  const double se = std::sqrt(resid / static_cast<double>(n - 2) / sxx);
  const boost::math::students_t dist(static_cast<double>(n - 2));
  const double q = boost::math::quantile(boost::math::complement(dist, 0.025));
  ScalingFit s;
  s.exponent = b;
  s.ci_low = b - q * se;
  s.ci_high = b + q * se;
  s.prefactor = std::exp(a);
  s.used = lx.size();
  return s;
}

}  // namespace floq
