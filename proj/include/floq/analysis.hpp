#pragma once

#include <limits>
#include <string>
#include <vector>

#include "floq/common.hpp"

namespace floq {

struct FitTolerances {
  double gradient = 1e-10;
  int max_iterations = 500;
  // Decay residuals are divided by max(|y|, relative_floor * max|y|), which
  // matches multiplicative noise. 0 gives plain least squares; inf gives
  // uniform weights too.
  double relative_floor = 1e-6;

  // Uniform weights, for noise-free model trajectories.
  static FitTolerances unweighted() {
    FitTolerances t;
    t.relative_floor = std::numeric_limits<double>::infinity();
    return t;
  }
};

// A exp(-sqrt(R_p t)) exp(-R_d t)
struct DecayFit {
  double rp = 0.0;
  double rd = 0.0;
  double amplitude = 0.0;
  double residual_norm = 0.0;
  bool converged = false;
  int iterations = 0;
  std::string note;  // quality flag text, empty when clean

  double value(double t) const;
  // Rate 1/t_e where the fitted decay reaches 1/e of its amplitude.
  double effective_rate() const;
};

DecayFit fit_product_decay(const std::vector<double>& t, const std::vector<double>& y, const FitTolerances& tol = {});

struct ResonanceFit {
  double center_hz = 0.0;
  double width_hz = 0.0;      // half width at half maximum
  double amplitude = 0.0;     // peak height above background
  double amplitude_sigma = 0.0;
  double background0 = 0.0;   // background at the centre
  double background1 = 0.0;   // slope per Hz
  double residual_norm = 0.0;
  bool converged = false;
  bool detected = false;      // amplitude significantly above zero

  double value(double x) const;
};

ResonanceFit fit_lorentzian_sweep(const std::vector<double>& x, const std::vector<double>& y,
                                  const FitTolerances& tol = {});

struct ScalingFit {
  double exponent = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double prefactor = 0.0;
  std::size_t used = 0;
};

// log-log regression of amplitude against drive frequency, 95% interval.
ScalingFit scaling_check(const std::vector<double>& drive_hz, const std::vector<double>& amplitude);

}  // namespace floq

namespace floq {

// Fit restricted to |x - centre| <= halfwidth.
ResonanceFit fit_lorentzian_window(const std::vector<double>& x, const std::vector<double>& y, double centre,
                                   double halfwidth, const FitTolerances& tol = {});

}  // namespace floq
