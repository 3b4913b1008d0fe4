#pragma once

#include <utility>

#include "analysis/histogram.hpp"
#include "common.hpp"

namespace lambdasim {

// Weighted least-squares fit of n0 * exp(-(t - t_start)/tau) + c, where
// t_start is the left edge of the fit window.
struct FitResult {
  double n0 = 0.0;
  double tau = 0.0;  // us
  double c = 0.0;
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();  // (n0, tau, c)
  std::pair<double, double> fit_window{0.0, 0.0};
  double reduced_chi2 = 0.0;
  int iterations = 0;
  bool init_fallback = false;  // log-linear seeding found too few positive bins

  double tau_sigma() const;
};

// Damped Gauss-Newton (Levenberg-Marquardt) with analytic Jacobian.
// Seeds: c from the last tenth of the window, tau from a log-linear
// regression over the first half, n0 by back-extrapolation. Converges when
// the relative parameter change drops below 1e-8; throws FitError after 200
// iterations.
FitResult fit_exponential_tail(const CorrectedSeries& series,
                               std::pair<double, double> window);

// Automatic window: starts where the series first falls below 60% of its
// peak (after the peak), ends at the last bin above three times its own
// uncertainty.
std::pair<double, double> default_fit_window(const CorrectedSeries& series);

}  // namespace lambdasim
