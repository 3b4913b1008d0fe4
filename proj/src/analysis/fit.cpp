#include "analysis/fit.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace lambdasim {

double FitResult::tau_sigma() const {
  const double v = covariance(1, 1);
  return v > 0.0 ? std::sqrt(v) : 0.0;
}

namespace {

struct FitData {
  std::vector<double> t;  // relative to the window start
  std::vector<double> y;
  std::vector<double> w;  // 1/sigma
};

FitData collect(const CorrectedSeries& series,
                std::pair<double, double> window) {
  FitData d;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double c = series.bin_center(k);
    if (c < window.first || c >= window.second) continue;
    d.t.push_back(c - window.first);
    d.y.push_back(series.value[k]);
    double s = series.sigma[k];
    if (!(s > 0.0)) s = 1.0;
    d.w.push_back(1.0 / s);
  }
  return d;
}

}  // namespace

FitResult fit_exponential_tail(const CorrectedSeries& series,
                               std::pair<double, double> window) {
  const FitData d = collect(series, window);
  const std::size_t n = d.t.size();
  if (n < 10)
    throw PreconditionError("fit_exponential_tail: window holds fewer than 10 bins");

  FitResult fit;
  fit.fit_window = window;

  // --- seeds ---
  const std::size_t tail = std::max<std::size_t>(1, n / 10);
  double c0 = 0.0;
  for (std::size_t k = n - tail; k < n; ++k) c0 += d.y[k];
  c0 /= static_cast<double>(tail);

  const std::size_t half = std::max<std::size_t>(2, n / 2);
  double tau0 = 0.0, n00 = 0.0;
  std::size_t positive = 0;
  {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < half; ++k) {
      const double z = d.y[k] - c0;
      if (z <= 0.0) continue;
      ++positive;
      const double ly = std::log(z);
      sx += d.t[k];
      sy += ly;
      sxx += d.t[k] * d.t[k];
      sxy += d.t[k] * ly;
    }
    const double span = window.second - window.first;
    if (positive * 2 < half || positive < 2) {
      fit.init_fallback = true;
      tau0 = span / 3.0;
      n00 = std::max(d.y.front() - c0, 10.0 / static_cast<double>(
                                                  std::max<std::uint64_t>(
                                                      series.shot_count, 1)));
    } else {
      const double np = static_cast<double>(positive);
      const double denom = np * sxx - sx * sx;
      const double slope = denom != 0.0 ? (np * sxy - sx * sy) / denom : 0.0;
      const double intercept = (sy - slope * sx) / np;
      if (slope < 0.0) {
        tau0 = -1.0 / slope;
        n00 = std::exp(intercept);
      } else {
        fit.init_fallback = true;
        tau0 = span / 3.0;
        n00 = std::max(d.y.front() - c0, 1e-12);
      }
    }
  }

  // --- Levenberg-Marquardt ---
  Eigen::Vector3d p(n00, tau0, c0);
  auto cost_of = [&](const Eigen::Vector3d& q) {
    double cost = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double r = (d.y[k] - (q[0] * std::exp(-d.t[k] / q[1]) + q[2])) * d.w[k];
      cost += r * r;
    }
    return cost;
  };

  double lambda = 1e-3;
  double cost = cost_of(p);
  Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
  for (fit.iterations = 1; fit.iterations <= 200; ++fit.iterations) {
    jtj.setZero();
    Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
    for (std::size_t k = 0; k < n; ++k) {
      const double e = std::exp(-d.t[k] / p[1]);
      const double r = (d.y[k] - (p[0] * e + p[2])) * d.w[k];
      Eigen::Vector3d j(e * d.w[k],
                        p[0] * e * d.t[k] / (p[1] * p[1]) * d.w[k],
                        d.w[k]);
      jtj.noalias() += j * j.transpose();
      jtr.noalias() += j * r;
    }

    bool accepted = false;
    for (int damp = 0; damp < 40; ++damp) {
      Eigen::Matrix3d a = jtj;
      for (int i = 0; i < 3; ++i) a(i, i) *= 1.0 + lambda;
      const Eigen::Vector3d step = a.ldlt().solve(jtr);
      const Eigen::Vector3d trial = p + step;
      if (trial[1] > 0.0) {
        const double trial_cost = cost_of(trial);
        if (trial_cost <= cost) {
          const double rel =
              (step.cwiseAbs().array() / (p.cwiseAbs().array() + 1e-30))
                  .maxCoeff();
          const double drop = cost - trial_cost;
          p = trial;
          cost = trial_cost;
          lambda = std::max(lambda * 0.1, 1e-12);
          accepted = true;
          // Converged when the parameters stop moving or the cost has
          // flattened out.
          if (rel < 1e-8 || drop <= 1e-12 * std::max(cost, 1e-300)) {
            fit.n0 = p[0];
            fit.tau = p[1];
            fit.c = p[2];
            fit.covariance = jtj.inverse();
            fit.reduced_chi2 =
                n > 3 ? cost / static_cast<double>(n - 3) : 0.0;
            return fit;
          }
          break;
        }
      }
      lambda *= 10.0;
      if (lambda > 1e14)
        throw FitError("fit_exponential_tail: damping overflow");
    }
    if (!accepted)
      throw FitError("fit_exponential_tail: no acceptable step found");
  }
  throw FitError("fit_exponential_tail: no convergence in 200 iterations");
}

std::pair<double, double> default_fit_window(const CorrectedSeries& series) {
  if (series.size() < 10)
    throw PreconditionError("default_fit_window: series too short");

  std::size_t peak_idx = 0;
  for (std::size_t k = 1; k < series.size(); ++k)
    if (series.value[k] > series.value[peak_idx]) peak_idx = k;
  const double peak = series.value[peak_idx];

  std::size_t start = peak_idx + 1;
  while (start < series.size() && series.value[start] >= 0.6 * peak) ++start;
  if (start >= series.size()) start = peak_idx + 1;

  std::size_t end = series.size();
  while (end > start &&
         !(series.value[end - 1] > 3.0 * series.sigma[end - 1]))
    --end;
  if (end <= start + 10) end = series.size();

  return {series.t0 + series.bin_width * static_cast<double>(start),
          series.t0 + series.bin_width * static_cast<double>(end)};
}

}  // namespace lambdasim
