#include "analysis/estimators.hpp"

#include <cmath>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

namespace lambdasim {

Estimate estimate_branching(double n_sp, double n_dp) {
  const double total = n_sp + n_dp;
  if (!(total > 0.0))
    throw DomainError("estimate_branching: total counts must be positive");
  Estimate e;
  e.value = n_sp / total;
  const double var = e.value * (1.0 - e.value) / total;
  e.sigma = var > 0.0 ? std::sqrt(var) : 0.0;
  e.degenerate = !(e.sigma > 0.0);
  return e;
}

Estimate estimate_efficiency(double detected, double cycles) {
  if (!(cycles > 0.0))
    throw DomainError("estimate_efficiency: cycles must be positive");
  Estimate e;
  e.value = detected / cycles;
  e.sigma = detected > 0.0 ? std::sqrt(detected) / cycles : 0.0;
  e.degenerate = !(e.sigma > 0.0);
  return e;
}

SaturationFromTau s_from_tau(double tau, double gamma_dp, double tau_sigma) {
  if (!(tau > 0.0)) throw DomainError("s_from_tau: tau must be > 0");
  if (!(gamma_dp > 0.0)) throw DomainError("s_from_tau: gamma_dp must be > 0");
  SaturationFromTau r;
  r.rho_pp = 1.0 / (tau * gamma_dp);
  r.rho_pp_sigma = r.rho_pp * (tau_sigma / tau);
  if (r.rho_pp >= 0.5)
    throw DomainError(
        "s_from_tau: implied rho_PP >= 1/2 is outside the two-level regime");
  const double denom = 1.0 - 2.0 * r.rho_pp;
  r.s = 2.0 * r.rho_pp / denom;
  r.s_sigma = 2.0 * r.rho_pp_sigma / (denom * denom);
  return r;
}

PoissonGof poisson_gof(const Histogram& hist) {
  const std::size_t n = hist.size();
  if (n < 100)
    throw InsufficientDataError("poisson_gof: need at least 100 bins");

  PoissonGof g;
  g.n_samples = n;
  double sum = 0.0;
  std::uint64_t k_max = 0;
  for (std::uint64_t c : hist.counts) {
    sum += static_cast<double>(c);
    k_max = std::max(k_max, c);
  }
  g.mean = sum / static_cast<double>(n);
  if (!(g.mean > 0.0))
    throw InsufficientDataError("poisson_gof: all bins are empty");
  double ss = 0.0;
  for (std::uint64_t c : hist.counts) {
    const double d = static_cast<double>(c) - g.mean;
    ss += d * d;
  }
  g.dispersion = ss / static_cast<double>(n - 1) / g.mean;

  // Frequency table 0..k_max plus an overflow cell for the upper tail.
  std::vector<double> observed(k_max + 2, 0.0);
  for (std::uint64_t c : hist.counts) observed[c] += 1.0;
  std::vector<double> expected(k_max + 2, 0.0);
  double cdf = 0.0;
  for (std::uint64_t k = 0; k <= k_max; ++k) {
    const double kd = static_cast<double>(k);
    const double pmf =
        std::exp(kd * std::log(g.mean) - g.mean - std::lgamma(kd + 1.0));
    expected[k] = pmf * static_cast<double>(n);
    cdf += pmf;
  }
  expected[k_max + 1] = std::max(0.0, 1.0 - cdf) * static_cast<double>(n);

  // Merge adjacent cells until each expectation reaches 5.
  std::vector<std::pair<double, double>> cells;  // (observed, expected)
  double obs_acc = 0.0, exp_acc = 0.0;
  for (std::size_t k = 0; k < expected.size(); ++k) {
    obs_acc += observed[k];
    exp_acc += expected[k];
    if (exp_acc >= 5.0) {
      cells.emplace_back(obs_acc, exp_acc);
      obs_acc = exp_acc = 0.0;
    }
  }
  if (exp_acc > 0.0 || obs_acc > 0.0) {
    if (!cells.empty()) {
      cells.back().first += obs_acc;
      cells.back().second += exp_acc;
    } else {
      cells.emplace_back(obs_acc, exp_acc);
    }
  }
  if (cells.size() < 3)
    throw InsufficientDataError("poisson_gof: too few distinct count values");

  for (const auto& [obs, exp] : cells) {
    const double d = obs - exp;
    g.chi2 += d * d / exp;
  }
  g.dof = static_cast<int>(cells.size()) - 2;  // mean estimated from the data
  g.p_value = boost::math::gamma_q(0.5 * g.dof, 0.5 * g.chi2);
  return g;
}

}  // namespace lambdasim
