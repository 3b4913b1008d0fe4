#pragma once

#include "analysis/histogram.hpp"
#include "common.hpp"

namespace lambdasim {

struct Estimate {
  double value = 0.0;
  double sigma = 0.0;
  bool degenerate = false;  // sigma vanished at a boundary (p = 0 or 1)
};

// p = n_sp / (n_sp + n_dp) with shot-noise uncertainty
// sqrt(p (1-p) / (n_sp + n_dp)).
Estimate estimate_branching(double n_sp, double n_dp);

// eta = detected / cycles, sigma = sqrt(detected) / cycles.
Estimate estimate_efficiency(double detected, double cycles);

struct SaturationFromTau {
  double rho_pp = 0.0;
  double rho_pp_sigma = 0.0;
  double s = 0.0;
  double s_sigma = 0.0;
};

// Inverts tau^-1 = rho_PP * gamma_dp and rho_PP = s / (2 (1 + s)).
// Throws DomainError when the implied rho_PP reaches 1/2 (no two-level
// steady state exceeds it).
SaturationFromTau s_from_tau(double tau, double gamma_dp,
                             double tau_sigma = 0.0);

struct PoissonGof {
  double mean = 0.0;
  double dispersion = 0.0;  // variance / mean
  double chi2 = 0.0;
  int dof = 0;
  double p_value = 0.0;
  std::size_t n_samples = 0;
};

// Chi-square comparison of the per-bin count-frequency distribution against
// a Poisson law of the empirical mean. The histogram must cover a stationary
// stretch (no envelope transitions) and at least 100 bins.
PoissonGof poisson_gof(const Histogram& hist);

}  // namespace lambdasim
