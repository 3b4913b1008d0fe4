#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "common.hpp"
#include "core/system.hpp"

namespace lambdasim {

// Piecewise-constant generator: generators[k] acts on
// [breakpoints[k], breakpoints[k+1]).  Integration steps never straddle a
// breakpoint.
struct GeneratorSchedule {
  std::vector<double> breakpoints;   // size n+1, strictly increasing
  std::vector<Matrix9cd> generators; // size n

  static GeneratorSchedule constant(const Liouvillian& L, double t0, double t1);

  double start() const { return breakpoints.front(); }
  double end() const { return breakpoints.back(); }
  void validate() const;
};

// Solution of the master equation sampled on a time grid.
struct Trajectory {
  std::vector<double> times;            // us, strictly increasing
  std::vector<Matrix3cd> states;

  double population(std::size_t i, State s) const {
    return states[i](index_of(s), index_of(s)).real();
  }
  // Linear interpolation of the excited-state population; throws DomainError
  // outside the stored grid.
  double excited_population(double t) const;
  double start() const { return times.front(); }
  double end() const { return times.back(); }
};

struct IntegratorOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  double min_step = 1e-9;  // us; below this a StiffnessError is thrown
};

// Adaptive Dormand-Prince 5(4) with PI step control. The trajectory is
// sampled exactly at the points of t_grid; the schedule must cover it.
Trajectory evolve(const DensityMatrix& rho0, const GeneratorSchedule& schedule,
                  std::span<const double> t_grid,
                  const IntegratorOptions& opts = {});

// Uniform grid helper: n_points samples covering [t0, t1].
std::vector<double> uniform_grid(double t0, double t1, std::size_t n_points);

// Unique unit-trace kernel state of L, found by replacing one row of the
// generator with the trace constraint. Throws NonUniqueSteadyStateError when
// the kernel holds more than one state.
DensityMatrix steady_state(const Liouvillian& L);

// exp(L t) applied to vec(rho0) via dense matrix exponential
// (scaling-and-squaring Pade). Serves as the independent reference for
// evolve() on constant generators.
DensityMatrix expm_propagate(const Liouvillian& L, double t,
                             const DensityMatrix& rho0);

// Expected number of emitted S-P photons, trapezoidal integral of
// gamma_sp * rho_PP over the trajectory grid.
double photon_yield(const Trajectory& traj, double gamma_sp);

// CSV: t_us, the three populations, and Re/Im of the three coherences.
void write_trajectory_csv(const Trajectory& traj, std::ostream& os);

}  // namespace lambdasim
