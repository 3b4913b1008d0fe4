#include "integrate/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <unsupported/Eigen/MatrixFunctions>

namespace lambdasim {

GeneratorSchedule GeneratorSchedule::constant(const Liouvillian& L, double t0,
                                              double t1) {
  if (!(t1 > t0)) throw DomainError("GeneratorSchedule: empty interval");
  return {{t0, t1}, {L.m}};
}

void GeneratorSchedule::validate() const {
  if (generators.empty() || breakpoints.size() != generators.size() + 1)
    throw PreconditionError("GeneratorSchedule: inconsistent sizes");
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
    if (!(breakpoints[i] < breakpoints[i + 1]))
      throw PreconditionError("GeneratorSchedule: breakpoints not increasing");
}

double Trajectory::excited_population(double t) const {
  if (times.empty() || t < times.front() - 1e-12 || t > times.back() + 1e-12)
    throw DomainError("Trajectory: time outside stored grid");
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t hi = std::min<std::size_t>(
      times.size() - 1, static_cast<std::size_t>(it - times.begin()));
  if (hi == 0) return population(0, State::P);
  const std::size_t lo = hi - 1;
  const double span = times[hi] - times[lo];
  const double w = span > 0.0 ? (t - times[lo]) / span : 0.0;
  return (1.0 - w) * population(lo, State::P) + w * population(hi, State::P);
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187,
                 kA53 = 64448.0 / 6561, kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33,
                 kA63 = 46732.0 / 5247, kA64 = 49.0 / 176,
                 kA65 = -5103.0 / 18656;
constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192,
                 kB5 = -2187.0 / 6784, kB6 = 11.0 / 84;
// 5th-order minus embedded 4th-order weights (error estimator).
constexpr double kE1 = 71.0 / 57600, kE3 = -71.0 / 16695, kE4 = 71.0 / 1920,
                 kE5 = -17253.0 / 339200, kE6 = 22.0 / 525, kE7 = -1.0 / 40;

struct Stepper {
  const Matrix9cd* L = nullptr;
  Vector9cd k1, k2, k3, k4, k5, k6, k7;

  // One trial step from (t, y) of size h; returns the scaled error norm and
  // writes the 5th-order result into y_out. k1 must hold L*y on entry (FSAL).
  double step(const Vector9cd& y, double h, Vector9cd& y_out,
              const IntegratorOptions& opts) {
    const Matrix9cd& A = *L;
    k2 = A * (y + h * kA21 * k1);
    k3 = A * (y + h * (kA31 * k1 + kA32 * k2));
    k4 = A * (y + h * (kA41 * k1 + kA42 * k2 + kA43 * k3));
    k5 = A * (y + h * (kA51 * k1 + kA52 * k2 + kA53 * k3 + kA54 * k4));
    k6 = A * (y + h * (kA61 * k1 + kA62 * k2 + kA63 * k3 + kA64 * k4 +
                       kA65 * k5));
    y_out = y + h * (kB1 * k1 + kB3 * k3 + kB4 * k4 + kB5 * k5 + kB6 * k6);
    k7 = A * y_out;

    const Vector9cd err = h * (kE1 * k1 + kE3 * k3 + kE4 * k4 + kE5 * k5 +
                               kE6 * k6 + kE7 * k7);
    // Per-component control: the largest scaled error decides.
    double worst = 0.0;
    for (int i = 0; i < 9; ++i) {
      const double scale =
          opts.abs_tol +
          opts.rel_tol * std::max(std::abs(y[i]), std::abs(y_out[i]));
      worst = std::max(worst, std::abs(err[i]) / scale);
    }
    return worst;
  }
};

// Rounding noise in the matvec leaks out of the Hermitian subspace; project
// back so the defect cannot accumulate over long integrations.
void hermitize(Vector9cd& y) {
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      const Complex mean = 0.5 * (y[3 * j + i] + std::conj(y[3 * i + j]));
      y[3 * j + i] = mean;
      y[3 * i + j] = std::conj(mean);
    }
    y[4 * i] = Complex(y[4 * i].real(), 0.0);
  }
}

}  // namespace

Trajectory evolve(const DensityMatrix& rho0, const GeneratorSchedule& schedule,
                  std::span<const double> t_grid,
                  const IntegratorOptions& opts) {
  schedule.validate();
  rho0.require_physical();
  if (t_grid.size() < 1) throw PreconditionError("evolve: empty time grid");
  for (std::size_t i = 0; i + 1 < t_grid.size(); ++i)
    if (!(t_grid[i] < t_grid[i + 1]))
      throw PreconditionError("evolve: time grid not strictly increasing");
  if (t_grid.front() < schedule.start() - 1e-12 ||
      t_grid.back() > schedule.end() + 1e-12)
    throw PreconditionError("evolve: schedule does not cover the time grid");

  Trajectory traj;
  traj.times.reserve(t_grid.size());
  traj.states.reserve(t_grid.size());
  traj.times.push_back(t_grid[0]);
  traj.states.push_back(rho0.m);

  Vector9cd y = vectorize(rho0.m);
  double t = t_grid[0];
  std::size_t next_sample = 1;
  std::size_t seg = 0;
  while (seg + 1 < schedule.generators.size() &&
         t >= schedule.breakpoints[seg + 1] - 1e-15)
    ++seg;

  Stepper st;
  st.L = &schedule.generators[seg];
  st.k1 = (*st.L) * y;

  // Initial step guess from the generator magnitude.
  double gen_scale = schedule.generators[seg].cwiseAbs().rowwise().sum().maxCoeff();
  double h = gen_scale > 0.0 ? 0.1 / gen_scale : (t_grid.back() - t) * 0.1;
  h = std::max(h, opts.min_step);
  double err_prev = 1.0;

  while (next_sample < t_grid.size()) {
    const double seg_end = schedule.breakpoints[seg + 1];
    const double target = std::min(t_grid[next_sample], seg_end);

    if (t >= target - 1e-15) {
      if (target == seg_end && seg + 1 < schedule.generators.size() &&
          t_grid[next_sample] > seg_end - 1e-15) {
        ++seg;
        st.L = &schedule.generators[seg];
        st.k1 = (*st.L) * y;  // generator changed; refresh the FSAL stage
      }
      if (std::abs(t - t_grid[next_sample]) <= 1e-12) {
        traj.times.push_back(t_grid[next_sample]);
        traj.states.push_back(unvectorize(y));
        ++next_sample;
      }
      continue;
    }

    const bool clamped = (target - t) <= h;
    const double h_try = clamped ? target - t : h;
    Vector9cd y_new;
    const double err = st.step(y, h_try, y_new, opts);
    if (err <= 1.0) {
      t = clamped ? target : t + h_try;
      y = y_new;
      hermitize(y);
      st.k1 = (*st.L) * y;
      // PI controller (Hairer): grow/shrink from this and previous error.
      const double fac =
          0.9 * std::pow(std::max(err, 1e-10), -0.7 / 5.0) *
          std::pow(std::max(err_prev, 1e-10), 0.4 / 5.0);
      const double h_new = h_try * std::clamp(fac, 0.2, 5.0);
      // A step shortened only to land on a target must not shrink the
      // controller's memory of the feasible step size.
      h = clamped ? std::max(h, h_new) : h_new;
      err_prev = std::max(err, 1e-10);
    } else {
      h = h_try * std::max(0.2, 0.9 * std::pow(err, -1.0 / 5.0));
      if (h < opts.min_step)
        throw StiffnessError("evolve: step size underflow (stiffness)");
    }
  }
  return traj;
}

std::vector<double> uniform_grid(double t0, double t1, std::size_t n_points) {
  if (n_points < 2 || !(t1 > t0)) throw DomainError("uniform_grid: bad range");
  std::vector<double> g(n_points);
  const double dt = (t1 - t0) / static_cast<double>(n_points - 1);
  for (std::size_t i = 0; i < n_points; ++i)
    g[i] = t0 + dt * static_cast<double>(i);
  g.back() = t1;
  return g;
}

DensityMatrix steady_state(const Liouvillian& L) {
  // Kernel dimension from the singular spectrum.
  Eigen::JacobiSVD<Matrix9cd> svd(L.m);
  const auto& sv = svd.singularValues();
  const double scale = std::max(sv(0), 1.0);
  int nullity = 0;
  for (int i = 0; i < 9; ++i)
    if (sv(i) <= 1e-9 * scale) ++nullity;
  if (nullity == 0)
    throw NonUniqueSteadyStateError("steady_state: generator has no kernel");
  if (nullity > 1)
    throw NonUniqueSteadyStateError(
        "steady_state: kernel dimension > 1, steady state not unique");

  Matrix9cd A = L.m;
  Vector9cd b = Vector9cd::Zero();
  for (int j = 0; j < 9; ++j) A(0, j) = 0.0;
  A(0, 0) = A(0, 4) = A(0, 8) = 1.0;  // trace row
  b(0) = 1.0;

  Eigen::PartialPivLU<Matrix9cd> lu(A);
  Vector9cd x = lu.solve(b);
  x += lu.solve(b - A * x);  // one refinement pass tightens the residual

  DensityMatrix rho;
  const Matrix3cd raw = unvectorize(x);
  rho.m = 0.5 * (raw + raw.adjoint());

  const double residual = (L.m * vectorize(rho.m)).norm();
  if (residual > 1e-10)
    throw Error("steady_state: residual above tolerance");
  return rho;
}

DensityMatrix expm_propagate(const Liouvillian& L, double t,
                             const DensityMatrix& rho0) {
  if (t < 0.0) throw DomainError("expm_propagate: negative time");
  const Matrix9cd prop = (L.m * t).exp();
  DensityMatrix rho;
  rho.m = unvectorize(prop * vectorize(rho0.m));
  return rho;
}

double photon_yield(const Trajectory& traj, double gamma_sp) {
  if (traj.times.size() < 2)
    throw PreconditionError("photon_yield: trajectory too short");
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < traj.times.size(); ++i) {
    const double dt = traj.times[i + 1] - traj.times[i];
    acc += 0.5 * dt *
           (traj.population(i, State::P) + traj.population(i + 1, State::P));
  }
  return gamma_sp * acc;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
  os << "t_us,rho_SS,rho_PP,rho_DD,re_SP,im_SP,re_SD,im_SD,re_PD,im_PD\n";
  char line[352];
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const Matrix3cd& r = traj.states[i];
    std::snprintf(line, sizeof line,
                  "%.9g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                  traj.times[i], r(0, 0).real(), r(1, 1).real(), r(2, 2).real(),
                  r(0, 1).real(), r(0, 1).imag(), r(0, 2).real(),
                  r(0, 2).imag(), r(1, 2).real(), r(1, 2).imag());
    os << line;
  }
}

}  // namespace lambdasim
