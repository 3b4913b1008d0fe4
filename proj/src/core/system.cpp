#include "core/system.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

namespace lambdasim {

// Zero rates are admitted so the documented degenerate limits (two-level
// reduction, vanishing branching) stay expressible.
void AtomParams::validate() const {
  if (gamma_sp < 0.0 || !std::isfinite(gamma_sp))
    throw DomainError("AtomParams: gamma_sp must be >= 0");
  if (gamma_dp < 0.0 || !std::isfinite(gamma_dp))
    throw DomainError("AtomParams: gamma_dp must be >= 0");
  if (omega_sp < 0.0 || !std::isfinite(omega_sp))
    throw DomainError("AtomParams: omega_sp must be >= 0");
}

void LaserParams::validate() const {
  if (rabi < 0.0 || !std::isfinite(rabi))
    throw DomainError("LaserParams: rabi must be >= 0");
  if (linewidth < 0.0 || !std::isfinite(linewidth))
    throw DomainError("LaserParams: linewidth must be >= 0");
  if (!std::isfinite(detuning))
    throw DomainError("LaserParams: detuning must be finite");
}

void SystemParams::validate() const {
  atom.validate();
  doppler.validate();
  repump.validate();
}

DensityMatrix DensityMatrix::pure(State s) {
  DensityMatrix rho;
  rho.m(index_of(s), index_of(s)) = 1.0;
  return rho;
}

DensityMatrix DensityMatrix::ground_mixture() {
  DensityMatrix rho;
  rho.m(0, 0) = 0.5;
  rho.m(2, 2) = 0.5;
  return rho;
}

double DensityMatrix::hermiticity_defect() const {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::trace_defect() const { return std::abs(m.trace() - 1.0); }

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix3cd> es(0.5 * (m + m.adjoint()));
  return es.eigenvalues().minCoeff();
}

bool DensityMatrix::is_physical(double herm_tol, double trace_tol,
                                double eig_tol) const {
  return hermiticity_defect() <= herm_tol && trace_defect() <= trace_tol &&
         min_eigenvalue() >= eig_tol;
}

void DensityMatrix::require_physical() const {
  if (!is_physical())
    throw PreconditionError("DensityMatrix: not Hermitian/unit-trace/PSD");
}

Vector9cd vectorize(const Matrix3cd& rho) {
  return Eigen::Map<const Vector9cd>(rho.data());  // column-major
}

Matrix3cd unvectorize(const Vector9cd& v) {
  return Eigen::Map<const Matrix3cd>(v.data());
}

Matrix3cd build_hamiltonian(const SystemParams& params) {
  params.validate();
  constexpr int S = 0, P = 1, D = 2;
  Matrix3cd h = Matrix3cd::Zero();
  h(S, S) = params.doppler.detuning;
  h(D, D) = params.repump.detuning;
  h(S, P) = h(P, S) = 0.5 * params.doppler.rabi;
  h(D, P) = h(P, D) = 0.5 * params.repump.rabi;
  return h;
}

std::array<Matrix3cd, 4> collapse_operators(const SystemParams& params) {
  constexpr int S = 0, P = 1, D = 2;
  std::array<Matrix3cd, 4> ops;
  ops.fill(Matrix3cd::Zero());
  ops[0](S, P) = std::sqrt(params.atom.gamma_sp);
  ops[1](D, P) = std::sqrt(params.atom.gamma_dp);
  ops[2](S, S) = std::sqrt(params.doppler.linewidth);
  ops[3](D, D) = std::sqrt(params.repump.linewidth);
  return ops;
}

Liouvillian build_liouvillian(const SystemParams& params) {
  const Matrix3cd h = build_hamiltonian(params);
  const Matrix3cd id = Matrix3cd::Identity();
  const Complex i_unit(0.0, 1.0);

  Liouvillian L;
  L.m = -i_unit * (Eigen::kroneckerProduct(id, h) -
                   Eigen::kroneckerProduct(h.transpose(), id));
  for (const Matrix3cd& c : collapse_operators(params)) {
    const Matrix3cd cdc = c.adjoint() * c;
    L.m += Eigen::kroneckerProduct(c.conjugate(), c) -
           0.5 * (Eigen::kroneckerProduct(id, cdc) +
                  Eigen::kroneckerProduct(cdc.transpose(), id));
  }
  return L;
}

double branching_fraction(const AtomParams& atom) {
  atom.validate();
  if (!(atom.gamma_sp + atom.gamma_dp > 0.0))
    throw DomainError("branching_fraction: both decay rates are zero");
  return atom.gamma_sp / (atom.gamma_sp + atom.gamma_dp);
}

double saturation_parameter(double rabi, double detuning, double linewidth) {
  if (rabi < 0.0) throw DomainError("saturation_parameter: rabi must be >= 0");
  const double denom = 4.0 * detuning * detuning + linewidth * linewidth;
  if (denom <= 0.0)
    throw DomainError(
        "saturation_parameter: detuning and linewidth may not both be zero");
  return 2.0 * rabi * rabi / denom;
}

double two_level_excited_population(double s) {
  if (s < 0.0) throw DomainError("two_level_excited_population: s must be >= 0");
  return s / (2.0 * (1.0 + s));
}

double saturation_intensity(const AtomParams& atom) {
  if (atom.gamma_sp < 0.0 || atom.omega_sp < 0.0)
    throw DomainError("saturation_intensity: negative rate or frequency");
  const double gamma_si = atom.gamma_sp * 1e6;  // rad/us -> rad/s
  const double w = atom.omega_sp;               // rad/s
  const double isat_si = kHbarSi * gamma_si * w * w * w /
                         (12.0 * M_PI * kSpeedOfLightSi * kSpeedOfLightSi);
  return isat_si * 1e-6;  // W/m^2 -> uW/um^2
}

double s_from_intensity(double intensity, double i_sat) {
  if (i_sat <= 0.0) throw DomainError("s_from_intensity: I_sat must be > 0");
  if (intensity < 0.0) throw DomainError("s_from_intensity: I must be >= 0");
  return intensity / i_sat;
}

double rabi_from_intensity(double intensity, double i_sat, double gamma) {
  const double s0 = s_from_intensity(intensity, i_sat);
  return gamma * std::sqrt(0.5 * s0);
}

}  // namespace lambdasim
