#pragma once

#include <array>

#include "common.hpp"

namespace lambdasim {

// Basis indices of the lambda system.
enum class State : int { S = 0, P = 1, D = 2 };

inline constexpr int index_of(State s) { return static_cast<int>(s); }

// Spontaneous-emission rates of the excited level and the transition
// frequency of the S-P line (the latter is only needed to convert optical
// intensities to saturation parameters).
struct AtomParams {
  double gamma_sp = 0.0;  // P -> S decay rate, rad/us
  double gamma_dp = 0.0;  // P -> D decay rate, rad/us
  double omega_sp = 0.0;  // S-P transition angular frequency, rad/s

  void validate() const;
};

// One driving laser in the rotating frame.
struct LaserParams {
  double rabi = 0.0;       // angular Rabi frequency, rad/us, >= 0
  double detuning = 0.0;   // angular detuning, rad/us, signed
  double linewidth = 0.0;  // laser linewidth, rad/us, >= 0

  void validate() const;
};

// Everything entering the rotating-frame Hamiltonian and the dissipator.
struct SystemParams {
  AtomParams atom;
  LaserParams doppler;  // drives S-P
  LaserParams repump;   // drives D-P

  void validate() const;
};

// 3x3 density matrix over (S, P, D).
struct DensityMatrix {
  Matrix3cd m = Matrix3cd::Zero();

  static DensityMatrix pure(State s);
  // diag(1/2, 0, 1/2); the natural pre-pump state of an ion that ended the
  // previous cycle in either ground state.
  static DensityMatrix ground_mixture();

  double population(State s) const { return m(index_of(s), index_of(s)).real(); }

  double hermiticity_defect() const;   // max |m - m^dagger|
  double trace_defect() const;         // |tr m - 1|
  double min_eigenvalue() const;
  bool is_physical(double herm_tol = 1e-12, double trace_tol = 1e-9,
                   double eig_tol = -1e-10) const;
  void require_physical() const;       // throws PreconditionError
};

// Dense generator of the open-system dynamics acting on vec(rho).
struct Liouvillian {
  Matrix9cd m = Matrix9cd::Zero();
};

Vector9cd vectorize(const Matrix3cd& rho);
Matrix3cd unvectorize(const Vector9cd& v);

// H/hbar in the rotating frame: detunings on the ground states, Rabi
// couplings on the two legs, zero at the excited level. Hermitian by
// construction.
Matrix3cd build_hamiltonian(const SystemParams& params);

// The four collapse operators: two spontaneous-emission channels out of P
// and one pure-dephasing channel per laser linewidth.
std::array<Matrix3cd, 4> collapse_operators(const SystemParams& params);

// L such that d vec(rho)/dt = L vec(rho), with the commutator and the
// Lindblad dissipator assembled as a dense 9x9 matrix.
Liouvillian build_liouvillian(const SystemParams& params);

// gamma_sp / (gamma_sp + gamma_dp), the probability that P decays to S.
double branching_fraction(const AtomParams& atom);

// s = 2 Omega^2 / (4 Delta^2 + Gamma^2). Throws DomainError when both the
// detuning and the linewidth vanish.
double saturation_parameter(double rabi, double detuning, double linewidth);

// Steady-state excited population of a driven two-level system,
// s / (2 (1 + s)).
double two_level_excited_population(double s);

// I_sat = hbar Gamma omega^3 / (12 pi c^2), returned in uW/um^2.
double saturation_intensity(const AtomParams& atom);

// s = I / I_sat.
double s_from_intensity(double intensity, double i_sat);

// Rabi frequency (rad/us) of a transition of linewidth gamma driven at
// intensity I: Omega = gamma * sqrt(I / I_sat / 2). Independent of detuning.
double rabi_from_intensity(double intensity, double i_sat, double gamma);

}  // namespace lambdasim
