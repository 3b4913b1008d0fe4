#pragma once

#include <random>

#include "core/system.hpp"

namespace lambdasim::testing {

// Random physical parameter set: rates and couplings of the magnitudes the
// default constants have (rad/us).
inline SystemParams random_params(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> rate(1.0, 150.0);
  std::uniform_real_distribution<double> rabi(0.0, 250.0);
  std::uniform_real_distribution<double> det(-300.0, 300.0);
  std::uniform_real_distribution<double> lw(0.0, 2.0);
  SystemParams p;
  p.atom.gamma_sp = rate(gen);
  p.atom.gamma_dp = rate(gen);
  p.atom.omega_sp = 4.745e15;
  p.doppler = {rabi(gen), det(gen), lw(gen)};
  p.repump = {rabi(gen), det(gen), lw(gen)};
  return p;
}

// Random density matrix: PSD with unit trace.
inline DensityMatrix random_density(std::mt19937_64& gen) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix3cd a;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a(i, j) = Complex(n(gen), n(gen));
  Matrix3cd rho = a * a.adjoint();
  rho /= rho.trace();
  DensityMatrix d;
  d.m = rho;
  return d;
}

// Master-equation right-hand side evaluated term by term, written out
// independently of the library's superoperator assembly.
inline Matrix3cd master_equation_rhs(const SystemParams& p,
                                     const Matrix3cd& rho) {
  Matrix3cd h = Matrix3cd::Zero();
  h(0, 0) = p.doppler.detuning;
  h(2, 2) = p.repump.detuning;
  h(0, 1) = h(1, 0) = 0.5 * p.doppler.rabi;
  h(2, 1) = h(1, 2) = 0.5 * p.repump.rabi;

  const Complex i_unit(0.0, 1.0);
  Matrix3cd rhs = -i_unit * (h * rho - rho * h);

  auto ket_bra = [](int i, int j) {
    Matrix3cd m = Matrix3cd::Zero();
    m(i, j) = 1.0;
    return m;
  };
  const Matrix3cd cs[] = {std::sqrt(p.atom.gamma_sp) * ket_bra(0, 1),
                          std::sqrt(p.atom.gamma_dp) * ket_bra(2, 1),
                          std::sqrt(p.doppler.linewidth) * ket_bra(0, 0),
                          std::sqrt(p.repump.linewidth) * ket_bra(2, 2)};
  for (const Matrix3cd& c : cs) {
    rhs += c * rho * c.adjoint() -
           0.5 * (c.adjoint() * c * rho + rho * c.adjoint() * c);
  }
  return rhs;
}

}  // namespace lambdasim::testing
