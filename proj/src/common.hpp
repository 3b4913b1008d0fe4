#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

// Unit conventions used throughout the library:
//   time            microseconds (us)
//   rates/frequencies   angular, rad/us  (config files take ordinary MHz,
//                       the loader multiplies by 2*pi exactly once)
//   optical intensity   uW/um^2
// Basis order of the three-level system is (S, P, D); density matrices are
// vectorized column-major, vec(rho)[3j+i] = rho(i,j).

namespace lambdasim {

using Complex = std::complex<double>;
using Matrix3cd = Eigen::Matrix3cd;
using Matrix9cd = Eigen::Matrix<Complex, 9, 9>;
using Vector9cd = Eigen::Matrix<Complex, 9, 1>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// SI constants, used only for the saturation-intensity conversion.
inline constexpr double kHbarSi = 1.054571817e-34;  // J s
inline constexpr double kSpeedOfLightSi = 2.99792458e8;  // m/s

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid argument values (negative rates, bad ranges, degenerate inputs).
struct DomainError : Error {
  using Error::Error;
};

// A documented precondition of an operation does not hold.
struct PreconditionError : Error {
  using Error::Error;
};

// Adaptive integration drove the step size below the permitted minimum.
struct StiffnessError : Error {
  using Error::Error;
};

// The generator kernel holds more than one unit-trace state.
struct NonUniqueSteadyStateError : Error {
  using Error::Error;
};

// Nonlinear fit failed to converge.
struct FitError : Error {
  using Error::Error;
};

// Not enough samples for a statistical procedure.
struct InsufficientDataError : Error {
  using Error::Error;
};

// Configuration or input-file problems; maps to CLI exit code 1.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace lambdasim
