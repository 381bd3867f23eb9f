#pragma once

#include <complex>
#include <numbers>

namespace wgm {

using cplx = std::complex<double>;

/// SI physical constants (CODATA 2018 exact values where defined).
namespace si {
inline constexpr double c0 = 299792458.0;                  // m/s
inline constexpr double mu0 = 1.25663706212e-6;            // N/A^2
inline constexpr double eps0 = 1.0 / (mu0 * c0 * c0);       // F/m
inline constexpr double z0 = mu0 * c0;                      // Ohm
inline constexpr double hbar = 1.054571817e-34;            // J s
inline constexpr double pi = std::numbers::pi;
}  // namespace si

inline constexpr cplx I{0.0, 1.0};

/// Vacuum wavelength in micrometres -> angular frequency in rad/s.
inline constexpr double omega_from_lambda_um(double lambda_um) {
  return 2.0 * si::pi * si::c0 / (lambda_um * 1e-6);
}

inline constexpr double lambda_um_from_omega(double omega) {
  return 2.0 * si::pi * si::c0 / omega * 1e6;
}

}  // namespace wgm
