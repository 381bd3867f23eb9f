#pragma once

#include <Eigen/Dense>

#include <json.hpp>

#include <string>
#include <vector>

#include "wgm/fdsolver.hpp"

namespace wgm {

using Vec3c = Eigen::Vector3cd;

/// Quadrature for transverse integrals.
///
/// yee_native pairs components that share a Yee node (Ex/Hy/Dx/By, Ey/Hx/Dy/Bx,
/// Ez/Dz, Hz/Bz); it is the inner product in which the discrete pencil is
/// Hermitian, so orthogonality and the xi_e / xi_m ratio hold to round-off.
/// cell_centered interpolates every component linearly to cell centres and
/// applies the midpoint rule; it carries the discretization error (O(h^2) in
/// smooth media, O(h) next to material steps) and is used for convergence
/// diagnostics.
enum class Quadrature { cell_centered, yee_native };

inline constexpr Quadrature kDefaultQuadrature = Quadrature::yee_native;

const char* to_string(Quadrature q);
Quadrature quadrature_from_string(const std::string& s);

/// X (.) Y = (XxYx + XyYy - XzYz) / 2.
cplx odot(const Vec3c& x, const Vec3c& y);

/// Mutation hook for `wgm validate --fault odot-sign`: flips the sign of the
/// z term in every (.) product so the identity checks can be seen to fail.
void set_odot_sign_fault(bool enabled);
bool odot_sign_fault();

/// int [E_m* x H_n + E_n x H_m*]_z over the window. Requires equal grids and
/// frequencies (ValidationError otherwise).
cplx energy_cross(const ModeProfile& m, const ModeProfile& n, Quadrature q = kDefaultQuadrature);

/// int [E_m (.) D_n* + E_n* (.) D_m + H_n* (.) B_m + H_m (.) B_n*] over the window.
cplx momentum_cross(const ModeProfile& m, const ModeProfile& n, Quadrature q = kDefaultQuadrature);

double xi_energy(const ModeProfile& m, Quadrature q = kDefaultQuadrature);
double xi_momentum(const ModeProfile& m, Quadrature q = kDefaultQuadrature);

/// Cross-frequency similarity |int [E_a* x H_b + E_b x H_a*]_z| / sqrt(xi_a xi_b),
/// clamped to [0, 1]. Profiles must share a grid; frequencies may differ.
double profile_overlap(const ModeProfile& a, const ModeProfile& b);

/// |xi_e / xi_m - omega / k| * k / omega from the stored integrals. Throws
/// ValidationError when xi_m = 0.
double ratio_check(const ModeProfile& m);
/// Same, with both integrals recomputed in quadrature q.
double ratio_check(const ModeProfile& m, Quadrature q);

/// Time-averaged flow densities at cell centres (row-major, nx * ny):
/// sz = Re[E x H*]_z / 2 and tzz = Re[E (.) D* + H (.) B*] / 2. Their
/// integrals are xi_e / 4 and xi_m / 4, so tzz / sz = eta / c for a vacuum
/// plane wave (1 / c).
struct FlowMaps {
  Grid2D grid;
  std::vector<double> sz, tzz;
  double sz_integral = 0.0;
  double tzz_integral = 0.0;
};

FlowMaps flow_maps(const ModeProfile& m);

enum class Normalization { classical, quantum };

/// classical: xi_e = 4 * power_w. quantum: fields scaled by sqrt(hbar k / xi_m),
/// so xi_m = hbar k and, with the ratio relation, xi_e = hbar omega.
/// Throws ValidationError for a non-positive normalizer.
ModeProfile normalize_mode(const ModeProfile& m, Normalization convention, double power_w = 1.0);

/// Correction integrals of the momentum-energy identity:
/// xi_m = (i1 + i2 + i3) / 2 with i1 = 2 (k / omega) xi_e and i2 + i3 = 0 for
/// an exact mode. i2, i3 use the transverse curls of the profile and carry the
/// same 1 / omega factor as i1.
struct IdentityIntegrals {
  cplx i1, i2, i3;
  double xi_m = 0.0;
  /// |i2 + i3| / |i1|
  double cancellation() const { return std::abs(i2 + i3) / std::abs(i1); }
};

IdentityIntegrals identity_integrals(const ModeProfile& m, Quadrature q = kDefaultQuadrature);

struct CrossProductReport {
  Quadrature quadrature = kDefaultQuadrature;
  double omega = 0.0;
  std::vector<double> eta;
  Eigen::MatrixXcd energy, momentum;
  /// 2 |x_mn| / (x_mm + x_nn), zero on the diagonal.
  Eigen::MatrixXd energy_offdiag, momentum_offdiag;
  std::vector<double> ratio_error;
  std::vector<int> cluster;
  double worst_energy_offdiag = 0.0;    // over non-degenerate pairs
  double worst_momentum_offdiag = 0.0;
  double worst_ratio_error = 0.0;
  double diagonal_imag_defect = 0.0;    // max |Im x_mm| / |x_mm|
  double hermitian_defect = 0.0;        // max |x_mn - conj(x_nm)| / max |x_mm|
};

CrossProductReport cross_product_report(const std::vector<ModeProfile>& modes,
                                        Quadrature q = kDefaultQuadrature);

/// Matrix tables (energy then momentum): one row per (m, n) pair.
std::string report_csv(const CrossProductReport& r);
nlohmann::json report_json(const CrossProductReport& r);

}  // namespace wgm
