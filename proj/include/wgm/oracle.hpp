#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wgm/materials.hpp"
#include "wgm/modes.hpp"

namespace wgm {

enum class SlabPolarization { te, tm };

/// Guided effective indices of a symmetric three-layer slab, descending
/// (fundamental first). Each order is bracketed by a sign scan and refined by
/// bisection to 1e-12. Empty when n_core <= n_clad.
std::vector<double> slab_dispersion(double n_core, double n_clad, double thickness_m,
                                    double lambda_m, SlabPolarization pol);

enum class BoxPolarization { te, tm };

struct BoxMode {
  int p = 0, q = 0;
  BoxPolarization pol = BoxPolarization::te;
  double eta = 0.0;
};

/// Propagating modes of a PEC rectangle a x b filled with index n, descending
/// eta; TE_pq needs p + q > 0, TM_pq needs p, q > 0.
std::vector<BoxMode> box_modes(double a_m, double b_m, double n_fill, double omega);

/// Ordinary and extraordinary indices for a plane wave along `direction`.
/// eps must be real symmetric with two equal eigenvalues (relative 1e-9);
/// an isotropic tensor returns (n, n). Throws ValidationError otherwise.
std::pair<double, double> uniaxial_plane_indices(const EpsilonTensor& eps,
                                                 const Eigen::Vector3d& direction);

/// Vector field over (x, y, z) with its analytic Jacobian J(a, b) = dX_a / dr_b.
struct AnalyticField {
  std::string label;
  std::function<Eigen::Vector3cd(const Eigen::Vector3d&)> value;
  std::function<Eigen::Matrix3cd(const Eigen::Vector3d&)> jacobian;
};

/// Random complex polynomial field of total degree <= degree (coefficients
/// uniform in [-1, 1] + i [-1, 1]).
AnalyticField random_polynomial_field(unsigned seed, int degree = 3);
/// Random sum of three products of sines and cosines with random wave vectors.
AnalyticField random_trigonometric_field(unsigned seed);

/// Max over points and alpha of |R_a - div Q_a - W_a| for
/// R = X (div Y) - Y x (curl X), Q_ab = X_a Y_b - (X.Y) delta_ab / 2 and
/// W_a = sum_b (X_b d_a Y_b - Y_b d_a X_b) / 2.
double lemma3_check(const AnalyticField& x, const AnalyticField& y,
                    const std::vector<Eigen::Vector3d>& points);

struct Lemma1Result {
  double residual = 0.0;     // max over z of |int div X - d/dz int X_z|
  double scale = 0.0;        // max over z of |d/dz int X_z|
  bool decay_warning = false;  // |X| on the window edge above 1e-12 of its peak
};

/// Compares the midpoint quadrature of div X over `window` with the
/// quadrature of the analytic dX_z/dz at each z sample.
Lemma1Result lemma1_check(const AnalyticField& x, const Grid2D& window,
                          const std::vector<double>& z_samples);

/// Both Hermitian-symmetry defects for one Hermitian kappa and fields X1, X2:
/// |X1 . (kappa X2)* - (kappa X1) . X2*| and |Im X1 . (kappa X1)*|, each
/// relative to |kappa| |X1| |X2|.
std::pair<double, double> lemma2_defects(const Eigen::Matrix3cd& kappa, const Eigen::Vector3cd& x1,
                                         const Eigen::Vector3cd& x2);

/// The three integrals of the momentum-energy identity (see IdentityIntegrals).
IdentityIntegrals appendix_c_cancellation(const ModeProfile& m,
                                          Quadrature q = kDefaultQuadrature);

/// p = log2(|v_h - v_h2| / |v_h2 - v_h4|); empty if either difference is zero.
std::optional<double> convergence_order(double v_h, double v_h2, double v_h4);

/// One named entry of a validation report.
struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

nlohmann::json checks_json(const std::vector<Check>& checks);

}  // namespace wgm
