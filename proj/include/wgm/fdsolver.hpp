#pragma once

#include <Eigen/SparseCore>

#include <memory>
#include <optional>
#include <vector>

#include "wgm/geometry.hpp"

namespace wgm {

/// Index map from staggered nodes to the transverse unknown vector
/// psi = (Ex, Ey, Hx, Hy) with H scaled by Z0. Tangential E on the PEC wall
/// is not an unknown; neither is Hx/Hy on those same nodes, which share the
/// Ey/Ex positions.
struct UnknownLayout {
  int nx = 0, ny = 0;

  explicit UnknownLayout(const Grid2D& g) : nx(g.nx), ny(g.ny) {}
  UnknownLayout() = default;

  int n_ex() const { return nx * (ny - 1); }
  int n_ey() const { return (nx - 1) * ny; }
  int size() const { return 2 * (n_ex() + n_ey()); }

  int off_ey() const { return n_ex(); }
  int off_hx() const { return n_ex() + n_ey(); }
  int off_hy() const { return n_ex() + 2 * n_ey(); }

  /// -1 for wall nodes or out-of-range indices.
  int ex(int i, int j) const {
    return (i < 0 || i >= nx || j < 1 || j >= ny) ? -1 : (j - 1) * nx + i;
  }
  int ey(int i, int j) const {
    return (i < 1 || i >= nx || j < 0 || j >= ny) ? -1 : off_ey() + j * (nx - 1) + (i - 1);
  }
  int hx(int i, int j) const { int k = ey(i, j); return k < 0 ? -1 : k - off_ey() + off_hx(); }
  int hy(int i, int j) const { int k = ex(i, j); return k < 0 ? -1 : k + off_hy(); }
};

using SparseMatrixC = Eigen::SparseMatrix<cplx>;

/// Generalized Hermitian pencil A psi = eta B psi, eta = k c / omega.
///
/// M is the transverse-field operator (eta psi = M psi); B is the symmetric
/// real pairing psi1^H B psi2 = sum (E1* x H2 + E2 x H1*)_z and A = B M is
/// Hermitian when the permittivity is.
struct OperatorPencil {
  double omega = 0.0;
  Grid2D grid;
  UnknownLayout layout;
  SparseMatrixC m, a, b;
  std::shared_ptr<const EpsilonMap> map;

  // Row-major reconstruction maps from psi: Ez and Z0 Hz on all their nodes,
  // D / eps0 on all Ex, Ey and Ez nodes (wall rows are empty).
  Eigen::SparseMatrix<cplx, Eigen::RowMajor> ez_from_psi, hz_from_psi;
  Eigen::SparseMatrix<cplx, Eigen::RowMajor> dx_from_psi, dy_from_psi, dz_from_psi;
};

/// Builds the pencil. Throws ModelError naming the node when eps_zz is below
/// 1e-9 (Ez cannot be eliminated there).
OperatorPencil assemble_operator(std::shared_ptr<const EpsilonMap> map);
OperatorPencil assemble_operator(const EpsilonMap& map);

/// Mode fields in SI at their native staggered nodes.
///
/// ex, dx, hy, by on NodeSet::ex; ey, dy, hx, bx on NodeSet::ey; ez, dz on
/// NodeSet::ez; hz, bz on NodeSet::hz. Fields carry e^{i(kz - omega t)}.
struct ModeProfile {
  Grid2D grid;
  double omega = 0.0;
  double k = 0.0;
  double eta = 0.0;
  NodeArray ex, ey, ez, hx, hy, hz;
  NodeArray dx, dy, dz, bx, by, bz;
  double xi_e = 0.0;      // energy-flow normalization integral
  double xi_m = 0.0;      // momentum-flow normalization integral
  double residual = 0.0;  // relative discrete Maxwell residual
  double decay = 0.0;     // wall-adjacent amplitude / peak amplitude
  int cluster = -1;       // degenerate cluster id, -1 if non-degenerate
};

struct SearchParams {
  double eta_min = 0.0;  // exclusive lower bound (cladding index)
  double eta_max = 0.0;  // inclusive upper bound (max core index); <= 0 uses the map maximum
  int n_eigs = 6;
  std::optional<double> shift_eta;  // defaults to eta_max
  double decay_max = 1e-3;
  double imag_tol = 1e-8;           // |Im eta| / |Re eta|
  double residual_max = 1e-8;
  double degeneracy_gap = 1e-10;    // relative eta gap
  double arnoldi_tol = 1e-13;
  int max_shift_lowerings = 4;
};

struct SolverDiagnostics {
  std::vector<double> shifts;  // eta shifts used, in order
  int eigenpairs = 0;
  int restarts = 0;
  int operator_applications = 0;
  int rejected_complex = 0;
  int rejected_window = 0;
  int rejected_decay = 0;
  int rejected_residual = 0;
  int rejected_sign = 0;
};

struct ModeSet {
  double omega = 0.0;
  std::vector<ModeProfile> modes;  // descending eta
  SolverDiagnostics diagnostics;
};

/// Guided modes with eta in (eta_min, eta_max], sorted by descending eta.
/// Degenerate clusters are orthogonalized in the energy form and tagged.
ModeSet solve_modes(const OperatorPencil& pencil, const SearchParams& search);

/// Rebuilds all six field components (and D, B) from a transverse unknown
/// vector and computes xi_e, xi_m, residual and decay.
ModeProfile complete_fields(const OperatorPencil& pencil, const Eigen::VectorXcd& psi, double eta);

/// Relative residual of all six discrete curl equations evaluated on the
/// stored E, D and H samples (D carries the material law). Empty for an
/// all-zero field.
std::optional<double> residual(const ModeProfile& mode);

/// Largest wall-adjacent |E| or |Z0 H| sample relative to the global peak.
double boundary_decay(const ModeProfile& mode);

/// Multiplies every field of a profile by s and rescales xi_e and xi_m by |s|^2.
void scale_fields(ModeProfile& mode, cplx s);

}  // namespace wgm
