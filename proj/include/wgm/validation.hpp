#pragma once

#include <optional>
#include <vector>

#include "wgm/oracle.hpp"
#include "wgm/sweep.hpp"

namespace wgm {

/// PEC box a x a of index 1 on an n x n grid (decay filter off: the fields
/// of a closed guide do not vanish toward the walls).
WaveguideModel vacuum_box_model(int n, double a_um = 1.0, int n_eigs = 1);

/// Symmetric slab (core 1.50, cladding 1.45, 2 um along y) in a 20 um wide
/// PEC window with nx columns and ny rows over 16 um.
WaveguideModel slab_model(int ny, int nx = 16, int n_eigs = 2);

/// Slab effective index with the discrete sin(pi x / a) envelope of a PEC
/// window removed: sqrt(eta^2 + (kx / k0)^2), kx = (2 / hx) sin(pi hx / 2a).
/// Exact for an x-invariant permittivity on the Yee grid.
double remove_x_envelope(double eta, const Grid2D& grid, double omega);

/// Fraction min(int |Ex|^2, int |Ey|^2) / max(...) on the native nodes.
double hybridness(const ModeProfile& m);
/// True when the mode's E is mostly along x (TE with respect to y-layers).
bool is_x_polarized(const ModeProfile& m);

struct BoxStudy {
  std::vector<int> grids;
  std::vector<double> eta;  // fundamental eta per grid
  double exact = 0.0;
  std::optional<double> order;
  double seconds = 0.0;
};

BoxStudy vacuum_box_study(const std::vector<int>& grids = {64, 128, 256});

struct SlabStudy {
  double te = 0.0, tm = 0.0;               // envelope-corrected solver values
  double te_oracle = 0.0, tm_oracle = 0.0;
  std::vector<ModeProfile> modes;
};

SlabStudy slab_study(int ny = 420);

/// Worst residual of R = div Q + W over n_pairs random field pairs (half polynomial,
/// half trigonometric), 20 points each in [-1, 1]^3.
double lemma3_suite(int n_pairs = 100, unsigned seed = 7);
/// Worst Hermitian-symmetry defect over n random Hermitian tensors and field pairs.
double lemma2_suite(int n = 1000, unsigned seed = 11);
/// Gaussian-localized field with z-dependence; relative residual.
Lemma1Result lemma1_gaussian();

struct QuantumChecks {
  double single_photon_energy = 0.0;     // relative error of <F> vs hbar omega0
  double single_photon_momentum = 0.0;   // relative error of <G> vs hbar k(omega0)
  double single_photon_number = 0.0;     // |<N> - 1|
  double propagation_invariance = 0.0;   // worst relative change of F, G, N over 10 dz
  double gvd_duration = 0.0;             // worst relative error vs the Gaussian formula
  double linear_duration = 0.0;          // worst relative duration change on a linear branch
  double linear_arrival = 0.0;           // worst |t_arrival - k1 z| / rms
  double gram_defect = 0.0;              // L = 5 Hermite-Gauss basis
  double basis_invariance = 0.0;         // worst relative <F>, <G>, <N> change under basis change
};

QuantumChecks quantum_checks();

/// The self-contained oracle suite behind `wgm validate`.
std::vector<Check> run_validation_suite();

}  // namespace wgm
