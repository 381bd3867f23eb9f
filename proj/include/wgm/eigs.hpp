#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>

namespace wgm {

/// Applies y = Op x.
using LinearOperator = std::function<void(const Eigen::VectorXcd& x, Eigen::VectorXcd& y)>;

struct KrylovSchurOptions {
  int nev = 6;            // wanted eigenpairs (largest magnitude)
  int ncv = 0;            // subspace size; 0 picks max(2 nev + 10, 30)
  double tol = 1e-12;     // relative Ritz residual
  int max_restarts = 500;
  std::uint64_t seed = 0x5eed5eedULL;
};

struct KrylovSchurResult {
  Eigen::VectorXcd values;   // sorted by descending magnitude
  Eigen::MatrixXcd vectors;  // unit-norm columns
  Eigen::VectorXd residuals; // |beta| |e_m^T y| / |theta|
  int converged = 0;
  int restarts = 0;
  int operator_applications = 0;
};

/// Krylov-Schur (thick-restart Arnoldi) for the largest-magnitude eigenvalues
/// of a general complex operator. With Op = (A - sigma B)^-1 B this is the
/// shift-invert iteration used by the mode solver.
KrylovSchurResult krylov_schur(const LinearOperator& op, Eigen::Index n,
                               const KrylovSchurOptions& opts);

/// Reorders an upper-triangular Schur form T (with unitary Z, H = Z T Z^H) so
/// that the diagonal is sorted by descending magnitude. Adjacent swaps by
/// Givens rotations.
void sort_schur_by_magnitude(Eigen::MatrixXcd& t, Eigen::MatrixXcd& z);

}  // namespace wgm
