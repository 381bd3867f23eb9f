#include <gtest/gtest.h>

#include <cmath>

#include "wgm/errors.hpp"
#include "wgm/fdsolver.hpp"
#include "wgm/oracle.hpp"
#include "wgm/validation.hpp"

using namespace wgm;

namespace {

Eigen::Matrix3cd gyrotropic() {
  Eigen::Matrix3cd e;
  e << 4.0, cplx(0.1, 0.2), cplx(0.05, -0.03),
       cplx(0.1, -0.2), 4.4, cplx(0.07, 0.02),
       cplx(0.05, 0.03), cplx(0.07, -0.02), 4.8;
  return e;
}

OperatorPencil strip_pencil(const Eigen::Matrix3cd& core_eps, int n = 16) {
  MaterialLibrary lib;
  lib.add(MaterialModel::constant_index("clad", 1.4));
  lib.add(MaterialModel::constant_tensor("core", core_eps));
  CrossSection cs("clad");
  cs.paint(Rectangle{-0.4e-6, 0.4e-6, -0.3e-6, 0.3e-6}, "core");
  return assemble_operator(rasterize(cs, lib, Grid2D::centered(0, 0, 4e-6, 4e-6, n, n), omega_from_lambda_um(1.55)));
}

double herm_defect(const SparseMatrixC& a) {
  const SparseMatrixC ah = a.adjoint();
  return (a - ah).norm() / a.norm();
}

}  // namespace

TEST(Pencil, HermitianForGyrotropicTensor) {
  const OperatorPencil p = strip_pencil(gyrotropic());
  EXPECT_LT(herm_defect(p.a), 1e-14);
  const SparseMatrixC bt = p.b.transpose();
  EXPECT_EQ((p.b - bt).norm(), 0.0);
  EXPECT_EQ(p.b.imag().norm(), 0.0);
}

TEST(Pencil, LongitudinalCouplingEntries) {
  Eigen::Matrix3cd diag = Eigen::Matrix3cd::Zero();
  diag.diagonal() << 4.0, 4.4, 4.8;
  Eigen::Matrix3cd yz = diag;
  yz(1, 2) = 0.2;
  yz(2, 1) = 0.2;
  const OperatorPencil p0 = strip_pencil(diag), p1 = strip_pencil(yz);
  EXPECT_GT((p1.a - p0.a).norm(), 1e-3 * p0.a.norm());
  EXPECT_GT(p1.a.nonZeros(), p0.a.nonZeros());
  EXPECT_LT(herm_defect(p1.a), 1e-14);
}

TEST(Pencil, VanishingEpsZzIsModelError) {
  Eigen::Matrix3cd e = Eigen::Matrix3cd::Identity();
  e(2, 2) = 1e-12;
  EpsilonMap map;
  map.grid = Grid2D(0, 1e-6, 0, 1e-6, 8, 8);
  map.omega = 1e15;
  for (NodeSet s : {NodeSet::ex, NodeSet::ey, NodeSet::ez}) {
    auto [nx, ny] = node_dims(map.grid, s);
    auto& arr = s == NodeSet::ex ? map.ex : s == NodeSet::ey ? map.ey : map.ez;
    arr.assign(static_cast<std::size_t>(nx) * ny, e);
  }
  EXPECT_THROW(assemble_operator(map), ModelError);
}

TEST(Solver, VacuumBoxMatchesClosedFormSpectrum) {
  const double omega = omega_from_lambda_um(1.0);
  const ModeSet ms = solve_at(vacuum_box_model(64, 1.0, 4), omega);
  const auto exact = box_modes(1e-6, 1e-6, 1.0, omega);
  ASSERT_EQ(ms.modes.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(ms.modes[i].eta, exact[i].eta, 1e-4) << i;
    EXPECT_LT(ms.modes[i].residual, 1e-10);
    if (i > 0) EXPECT_GE(ms.modes[i - 1].eta, ms.modes[i].eta);
  }
  // TE10 / TE01 and TE11 / TM11 are degenerate pairs.
  EXPECT_GE(ms.modes[0].cluster, 0);
  EXPECT_EQ(ms.modes[0].cluster, ms.modes[1].cluster);
  EXPECT_GE(ms.modes[2].cluster, 0);
  EXPECT_NE(ms.modes[2].cluster, ms.modes[0].cluster);
}

// O(h^2) convergence: the 64 -> 128 error drop is close to 4.
TEST(Solver, SecondOrderConvergence) {
  const double omega = omega_from_lambda_um(1.0);
  const double exact = std::sqrt(0.75);
  const double e32 = std::abs(solve_at(vacuum_box_model(32), omega).modes.at(0).eta - exact);
  const double e64 = std::abs(solve_at(vacuum_box_model(64), omega).modes.at(0).eta - exact);
  EXPECT_NEAR(std::log2(e32 / e64), 2.0, 0.1);
}

TEST(Solver, DenseSpectrumReturnsTopModes) {
  // Large window: many modes lie within 2% of the shift, so only a search
  // from the top of the window returns the highest eta.
  WaveguideModel m;
  m.materials.add(MaterialModel::constant_index("glass", 1.5));
  m.cross_section = CrossSection("glass");
  m.grid = Grid2D(0, 10e-6, 0, 10e-6, 40, 40);
  m.search.eta_min = 1.0;
  m.search.eta_max = 1.5;
  m.search.n_eigs = 2;
  m.search.decay_max = 10.0;
  const double omega = omega_from_lambda_um(1.0);
  const ModeSet ms = solve_at(m, omega);
  const double h = 10e-6 / 40, k0 = omega / si::c0;
  const double kx = 2.0 / h * std::sin(si::pi * h / 20e-6);
  ASSERT_EQ(ms.modes.size(), 2u);
  EXPECT_NEAR(ms.modes[0].eta, std::sqrt(2.25 - kx * kx / (k0 * k0)), 1e-9);
  EXPECT_NEAR(ms.modes[1].eta, ms.modes[0].eta, 1e-9);
}

TEST(Solver, SearchWindowValidation) {
  const OperatorPencil p = strip_pencil(gyrotropic(), 8);
  SearchParams s;
  s.eta_min = 2.5;
  s.eta_max = 2.0;
  EXPECT_THROW(solve_modes(p, s), ValidationError);
  s = SearchParams{};
  s.n_eigs = 0;
  EXPECT_THROW(solve_modes(p, s), ValidationError);
}

TEST(Solver, GyrotropicStripModesAreGuidedAndReal) {
  const OperatorPencil p = strip_pencil(gyrotropic(), 24);
  SearchParams s;
  s.eta_min = 1.4;
  s.n_eigs = 2;
  const ModeSet ms = solve_modes(p, s);
  ASSERT_FALSE(ms.modes.empty());
  for (const auto& m : ms.modes) {
    EXPECT_GT(m.eta, 1.4);
    EXPECT_LT(m.eta, 2.2);
    EXPECT_GT(m.xi_e, 0.0);
    EXPECT_LT(m.residual, 1e-8);
  }
}
