#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "wgm/errors.hpp"
#include "wgm/modes.hpp"
#include "wgm/sweep.hpp"
#include "wgm/validation.hpp"

using namespace wgm;

namespace {

// Anisotropic strip with all off-diagonal couplings, solved once.
const ModeSet& strip_modes() {
  static const ModeSet ms = [] {
    Eigen::Matrix3cd e;
    e << 4.6, 0.3, cplx(0.1, 0.05), 0.3, 4.2, 0.2, cplx(0.1, -0.05), 0.2, 4.9;
    WaveguideModel m;
    m.materials.add(MaterialModel::constant_index("clad", 1.45));
    m.materials.add(MaterialModel::constant_tensor("core", e));
    m.cross_section = CrossSection("clad");
    m.cross_section.paint(Rectangle{-0.5e-6, 0.5e-6, -0.35e-6, 0.35e-6}, "core");
    m.grid = Grid2D::centered(0, 0, 5e-6, 5e-6, 50, 50);
    m.search.eta_min = 1.45;
    m.search.n_eigs = 3;
    return solve_at(m, omega_from_lambda_um(1.55));
  }();
  return ms;
}

struct OdotFaultGuard {
  ~OdotFaultGuard() { set_odot_sign_fault(false); }
};

}  // namespace

TEST(Odot, DefinitionAndSymmetry) {
  const Vec3c x(cplx(1, 2), cplx(-0.5, 0.3), cplx(2, -1));
  const Vec3c y(cplx(0.2, 0.1), cplx(3, 0), cplx(-1, 1));
  const cplx expected = (x[0] * y[0] + x[1] * y[1] - x[2] * y[2]) / 2.0;
  EXPECT_EQ(odot(x, y), expected);
  EXPECT_EQ(odot(x, y), odot(y, x));
}

TEST(Odot, FaultToggleFlipsZTerm) {
  OdotFaultGuard guard;
  const Vec3c x(1, 0, 1), y(1, 0, 1);
  EXPECT_EQ(odot(x, y), cplx(0.0));
  set_odot_sign_fault(true);
  EXPECT_TRUE(odot_sign_fault());
  EXPECT_EQ(odot(x, y), cplx(1.0));
  set_odot_sign_fault(false);
  EXPECT_EQ(odot(x, y), cplx(0.0));
}

TEST(Modes, RatioRelationHoldsToRoundOff) {
  for (const auto& m : strip_modes().modes) {
    EXPECT_LT(ratio_check(m), 1e-12);
    EXPECT_NEAR(m.xi_e, xi_energy(m), 1e-12 * m.xi_e);
    EXPECT_NEAR(m.xi_m, xi_momentum(m), 1e-12 * m.xi_m);
  }
}

TEST(Modes, CrossProductsAreOrthogonal) {
  const auto& ms = strip_modes();
  ASSERT_GE(ms.modes.size(), 2u);
  const CrossProductReport r = cross_product_report(ms.modes);
  EXPECT_LT(r.worst_energy_offdiag, 1e-10);
  EXPECT_LT(r.worst_momentum_offdiag, 1e-10);
  EXPECT_LT(r.diagonal_imag_defect, 1e-12);
  EXPECT_LT(r.hermitian_defect, 1e-12);
  for (std::size_t i = 0; i < ms.modes.size(); ++i) EXPECT_GT(r.energy(i, i).real(), 0.0);
}

TEST(Modes, DegenerateBoxClustersAreOrthogonalized) {
  const ModeSet ms = solve_at(vacuum_box_model(24, 1.0, 4), omega_from_lambda_um(1.0));
  const CrossProductReport r = cross_product_report(ms.modes);
  ASSERT_EQ(ms.modes[0].cluster, ms.modes[1].cluster);
  EXPECT_LT(r.energy_offdiag(0, 1), 1e-10);
  EXPECT_LT(r.momentum_offdiag(0, 1), 1e-10);
}

TEST(Modes, FlowMapIntegralsMatchNormalizers) {
  const auto& m = strip_modes().modes.front();
  const FlowMaps f = flow_maps(m);
  EXPECT_EQ(f.sz.size(), static_cast<std::size_t>(m.grid.nx) * m.grid.ny);
  const double xe = xi_energy(m, Quadrature::cell_centered);
  const double xm = xi_momentum(m, Quadrature::cell_centered);
  EXPECT_NEAR(f.sz_integral, xe / 4.0, 1e-12 * xe);
  EXPECT_NEAR(f.tzz_integral, xm / 4.0, 1e-12 * xm);
}

TEST(Modes, QuantumNormalization) {
  const auto& m = strip_modes().modes.front();
  const ModeProfile q = normalize_mode(m, Normalization::quantum);
  EXPECT_NEAR(q.xi_m, si::hbar * q.k, 1e-12 * si::hbar * q.k);
  EXPECT_NEAR(q.xi_e, si::hbar * q.omega, 1e-10 * si::hbar * q.omega);
  EXPECT_NEAR(xi_momentum(q), q.xi_m, 1e-12 * q.xi_m);
}

TEST(Modes, ClassicalNormalization) {
  const auto& m = strip_modes().modes.front();
  const ModeProfile c = normalize_mode(m, Normalization::classical, 2e-3);
  EXPECT_NEAR(c.xi_e, 8e-3, 1e-15);
  // Flow maps use the cell-centred rule, which differs from the native one by
  // the discretization error (about 1.5% on this 0.1 um grid).
  EXPECT_NEAR(flow_maps(c).sz_integral, 2e-3, 2e-3 * 5e-2);
}

// Scaling by s rescales both integrals by |s|^2 and leaves the ratio intact.
TEST(ModesProperty, ScalingInvariance) {
  ModeProfile m = strip_modes().modes.front();
  const double xe = m.xi_e;
  scale_fields(m, cplx(0.3, -2.0));
  EXPECT_NEAR(m.xi_e, xe * 4.09, 1e-12 * xe);
  EXPECT_NEAR(xi_energy(m), m.xi_e, 1e-12 * m.xi_e);
  EXPECT_LT(ratio_check(m), 1e-12);
}

TEST(Modes, IdentityIntegralsCancel) {
  for (const auto& m : strip_modes().modes) {
    const IdentityIntegrals ii = identity_integrals(m);
    EXPECT_LT(ii.cancellation(), 1e-10);
    EXPECT_NEAR(ii.xi_m, m.xi_m, 1e-10 * m.xi_m);
  }
}

TEST(Modes, OdotFaultBreaksIdentity) {
  OdotFaultGuard guard;
  const auto& m = strip_modes().modes.front();
  set_odot_sign_fault(true);
  EXPECT_GT(std::abs(xi_momentum(m) - m.xi_m), 1e-6 * m.xi_m);
}

TEST(Modes, MismatchedGridsRejected) {
  const ModeSet a = solve_at(vacuum_box_model(16), omega_from_lambda_um(1.0));
  const ModeSet b = solve_at(vacuum_box_model(20), omega_from_lambda_um(1.0));
  EXPECT_THROW(energy_cross(a.modes[0], b.modes[0]), ValidationError);
}

TEST(Modes, ReportSerialization) {
  const CrossProductReport r = cross_product_report(strip_modes().modes);
  const auto j = report_json(r);
  EXPECT_EQ(j.at("quadrature").get<std::string>(), "yee_native");
  const std::string csv = report_csv(r);
  const std::size_t n = strip_modes().modes.size();
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), 2 * n * n + 1);
}
