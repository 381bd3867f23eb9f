#include <gtest/gtest.h>

#include <cmath>

#include "wgm/errors.hpp"
#include "wgm/oracle.hpp"
#include "wgm/validation.hpp"

using namespace wgm;

// Frozen from an independent root-finder of the three-layer slab equations.
TEST(SlabOracle, FrozenFundamentalIndices) {
  const auto te = slab_dispersion(1.50, 1.45, 2e-6, 1.55e-6, SlabPolarization::te);
  const auto tm = slab_dispersion(1.50, 1.45, 2e-6, 1.55e-6, SlabPolarization::tm);
  ASSERT_FALSE(te.empty());
  ASSERT_FALSE(tm.empty());
  EXPECT_NEAR(te[0], 1.4823389417528583, 1e-10);
  EXPECT_NEAR(tm[0], 1.4816457601241773, 1e-10);
  EXPECT_GT(te[0], tm[0]);
  for (std::size_t i = 1; i < te.size(); ++i) EXPECT_LT(te[i], te[i - 1]);
}

TEST(SlabOracle, NoGuidanceWithoutContrast) {
  EXPECT_TRUE(slab_dispersion(1.45, 1.45, 2e-6, 1.55e-6, SlabPolarization::te).empty());
  EXPECT_TRUE(slab_dispersion(1.40, 1.45, 2e-6, 1.55e-6, SlabPolarization::tm).empty());
}

TEST(BoxOracle, ClosedFormSpectrum) {
  const double omega = omega_from_lambda_um(1.0);
  const auto modes = box_modes(1e-6, 1e-6, 1.0, omega);
  ASSERT_GE(modes.size(), 4u);
  EXPECT_NEAR(modes[0].eta, std::sqrt(0.75), 1e-15);
  EXPECT_NEAR(modes[1].eta, std::sqrt(0.75), 1e-15);
  EXPECT_NEAR(modes[2].eta, std::sqrt(0.5), 1e-15);
  for (const auto& m : modes) {
    if (m.pol == BoxPolarization::tm) {
      EXPECT_GT(m.p, 0);
      EXPECT_GT(m.q, 0);
    }
    EXPECT_GT(m.eta, 0.0);
  }
}

TEST(UniaxialOracle, IndexEllipsoid) {
  const double no = 2.21, ne = 2.14;
  const EpsilonTensor eps = EpsilonTensor::diagonal(no * no, no * no, ne * ne);
  auto [o, e] = uniaxial_plane_indices(eps, Eigen::Vector3d::UnitZ());
  EXPECT_NEAR(o, no, 1e-14);
  EXPECT_NEAR(e, no, 1e-14);
  std::tie(o, e) = uniaxial_plane_indices(eps, Eigen::Vector3d::UnitX());
  EXPECT_NEAR(e, ne, 1e-14);
  const double th = 0.4;
  std::tie(o, e) = uniaxial_plane_indices(eps, Eigen::Vector3d(std::sin(th), 0.0, std::cos(th)));
  const double expected = 1.0 / std::sqrt(std::pow(std::cos(th) / no, 2) + std::pow(std::sin(th) / ne, 2));
  EXPECT_NEAR(e, expected, 1e-14);
  EXPECT_THROW(uniaxial_plane_indices(EpsilonTensor::diagonal(2, 3, 4), Eigen::Vector3d::UnitZ()),
               ValidationError);
}

TEST(Identities, VectorIdentityResidual) { EXPECT_LT(lemma3_suite(20, 5), 1e-12); }

TEST(Identities, HermitianSymmetryDefect) { EXPECT_LT(lemma2_suite(200, 5), 1e-14); }

TEST(Identities, DivergenceTheoremOnGaussian) {
  const Lemma1Result r = lemma1_gaussian();
  EXPECT_LT(r.residual, 1e-10 * std::max(1.0, r.scale));
  EXPECT_FALSE(r.decay_warning);
}

TEST(Identities, PolynomialFieldsDoNotDecay) {
  const AnalyticField x = random_polynomial_field(3);
  const Lemma1Result r = lemma1_check(x, Grid2D(-1, 1, -1, 1, 64, 64), {0.0, 0.3});
  EXPECT_TRUE(r.decay_warning);
}

TEST(Convergence, ObservedOrder) {
  const auto p = convergence_order(4.0, 1.0, 0.25);
  ASSERT_TRUE(p.has_value());
  EXPECT_NEAR(*p, 2.0, 1e-15);
  EXPECT_FALSE(convergence_order(1.0, 1.0, 0.5).has_value());
}

TEST(Envelope, RemovalInvertsDiscreteDispersion) {
  const Grid2D g(-10e-6, 10e-6, -8e-6, 8e-6, 16, 64);
  const double omega = omega_from_lambda_um(1.55), k0 = omega / si::c0;
  const double kx = 2.0 / g.hx() * std::sin(si::pi * g.hx() / 40e-6);
  const double eta = std::sqrt(1.48 * 1.48 - kx * kx / (k0 * k0));
  EXPECT_NEAR(remove_x_envelope(eta, g, omega), 1.48, 1e-14);
}

TEST(Checks, JsonCarriesEveryField) {
  const auto j = checks_json({Check{"a", 1e-5, 1e-4, true, "ok"}});
  ASSERT_TRUE(j.is_array());
  EXPECT_EQ(j[0].at("name"), "a");
  EXPECT_EQ(j[0].at("pass"), true);
  EXPECT_DOUBLE_EQ(j[0].at("tolerance").get<double>(), 1e-4);
}
