#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "wgm/errors.hpp"
#include "wgm/materials.hpp"

using namespace wgm;

namespace {

const char* kLibrary = R"(
[SiO2]
kind = "sellmeier"
axes = 1
window_um = [0.21, 3.71]
B = [[0.6961663, 0.4079426, 0.8974794]]
C = [[0.00467914825849, 0.01351206307396, 97.93400253792]]

[LN]
kind = "sellmeier"
axes = 2
window_um = [0.4, 5.0]
B = [[2.6734, 1.2290, 12.614], [2.9804, 0.5981, 8.9543]]
C = [[0.01764, 0.05914, 474.60], [0.02047, 0.0666, 416.08]]
)";

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::Matrix3d a;
  for (int i = 0; i < 9; ++i) a(i) = nd(rng);
  Eigen::HouseholderQR<Eigen::Matrix3d> qr(a);
  Eigen::Matrix3d q = qr.householderQ();
  if (q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

}  // namespace

// Reference indices evaluated independently from the published coefficients.
TEST(Sellmeier, FusedSilicaAt1550) {
  const auto lib = MaterialLibrary::from_toml_string(kLibrary);
  const auto n = lib.get("SiO2").principal_indices(1.55);
  EXPECT_NEAR(n[0], 1.4440236217032607, 1e-12);
  EXPECT_EQ(n[0], n[1]);
  EXPECT_EQ(n[1], n[2]);
}

TEST(Sellmeier, LithiumNiobateOrdinaryAndExtraordinary) {
  const auto lib = MaterialLibrary::from_toml_string(kLibrary);
  const auto n = lib.get("LN").principal_indices(1.55);
  EXPECT_NEAR(n[0], 2.2111110086535737, 1e-12);
  EXPECT_NEAR(n[1], 2.2111110086535737, 1e-12);
  EXPECT_NEAR(n[2], 2.1375596497855565, 1e-12);
}

TEST(Sellmeier, PoleIsModelError) {
  SellmeierCoefficients c{{1.0}, {1.0}};
  EXPECT_THROW(sellmeier_index(c, 1.0), ModelError);
}

TEST(Materials, OutsideWindowIsRangeError) {
  const auto lib = MaterialLibrary::from_toml_string(kLibrary);
  EXPECT_THROW(eval_permittivity(lib.get("LN"), omega_from_lambda_um(0.3)), RangeError);
  EXPECT_NO_THROW(eval_permittivity(lib.get("LN"), omega_from_lambda_um(1.0)));
}

TEST(Materials, UnknownMaterialAndUnknownKey) {
  const auto lib = MaterialLibrary::from_toml_string(kLibrary);
  EXPECT_THROW(lib.get("GaAs"), ValidationError);
  EXPECT_THROW(MaterialLibrary::from_toml_string("[x]\nkind = \"constant\"\nindices = [1.5]\ncolour = 3\n"),
               ValidationError);
}

TEST(Materials, NonHermitianTensorRejected) {
  Eigen::Matrix3cd m = Eigen::Matrix3cd::Identity();
  m(0, 1) = cplx(0.0, 0.1);
  m(1, 0) = cplx(0.0, 0.1);  // should be the conjugate
  EXPECT_THROW(EpsilonTensor{m}, ValidationError);
  m(1, 0) = cplx(0.0, -0.1);
  EXPECT_NO_THROW(EpsilonTensor{m});
}

TEST(Materials, IndefiniteTensorRejected) {
  EXPECT_THROW(EpsilonTensor::diagonal(2.0, -1.0, 2.0), ModelError);
}

TEST(Rotation, ImproperMatrixRejected) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(2, 2) = -1.0;
  EXPECT_THROW(RotationSpec::from_matrix(m), ValidationError);
  EXPECT_THROW(RotationSpec::from_matrix(2.0 * Eigen::Matrix3d::Identity()), ValidationError);
}

TEST(Rotation, StepsComposeInOrder) {
  const RotationSpec a(Eigen::Vector3d::UnitX(), 0.3), b(Eigen::Vector3d::UnitZ(), -1.1);
  const RotationSpec ab = a.then(b);
  EXPECT_LT((ab.matrix() - b.matrix() * a.matrix()).norm(), 1e-15);
  EXPECT_TRUE(ab.then(ab.inverse()).is_identity(1e-14));
}

// Rotation preserves the spectrum and Hermiticity of every tensor.
TEST(RotationProperty, SpectrumAndHermiticityPreserved) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(1.0, 6.0);
  for (int t = 0; t < 200; ++t) {
    const EpsilonTensor eps = EpsilonTensor::diagonal(u(rng), u(rng), u(rng));
    const RotationSpec r = RotationSpec::from_matrix(random_rotation(rng));
    const EpsilonTensor rot = rotate_tensor(eps, r);
    EXPECT_TRUE(EpsilonTensor::is_hermitian(rot.matrix(), 1e-13));
    EXPECT_LT((rot.eigenvalues() - eps.eigenvalues()).norm(), 1e-12);
    const EpsilonTensor back = rotate_tensor(rot, r.inverse());
    EXPECT_LT((back.matrix() - eps.matrix()).norm(), 1e-12);
  }
}

TEST(Rotation, XCutCrystalMapsExtraordinaryAxisToX) {
  // Crystal (X, Y, Z) -> channel (y, z, x): the optic axis lies along x.
  Eigen::Matrix3d m;
  m << 0, 0, 1, 1, 0, 0, 0, 1, 0;
  const EpsilonTensor eps = rotate_tensor(EpsilonTensor::diagonal(4.0, 4.0, 5.0), RotationSpec::from_matrix(m));
  EXPECT_NEAR(eps(0, 0).real(), 5.0, 1e-15);
  EXPECT_NEAR(eps(1, 1).real(), 4.0, 1e-15);
  EXPECT_NEAR(eps(2, 2).real(), 4.0, 1e-15);
}
