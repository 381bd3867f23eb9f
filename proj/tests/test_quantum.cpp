#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "wgm/errors.hpp"
#include "wgm/quantum.hpp"

using namespace wgm;

namespace {

constexpr double kW0 = 1.2153e15;  // 1.55 um
constexpr double kK1 = 7.671974e-9;

std::shared_ptr<const BranchModel> branch(double k2 = 2e-26, double k1 = kK1) {
  return std::make_shared<const BranchModel>(
      BranchModel::taylor("b", kW0, {8918069.468, k1, k2}, 0.9 * kW0, 1.1 * kW0));
}

double thz(double f) { return 2.0 * si::pi * f * 1e12; }

}  // namespace

TEST(Branch, TaylorAndRange) {
  const auto b = branch();
  EXPECT_DOUBLE_EQ(b->k(kW0), 8918069.468);
  EXPECT_NEAR(b->k(kW0 + 1e12), 8918069.468 + kK1 * 1e12 + 1e-2, 1e-6);
  EXPECT_THROW(b->k(0.5 * kW0), RangeError);
  EXPECT_NEAR(b->xi_m(kW0), b->xi_e(kW0) * b->k(kW0) / kW0, 1e-15 * b->xi_m(kW0));
}

TEST(Branch, TabulatedPchipIsMonotone) {
  DispersionBranch d;
  for (int i = 0; i < 6; ++i) {
    const double w = 1e15 + i * 1e13;
    d.samples.push_back({w, w / si::c0 * (1.5 + 0.01 * i * i), 1.5, 1.0, 1.0});
  }
  d.confidence.assign(5, 1.0);
  const BranchModel b = BranchModel::tabulated(d);
  double prev = b.k(b.omega_min());
  for (int i = 1; i <= 500; ++i) {
    const double w = b.omega_min() + (b.omega_max() - b.omega_min()) * i / 500.0;
    const double k = b.k(w);
    EXPECT_GT(k, prev);
    prev = k;
  }
  EXPECT_DOUBLE_EQ(b.k(d.samples[3].omega), d.samples[3].k);
}

TEST(Quanta, PhotonEnergyAndMomentum) {
  const auto [e, p] = photon_quanta(*branch(), kW0);
  EXPECT_DOUBLE_EQ(e, si::hbar * kW0);
  EXPECT_DOUBLE_EQ(p, si::hbar * 8918069.468);
}

TEST(Amplitude, SinglePhotonNormalization) {
  const auto c = gaussian_amplitude(branch(), kW0, thz(0.05), 0.0, AmplitudeTag::quantum, 1.0);
  EXPECT_NEAR(photon_number({c}).value, 1.0, 1e-10);
  const Expectations x = amplitude_expectations(c);
  EXPECT_NEAR(x.energy / (si::hbar * kW0), 1.0, 1e-6);
  EXPECT_NEAR(x.momentum / (si::hbar * 8918069.468), 1.0, 1e-6);
}

TEST(Amplitude, TagMixingAndNumberOfClassicalRejected) {
  const auto q = gaussian_amplitude(branch(), kW0, thz(0.05), 0.0, AmplitudeTag::quantum, 1.0);
  const auto cl = gaussian_amplitude(branch(), kW0, thz(0.05), 0.0, AmplitudeTag::classical, 1e-12);
  EXPECT_NEAR(transferred_energy({cl}).value, 1e-12, 1e-22);
  EXPECT_THROW(transferred_energy({q, cl}), ValidationError);
  EXPECT_THROW(spectral_density(cl, DensityKind::number), ValidationError);
}

TEST(Amplitude, ValidateRejectsBadGrids) {
  auto c = gaussian_amplitude(branch(), kW0, thz(0.05), 0.0, AmplitudeTag::quantum, 1.0, 11);
  std::swap(c.omega[3], c.omega[4]);
  EXPECT_THROW(c.validate(), ValidationError);
  auto d = gaussian_amplitude(branch(), kW0, thz(0.05), 0.0, AmplitudeTag::quantum, 1.0, 11);
  d.omega.back() = 2.0 * kW0;
  EXPECT_ANY_THROW(d.validate());
}

TEST(Trapezoid, ExactForLinearAndConvergent) {
  std::vector<double> x, y, s;
  for (int i = 0; i <= 100; ++i) {
    x.push_back(i * 0.01);
    y.push_back(3.0 * x.back() + 1.0);
    s.push_back(std::sin(x.back()));
  }
  EXPECT_NEAR(trapezoid(x, y).value, 2.5, 1e-14);
  const Integral i = trapezoid(x, s);
  EXPECT_NEAR(i.value, 1.0 - std::cos(1.0), 1e-5);
  EXPECT_GT(i.halving_estimate, std::abs(i.value - (1.0 - std::cos(1.0))));
}

// Propagation is a pure phase: every transferred quantity is invariant.
TEST(QuantumProperty, PropagationInvariance) {
  const auto c = gaussian_amplitude(branch(), kW0, thz(0.2), 1e-25, AmplitudeTag::quantum, 3.0);
  const Expectations x0 = amplitude_expectations(c);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> dz(-10.0, 10.0);
  for (int i = 0; i < 10; ++i) {
    const Expectations x = amplitude_expectations(propagate(c, dz(rng)));
    EXPECT_NEAR(x.energy, x0.energy, 1e-13 * x0.energy);
    EXPECT_NEAR(x.momentum, x0.momentum, 1e-13 * x0.momentum);
    EXPECT_NEAR(x.number, 3.0, 1e-9);
  }
}

TEST(TemporalBasis, HermiteGaussIsOrthonormal) {
  std::vector<double> w;
  const double s = thz(0.5);
  for (int i = 0; i <= 2000; ++i) w.push_back(kW0 - 12 * s + 24 * s * i / 2000.0);
  const auto basis = build_temporal_basis(branch(), HermiteGaussSpec{kW0, s, 5}, w);
  EXPECT_EQ(basis.size(), 5);
  EXPECT_LT(basis.gram_defect(), 1e-12);

  const Expectations one = fock_expectations(basis, {0, 1, 0, 0, 0});
  EXPECT_NEAR(one.number, 1.0, 1e-12);
  const Expectations two = fock_expectations(basis, {1, 0, 0, 1, 0});
  EXPECT_NEAR(two.number, 2.0, 1e-12);
  EXPECT_THROW(fock_expectations(basis, {1, 0}), ValidationError);
  EXPECT_THROW(fock_expectations(basis, {-1, 0, 0, 0, 0}), ValidationError);

  Eigen::VectorXcd alpha = Eigen::VectorXcd::Zero(5);
  alpha(1) = 1.0;
  const Expectations c1 = coefficient_expectations(basis, alpha);
  EXPECT_NEAR(c1.energy, one.energy, 1e-12 * one.energy);
}

TEST(TemporalBasis, UnresolvableGridIsNumericalError) {
  std::vector<double> w;
  for (int i = 0; i < 4; ++i) w.push_back(kW0 + i * 1e11);
  EXPECT_THROW(build_temporal_basis(branch(), HermiteGaussSpec{kW0, 1e11, 6}, w), NumericalError);
}

TEST(TemporalBasis, ExpansionReproducesAmplitude) {
  const auto c = gaussian_amplitude(branch(), kW0, thz(0.05), 0.0, AmplitudeTag::quantum, 1.0);
  Eigen::MatrixXcd samples(c.c.size(), 1);
  for (std::size_t i = 0; i < c.c.size(); ++i) samples(i, 0) = c.c[i];
  const auto basis = build_temporal_basis(branch(), samples, c.omega);
  const Eigen::VectorXcd a = expand(basis, c);
  EXPECT_NEAR(std::norm(a(0)), 1.0, 1e-10);
  const Expectations x = coefficient_expectations(basis, a), y = amplitude_expectations(c);
  EXPECT_NEAR(x.energy, y.energy, 1e-10 * y.energy);
}

TEST(Envelope, GaussianDuration) {
  const double k2 = 2e-24;
  const auto b = branch(k2, 0.0);  // no group delay: the pulse stays at t = 0
  const double fwhm = thz(0.5);
  const auto c = gaussian_amplitude(b, kW0, fwhm, 0.0, AmplitudeTag::quantum, 1.0, 3001);
  const double s = fwhm / (2.0 * std::sqrt(std::log(2.0)));  // |c|^2 FWHM -> sigma of |c|
  const double rms0 = 1.0 / (std::sqrt(2.0) * s);
  std::vector<double> t;
  for (int i = 0; i <= 4000; ++i) t.push_back(-120e-12 + 240e-12 * i / 4000.0);
  for (double z : {0.0, 1.0, 2.0}) {
    const Envelope e = temporal_envelope(c, z, t);
    EXPECT_FALSE(e.aliasing);
    EXPECT_NEAR(e.rms_duration, gaussian_rms_duration(rms0, k2, z), 1e-3 * e.rms_duration);
    EXPECT_NEAR(e.centroid, 0.0, 1e-3 * e.rms_duration);
  }
}

TEST(Envelope, ArrivalAtGroupDelay) {
  const auto c = gaussian_amplitude(branch(0.0), kW0, thz(0.5), 0.0, AmplitudeTag::quantum, 1.0, 2001);
  const double z = 0.01, t0 = kK1 * z;
  std::vector<double> t;
  for (int i = 0; i <= 2000; ++i) t.push_back(t0 - 10e-12 + 20e-12 * i / 2000.0);
  const Envelope e0 = temporal_envelope(c, 0.0, [&] {
    std::vector<double> s;
    for (double ti : t) s.push_back(ti - t0);
    return s;
  }());
  const Envelope e = temporal_envelope(c, z, t);
  EXPECT_FALSE(e.aliasing);
  EXPECT_NEAR(e.centroid, t0, 1e-6 * e.rms_duration);
  EXPECT_NEAR(e.rms_duration, e0.rms_duration, 1e-9 * e0.rms_duration);
}

TEST(Envelope, ZeroDistanceIsInverseTransform) {
  const auto c = gaussian_amplitude(branch(), kW0, thz(0.5), 0.0, AmplitudeTag::quantum, 1.0, 1001);
  std::vector<double> t;
  for (int i = 0; i <= 400; ++i) t.push_back(-10e-12 + 20e-12 * i / 400.0);
  const Envelope e = temporal_envelope(c, 0.0, t);
  // Parseval: int |A|^2 dt = int |c|^2 d omega = 1.
  std::vector<double> a2;
  for (const auto& a : e.a) a2.push_back(std::norm(a));
  EXPECT_NEAR(trapezoid(t, a2).value, 1.0, 1e-6);
  EXPECT_NEAR(e.centroid, 0.0, 1e-18);
}

TEST(Envelope, NarrowWindowFlagsAliasing) {
  const auto c = gaussian_amplitude(branch(), kW0, thz(0.5), 0.0, AmplitudeTag::quantum, 1.0, 1001);
  const Envelope e = temporal_envelope(c, 0.0, {-0.1e-12, 0.0, 0.1e-12});
  EXPECT_TRUE(e.aliasing);
}

TEST(PulseReport, JsonAndCsv) {
  const auto c = gaussian_amplitude(branch(), kW0, thz(0.5), 0.0, AmplitudeTag::quantum, 2.0, 1001);
  std::vector<double> t;
  for (int i = 0; i <= 200; ++i) t.push_back(-10e-12 + 20e-12 * i / 200.0);
  const PulseReport r = pulse_report(c, {0.0, 0.5}, t);
  EXPECT_NEAR(r.number.value, 2.0, 1e-9);
  ASSERT_EQ(r.rms_duration.size(), 2u);
  const auto j = pulse_report_json(r);
  EXPECT_EQ(j.at("normalization"), "quantum");
  const std::string csv = envelope_csv(temporal_envelope(c, 0.0, t), "z=0");
  EXPECT_EQ(static_cast<int>(std::count(csv.begin(), csv.end(), '\n')), 201 + 2);
}
