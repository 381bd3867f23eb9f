#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "wgm/constants.hpp"
#include "wgm/sweep.hpp"

namespace wgm {

/// Continuous dispersion of one branch: k(omega), xi_e(omega), xi_m(omega).
///
/// This is the single source of dispersion for quanta, spectral densities and
/// propagation. Tabulated branches interpolate k with a monotone cubic (PCHIP;
/// linear below four samples) and xi linearly. Synthetic branches use a
/// Taylor polynomial of k about omega0 and the unit-power classical
/// normalization xi_e = 4 W, xi_m = xi_e k / omega.
class BranchModel {
 public:
  static BranchModel tabulated(const DispersionBranch& branch);
  /// k(omega) = sum_n k_n (omega - omega0)^n / n! with taylor = {k0, k1, k2, ...}.
  static BranchModel taylor(std::string label, double omega0, std::vector<double> taylor,
                            double omega_min, double omega_max);

  const std::string& label() const { return label_; }
  double omega_min() const { return omega_min_; }
  double omega_max() const { return omega_max_; }
  bool contains(double omega) const { return omega >= omega_min_ && omega <= omega_max_; }

  /// All three throw RangeError outside [omega_min, omega_max].
  double k(double omega) const;
  double xi_e(double omega) const;
  double xi_m(double omega) const;

 private:
  void require(double omega) const;

  std::string label_;
  double omega_min_ = 0.0, omega_max_ = 0.0;
  std::function<double(double)> k_, xi_e_, xi_m_;
};

/// (hbar omega, hbar k(omega)) for one photon of the branch.
std::pair<double, double> photon_quanta(const BranchModel& branch, double omega);

/// classical: c in field units, densities |c|^2 xi. quantum: c in photon
/// units with int |c|^2 d omega = photon number, densities hbar omega |c|^2
/// and hbar k |c|^2.
enum class AmplitudeTag { classical, quantum };

struct SpectralAmplitude {
  std::shared_ptr<const BranchModel> branch;
  std::vector<double> omega;  // strictly increasing, inside the branch range
  std::vector<cplx> c;
  AmplitudeTag tag = AmplitudeTag::quantum;

  /// Checks the grid and branch invariants; throws ValidationError/RangeError.
  void validate() const;
};

/// Gaussian spectrum c = A exp(-(w - w0)^2 / (2 s^2) + i chirp (w - w0)^2 / 2)
/// sampled on `n` points over w0 +- `half_span_sigmas` s. The intensity |c|^2
/// has a full width at half maximum of fwhm_omega, and chirp is a group-delay
/// dispersion in s^2. A is set so that int |c|^2 = photons (quantum tag) or
/// int |c|^2 xi_e = energy_j (classical tag; `scale` is the target).
SpectralAmplitude gaussian_amplitude(std::shared_ptr<const BranchModel> branch, double omega0,
                                     double fwhm_omega, double chirp_s2, AmplitudeTag tag,
                                     double scale, int n = 2001, double half_span_sigmas = 8.0);

enum class DensityKind { energy, momentum, number };

/// Pointwise spectral density. Throws ValidationError for `number` on a
/// classical amplitude (no photon units).
std::vector<double> spectral_density(const SpectralAmplitude& c, DensityKind kind);

/// Composite trapezoid with the estimate |I(h) - I(2h)| from every second sample.
struct Integral {
  double value = 0.0;
  double halving_estimate = 0.0;
};

Integral trapezoid(const std::vector<double>& x, const std::vector<double>& y);

/// Sums over branches; all amplitudes must share a tag (ValidationError).
Integral transferred_energy(const std::vector<SpectralAmplitude>& cs);
Integral transferred_momentum(const std::vector<SpectralAmplitude>& cs);
Integral photon_number(const std::vector<SpectralAmplitude>& cs);

/// Orthonormal envelopes f^l(omega_i) on one branch, columns of `f`.
struct TemporalModeBasis {
  std::shared_ptr<const BranchModel> branch;
  std::vector<double> omega;
  Eigen::VectorXd weights;  // trapezoid weights of the grid
  Eigen::MatrixXcd f;       // n_omega x L

  int size() const { return static_cast<int>(f.cols()); }
  /// G_ll' = int f^l* f^l' d omega
  Eigen::MatrixXcd gram() const;
  /// max |G - I|
  double gram_defect() const;
};

struct HermiteGaussSpec {
  double omega0 = 0.0;
  double bandwidth = 0.0;  // s in exp(-(w - w0)^2 / (2 s^2))
  int count = 1;
};

/// Hermite-Gauss envelopes orthonormalized by weighted Gram-Schmidt on the
/// discrete grid. Throws NumericalError when the grid cannot resolve `count`
/// independent functions.
TemporalModeBasis build_temporal_basis(std::shared_ptr<const BranchModel> branch,
                                       const HermiteGaussSpec& spec,
                                       const std::vector<double>& omega);
/// Same, from user samples (columns of `samples`); the span is preserved.
TemporalModeBasis build_temporal_basis(std::shared_ptr<const BranchModel> branch,
                                       const Eigen::MatrixXcd& samples,
                                       const std::vector<double>& omega);

struct Expectations {
  double energy = 0.0;    // <F>, J
  double momentum = 0.0;  // <G>, kg m / s
  double number = 0.0;    // <N>
};

/// Normal-ordered expectations in the Fock state with n^l photons in f^l.
/// The vacuum terms hbar omega / 2 and hbar k / 2 integrate to infinity over
/// the continuum and are dropped.
Expectations fock_expectations(const TemporalModeBasis& basis, const std::vector<int>& occupations);

/// One photon in the superposition sum_l alpha_l f^l (alpha need not be
/// normalized; <N> = |alpha|^2).
Expectations coefficient_expectations(const TemporalModeBasis& basis, const Eigen::VectorXcd& alpha);

/// alpha_l = int f^l* c d omega (c must live on the basis grid).
Eigen::VectorXcd expand(const TemporalModeBasis& basis, const SpectralAmplitude& c);

/// Direct expectations of a quantum-tagged amplitude: one photon-number
/// density |c|^2 (hbar omega, hbar k, 1).
Expectations amplitude_expectations(const SpectralAmplitude& c);

/// c'(omega) = c(omega) exp(i k(omega) dz).
SpectralAmplitude propagate(const SpectralAmplitude& c, double dz);

struct Envelope {
  std::vector<double> t;
  std::vector<cplx> a;
  double centroid = 0.0;      // int t |A|^2 / int |A|^2
  double rms_duration = 0.0;  // sqrt(int (t - centroid)^2 |A|^2 / int |A|^2)
  bool aliasing = false;      // |A| at a grid edge above 1e-3 of the peak
};

/// A(t) = (2 pi)^(-1/2) int c(omega) exp(i k(omega) z - i omega t) d omega.
Envelope temporal_envelope(const SpectralAmplitude& c, double z, const std::vector<double>& t);

/// RMS duration of a transform-limited Gaussian after propagating z on a
/// branch with curvature k2: rms0 sqrt(1 + (k2 z / (2 rms0^2))^2).
double gaussian_rms_duration(double rms0, double k2, double z);

struct PulseReport {
  AmplitudeTag tag = AmplitudeTag::quantum;
  Integral energy, momentum, number;
  std::vector<double> z;
  std::vector<double> rms_duration;
  std::vector<double> arrival_time;
  std::vector<bool> aliasing;
};

/// Quanta, transfers and per-z envelope statistics of one amplitude.
PulseReport pulse_report(const SpectralAmplitude& c, const std::vector<double>& z,
                         const std::vector<double>& t);

nlohmann::json pulse_report_json(const PulseReport& r);
/// t, Re A, Im A, |A|^2
std::string envelope_csv(const Envelope& e, const std::string& header_comment = "");

}  // namespace wgm
