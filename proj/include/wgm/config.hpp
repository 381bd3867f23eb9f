#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wgm/modes.hpp"
#include "wgm/quantum.hpp"
#include "wgm/sweep.hpp"

namespace wgm {

struct OrthogonalityOptions {
  Quadrature quadrature = kDefaultQuadrature;
  double offdiag_max = 1e-3;  // gate on normalized off-diagonal cross products
  double ratio_max = 1e-3;    // gate on |xi_e / xi_m - omega / k| k / omega
};

struct PulseBranchSpec {
  enum class Kind { taylor, file } kind = Kind::taylor;
  // taylor
  double center_um = 1.55;
  std::vector<double> k;  // k0 (1/m), k1 (s/m), k2 (s^2/m), ...
  double span_thz = 0.0;  // branch range: center +- span / 2
  // file (written by `wgm sweep`)
  std::string path;
};

struct PulseSpec {
  std::string name;
  PulseBranchSpec branch;
  AmplitudeTag normalization = AmplitudeTag::quantum;
  double photons = 1.0;   // quantum
  double energy_j = 0.0;  // classical
  // spectrum: gaussian or file (columns omega, re_c, im_c)
  std::string spectrum_kind = "gaussian";
  double center_um = 1.55;
  double fwhm_thz = 1.0;
  double chirp_fs2 = 0.0;
  int samples = 2001;
  double span_sigmas = 8.0;
  std::string spectrum_path;
  std::vector<double> z_m = {0.0};
  double t_min_ps = -5.0, t_max_ps = 5.0;
  int t_samples = 2001;
};

/// Parsed and validated run configuration. Sections are optional; each
/// command checks for the ones it needs.
struct RunConfig {
  std::string path;  // empty for configs parsed from a string
  std::string hash;  // FNV-1a of the raw text
  std::string name;
  std::string out_dir = "out";
  int workers = 1;
  std::optional<WaveguideModel> model;
  std::optional<double> solve_lambda_um;
  std::vector<double> sweep_lambda_um;
  OrthogonalityOptions orthogonality;
  std::vector<PulseSpec> pulses;
};

/// Unknown keys, wrong types and inconsistent values (e.g. eta_min > eta_max)
/// raise ValidationError naming the offending fields. Relative paths resolve
/// against `base_dir`.
RunConfig parse_run_config(const std::string& text, const std::string& base_dir = ".");
RunConfig load_run_config(const std::string& path);

/// Branch model and spectral amplitude described by a pulse spec.
std::shared_ptr<const BranchModel> make_pulse_branch(const PulseSpec& p);
SpectralAmplitude make_pulse_amplitude(const PulseSpec& p, std::shared_ptr<const BranchModel> branch);

}  // namespace wgm
