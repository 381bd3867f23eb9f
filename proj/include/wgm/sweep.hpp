#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wgm/fdsolver.hpp"
#include "wgm/geometry.hpp"
#include "wgm/materials.hpp"

namespace wgm {

/// Everything needed to solve the guided modes of one cross-section at any
/// frequency: materials, geometry, window and search parameters.
struct WaveguideModel {
  MaterialLibrary materials;
  CrossSection cross_section{"air"};
  Grid2D grid;
  RasterOptions raster;
  SearchParams search;
  /// When set, eta_min at each frequency is max(search.eta_min, largest
  /// principal index of this material), i.e. the cladding light line.
  std::optional<std::string> cladding_material;
};

/// Search parameters resolved for one frequency.
SearchParams search_at(const WaveguideModel& model, double omega);

/// Rasterizes, assembles and solves at one frequency.
ModeSet solve_at(const WaveguideModel& model, double omega);

struct BranchSample {
  double omega = 0.0;
  double k = 0.0;
  double eta = 0.0;
  double xi_e = 0.0;
  double xi_m = 0.0;
};

/// One tracked mode family. Links whose overlap falls below 0.5 are never
/// made: the family ends and the mode opens a new branch instead, so every
/// stored link has confidence >= 0.5.
struct DispersionBranch {
  std::string label;
  std::vector<BranchSample> samples;  // strictly increasing omega
  std::vector<double> confidence;     // link i joins samples i and i + 1
};

/// Mode-to-mode assignment between two adjacent frequency samples.
struct Assignment {
  std::vector<int> a_to_b;         // -1 when unmatched
  std::vector<double> confidence;  // overlap of the matched pair, 0 if unmatched
};

inline constexpr double kMinLinkConfidence = 0.5;

/// Maximizes the total profile overlap over one-to-one matchings (Hungarian
/// algorithm), ignoring pairs below kMinLinkConfidence. Both sets are visited
/// in descending-eta order, so the result does not depend on input order.
Assignment track_modes(const ModeSet& set_a, const ModeSet& set_b);

struct SweepFailure {
  double omega = 0.0;
  std::string message;
};

struct SweepResult {
  std::vector<double> omegas;  // ascending
  std::vector<DispersionBranch> branches;
  std::vector<SweepFailure> failures;
  std::vector<int> mode_counts;  // per omega, -1 for a failed solve
};

struct SweepOptions {
  int workers = 1;
  /// Called once per successful frequency, in ascending-omega order, from the
  /// calling thread.
  std::function<void(double omega, const ModeSet&)> on_solved;
};

/// Solves each frequency independently (up to `workers` at a time) and then
/// links neighbouring mode sets in ascending omega. A failed solve is recorded
/// and breaks every branch passing through it. Throws ValidationError for a
/// non-monotone grid or a frequency outside a material window.
SweepResult dispersion_sweep(const WaveguideModel& model, const std::vector<double>& omegas,
                             const SweepOptions& opts = {});

/// Plot-ready table: lambda_um, omega, k, eta, xiE, xiM, confidence (of the
/// link from the previous sample; empty for the first).
std::string branch_csv(const DispersionBranch& b, const std::string& header_comment = "");
/// Reads a table written by branch_csv ('#' lines are skipped).
DispersionBranch read_branch_csv(const std::string& text, std::string label = "");

}  // namespace wgm
