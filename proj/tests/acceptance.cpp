// Acceptance run over the bundled configurations. Prints one PASS/FAIL line
// per criterion (details indented below it) and exits non-zero on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "wgm/config.hpp"
#include "wgm/oracle.hpp"
#include "wgm/validation.hpp"

using namespace wgm;

namespace {

const std::string kConfigs = std::string(WGM_SOURCE_DIR) + "/configs/";

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(3) << v;
  return os.str();
}

struct Line {
  int id;
  bool pass;
  std::string title;
  std::vector<std::string> details;
};

std::vector<Line> g_lines;

void report(int id, bool pass, std::string title, std::vector<std::string> details) {
  g_lines.push_back({id, pass, title, details});
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << ": " << title << "\n";
  for (const auto& d : details) std::cout << "     " << d << "\n";
  std::cout.flush();
}

WaveguideModel regridded(WaveguideModel m, int nx, int ny) {
  const Grid2D& g = m.grid;
  m.grid = Grid2D(g.x0, g.x1, g.y0, g.y1, nx, ny);
  return m;
}

double worst_ratio(const std::vector<ModeProfile>& modes, Quadrature q) {
  double w = 0.0;
  for (const auto& m : modes) w = std::max(w, ratio_check(m, q));
  return w;
}

double worst_cancellation(const std::vector<ModeProfile>& modes, Quadrature q) {
  double w = 0.0;
  for (const auto& m : modes) w = std::max(w, appendix_c_cancellation(m, q).cancellation());
  return w;
}

// Identity diagnostics of one (config, wavelength) case at its configured
// grid and at half resolution.
struct RefinementCase {
  std::string label;
  int modes = 0;
  double ratio_native = 0.0, cancel_native = 0.0;
  double ratio_coarse = 0.0, ratio_fine = 0.0;    // cell-centred
  double cancel_coarse = 0.0, cancel_fine = 0.0;  // cell-centred
};

RefinementCase refinement_case(std::string label, const std::vector<ModeProfile>& fine,
                               const std::vector<ModeProfile>& coarse) {
  RefinementCase c;
  c.label = std::move(label);
  c.modes = static_cast<int>(fine.size());
  c.ratio_native = worst_ratio(fine, Quadrature::yee_native);
  c.cancel_native = worst_cancellation(fine, Quadrature::yee_native);
  c.ratio_fine = worst_ratio(fine, Quadrature::cell_centered);
  c.ratio_coarse = worst_ratio(coarse, Quadrature::cell_centered);
  c.cancel_fine = worst_cancellation(fine, Quadrature::cell_centered);
  c.cancel_coarse = worst_cancellation(coarse, Quadrature::cell_centered);
  return c;
}

std::vector<RefinementCase> g_cases;

void criterion_1_and_box_cases() {
  const RunConfig cfg = load_run_config(kConfigs + "vacuum_box.toml");
  const double lambda = cfg.solve_lambda_um.value();
  const double omega = omega_from_lambda_um(lambda);
  const Grid2D& g = cfg.model->grid;
  const double exact = box_modes(g.x1 - g.x0, g.y1 - g.y0, 1.0, omega).front().eta;

  WaveguideModel single = *cfg.model;
  single.search.n_eigs = 1;
  std::vector<double> eta;
  const auto t0 = Clock::now();
  for (int n : {64, 128, 256}) eta.push_back(solve_at(regridded(single, n, n), omega).modes.at(0).eta);
  const double secs = seconds_since(t0);
  const auto order = convergence_order(eta[0], eta[1], eta[2]);
  const double err = std::abs(eta[1] - exact);
  const bool pass = err < 1e-4 && order && std::abs(*order - 2.0) <= 0.3 && secs < 60.0;
  report(1, pass, "PEC vacuum box, fundamental eta, convergence order, runtime",
         {"eta(128) = " + std::to_string(eta[1]) + ", |eta - sqrt(0.75)| = " + sci(err) + " (< 1e-4)",
          "eta(64, 128, 256) = " + std::to_string(eta[0]) + ", " + std::to_string(eta[1]) + ", " +
              std::to_string(eta[2]),
          "order = " + (order ? std::to_string(*order) : std::string("undefined")) + " (2.0 +- 0.3)",
          "runtime " + std::to_string(secs) + " s (< 60 s)"});

  const auto fine = solve_at(*cfg.model, omega).modes;
  const auto coarse = solve_at(regridded(*cfg.model, g.nx / 2, g.ny / 2), omega).modes;
  g_cases.push_back(refinement_case("vacuum_box 1.0 um", fine, coarse));
}

void criterion_2_and_slab_cases() {
  const RunConfig cfg = load_run_config(kConfigs + "slab.toml");
  const double lambda = cfg.solve_lambda_um.value();
  const double omega = omega_from_lambda_um(lambda);
  // Enough modes to reach the first y-polarized (TM) one behind the
  // x-polarized kx = 0 and kx = pi / a entries.
  WaveguideModel m = *cfg.model;
  m.search.n_eigs = 4;
  const auto modes = solve_at(m, omega).modes;
  double te = NAN, tm = NAN;
  for (const auto& p : modes) {
    if (is_x_polarized(p) && std::isnan(te)) te = p.eta;
    if (!is_x_polarized(p) && std::isnan(tm)) tm = remove_x_envelope(p.eta, m.grid, omega);
  }
  const double te_ref = slab_dispersion(1.50, 1.45, 2e-6, lambda * 1e-6, SlabPolarization::te).front();
  const double tm_ref = slab_dispersion(1.50, 1.45, 2e-6, lambda * 1e-6, SlabPolarization::tm).front();
  const double dte = std::abs(te - te_ref), dtm = std::abs(tm - tm_ref);
  report(2, dte < 5e-4 && dtm < 5e-4 && m.grid.ny >= 400, "symmetric slab TE0 / TM0 vs transcendental oracle",
         {"Ny = " + std::to_string(m.grid.ny),
          "TE0 " + std::to_string(te) + " vs " + std::to_string(te_ref) + ", diff " + sci(dte) + " (< 5e-4)",
          "TM0 " + std::to_string(tm) + " vs " + std::to_string(tm_ref) + ", diff " + sci(dtm) +
              " (< 5e-4, x envelope removed)"});

  const auto coarse = solve_at(regridded(m, m.grid.nx / 2, m.grid.ny / 2), omega).modes;
  g_cases.push_back(refinement_case("slab 1.55 um", modes, coarse));
}

void criteria_3_and_5_and_tfln_cases() {
  const RunConfig cfg = load_run_config(kConfigs + "tfln.toml");
  const WaveguideModel& model = *cfg.model;
  std::vector<double> omegas;
  for (double l : cfg.sweep_lambda_um) omegas.push_back(omega_from_lambda_um(l));
  std::sort(omegas.begin(), omegas.end());

  std::vector<std::string> ortho;
  bool ortho_ok = model.grid.nx <= 300 && model.grid.ny <= 200;
  std::map<double, std::vector<ModeProfile>> fine;
  ModeSet at_1550;
  SweepOptions opts;
  opts.on_solved = [&](double omega, const ModeSet& ms) {
    const CrossProductReport r = cross_product_report(ms.modes, cfg.orthogonality.quadrature);
    const bool ok = ms.modes.size() >= 2 && r.worst_energy_offdiag < 1e-3 && r.worst_momentum_offdiag < 1e-3;
    ortho_ok = ortho_ok && ok;
    std::ostringstream os;
    os << "lambda " << std::setprecision(3) << lambda_um_from_omega(omega) << " um: " << ms.modes.size()
       << " modes, worst off-diagonal xiE " << sci(r.worst_energy_offdiag) << ", xiM "
       << sci(r.worst_momentum_offdiag) << (ok ? "" : "  <-- fails");
    ortho.push_back(os.str());
    fine[omega] = ms.modes;
    if (std::abs(lambda_um_from_omega(omega) - 1.55) < 1e-9) at_1550 = ms;
  };
  const auto t0 = Clock::now();
  const SweepResult sweep = dispersion_sweep(model, omegas, opts);
  const double secs = seconds_since(t0);
  ortho_ok = ortho_ok && sweep.failures.empty() && secs < 1200.0;
  ortho.insert(ortho.begin(), "grid " + std::to_string(model.grid.nx) + " x " + std::to_string(model.grid.ny) +
                                  ", quadrature " + to_string(cfg.orthogonality.quadrature));
  ortho.push_back("runtime " + std::to_string(secs) + " s (< 1200 s)");
  for (const auto& f : sweep.failures) ortho.push_back("solve failed: " + f.message);
  report(3, ortho_ok, "TFLN normalized off-diagonal cross products < 1e-3 at 0.6, 0.8, 1.0, 1.55 um", ortho);

  // Criterion 5: the two highest-eta tracked branches at 1.55 um.
  std::vector<const ModeProfile*> tracked;
  const double w1550 = omega_from_lambda_um(1.55);
  for (const auto& b : sweep.branches)
    for (const auto& s : b.samples)
      if (std::abs(s.omega - w1550) < 1e-6 * w1550)
        for (const auto& m : at_1550.modes)
          if (m.eta == s.eta) tracked.push_back(&m);
  std::sort(tracked.begin(), tracked.end(), [](auto* a, auto* b) { return a->eta > b->eta; });
  if (tracked.size() >= 2) {
    const double h0 = hybridness(*tracked[0]), h1 = hybridness(*tracked[1]);
    const double de = std::abs(tracked[0]->eta - tracked[1]->eta);
    report(5, h0 > 0.1 && h1 > 0.1 && de < 0.05, "TFLN hybridness of the two tracked modes at 1.55 um",
           {"eta " + std::to_string(tracked[0]->eta) + ", " + std::to_string(tracked[1]->eta) + ", |d eta| " +
                sci(de) + " (< 0.05)",
            "min/max(int|Ex|^2, int|Ey|^2) = " + std::to_string(h0) + ", " + std::to_string(h1) + " (> 0.1)",
            std::to_string(sweep.branches.size()) + " branches tracked over " + std::to_string(omegas.size()) +
                " wavelengths"});
  } else {
    report(5, false, "TFLN hybridness of the two tracked modes at 1.55 um",
           {"fewer than two tracked modes at 1.55 um"});
  }

  for (const auto& [omega, modes] : fine) {
    const auto coarse =
        solve_at(regridded(model, model.grid.nx / 2, model.grid.ny / 2), omega).modes;
    std::ostringstream label;
    label << "tfln " << std::setprecision(3) << lambda_um_from_omega(omega) << " um";
    g_cases.push_back(refinement_case(label.str(), modes, coarse));
  }
}

void criterion_4() {
  bool pass = true;
  std::vector<std::string> d{"worst over modes; native = solver inner product, cc = cell-centred (coarse -> fine)"};
  for (const auto& c : g_cases) {
    const bool ok = c.modes > 0 && c.ratio_native < 1e-3 && c.ratio_fine < 1e-3 && c.ratio_fine < c.ratio_coarse;
    pass = pass && ok;
    d.push_back(c.label + ": " + std::to_string(c.modes) + " modes, native " + sci(c.ratio_native) + ", cc " +
                sci(c.ratio_coarse) + " -> " + sci(c.ratio_fine) + (ok ? "" : "  <-- fails"));
  }
  report(4, pass, "|xiE/xiM - omega/k| k/omega < 1e-3 on every mode, decreasing under refinement", d);
}

void criterion_6() {
  const double l3 = lemma3_suite();
  const double l2 = lemma2_suite();
  bool pass = l3 < 1e-12 && l2 < 1e-14;
  std::vector<std::string> d{"R = div Q + W residual " + sci(l3) + " over 100 field pairs (< 1e-12)",
                             "Hermitian symmetry defect " + sci(l2) + " over 1000 Hermitian tensors (< 1e-14)"};
  for (const auto& c : g_cases) {
    const bool ok = c.cancel_native < 1e-3 && c.cancel_fine < 1e-3 && c.cancel_fine < c.cancel_coarse;
    pass = pass && ok;
    d.push_back("|I2+I3|/|I1| " + c.label + ": native " + sci(c.cancel_native) + ", cc " + sci(c.cancel_coarse) +
                " -> " + sci(c.cancel_fine) + (ok ? "" : "  <-- fails"));
  }
  report(6, pass, "identity suite (flux identity, momentum-identity cancellation, Hermitian symmetry)", d);
}

void criteria_7_to_9() {
  const QuantumChecks q = quantum_checks();
  report(7,
         q.single_photon_energy < 1e-6 && q.single_photon_momentum < 1e-6 && q.single_photon_number < 1e-6 &&
             q.propagation_invariance < 1e-12,
         "single-photon quanta and propagation invariance",
         {"relative errors <F> " + sci(q.single_photon_energy) + ", <G> " + sci(q.single_photon_momentum) +
              ", |<N> - 1| " + sci(q.single_photon_number) + " (< 1e-6)",
          "F, G, N change under 10 random dz: " + sci(q.propagation_invariance) + " (< 1e-12)"});
  report(8, q.gvd_duration < 1e-3 && q.linear_duration < 1e-6, "dispersion spreading",
         {"quadratic branch: worst relative duration error " + sci(q.gvd_duration) + " at 5 z (< 1e-3)",
          "linear branch: worst relative duration change " + sci(q.linear_duration) + " (< 1e-6), arrival error " +
              sci(q.linear_arrival) + " rms"});
  report(9, q.gram_defect < 1e-12 && q.basis_invariance < 1e-10, "temporal modes",
         {"L = 5 Hermite-Gauss max |G - I| " + sci(q.gram_defect) + " (< 1e-12)",
          "expectation change under a unitary basis change " + sci(q.basis_invariance) + " (< 1e-10)"});
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  try {
    criterion_1_and_box_cases();
    criterion_2_and_slab_cases();
    criteria_3_and_5_and_tfln_cases();
    criterion_4();
    criterion_6();
    criteria_7_to_9();
  } catch (const std::exception& e) {
    std::cout << "FAIL acceptance aborted: " << e.what() << "\n";
    return 1;
  }
  std::sort(g_lines.begin(), g_lines.end(), [](const Line& a, const Line& b) { return a.id < b.id; });
  int failed = 0;
  std::cout << "\nsummary (" << std::fixed << std::setprecision(0) << seconds_since(t0) << " s)\n";
  for (const auto& l : g_lines) {
    std::cout << (l.pass ? "PASS" : "FAIL") << " criterion " << l.id << ": " << l.title << "\n";
    failed += l.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
