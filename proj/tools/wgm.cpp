#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "wgm/config.hpp"
#include "wgm/errors.hpp"
#include "wgm/io.hpp"
#include "wgm/modes.hpp"
#include "wgm/validation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wgm;

namespace {

enum Exit { kOk = 0, kInput = 1, kNumerical = 2, kGate = 3 };

struct Options {
  std::string config;
  std::string out;
  int workers = 0;
  double lambda_um = 0.0;
  std::string fault;
};

// Flag, then environment, then config.
std::string resolve_out(const Options& o, const std::string& from_config) {
  if (!o.out.empty()) return o.out;
  if (const char* env = std::getenv("WGM_OUT"); env && *env) return env;
  return from_config;
}

int resolve_workers(const Options& o, int from_config) {
  if (o.workers > 0) return o.workers;
  if (const char* env = std::getenv("WGM_WORKERS"); env && *env) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (*end != '\0' || n < 1 || n > 1024)
      throw ValidationError("WGM_WORKERS must be a positive integer, got '" + std::string(env) + "'");
    return static_cast<int>(n);
  }
  return std::max(1, from_config);
}

RunConfig load(const Options& o) {
  if (o.config.empty()) throw ValidationError("--config is required for this command");
  return load_run_config(o.config);
}

const WaveguideModel& require_model(const RunConfig& cfg) {
  if (!cfg.model) throw ValidationError("config has no [geometry]/[grid] sections; nothing to solve");
  return *cfg.model;
}

std::string with_header(const std::string& prov, const std::string& body) {
  return "# " + prov + "\n" + body;
}

std::string json_text(json j, const std::string& prov) {
  j["provenance"] = prov;
  return j.dump(2) + "\n";
}

std::string lambda_tag(double lambda_um) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << lambda_um;
  return os.str();
}

struct GateResult {
  bool pass = true;
  std::string message;
};

GateResult gate(const CrossProductReport& r, const OrthogonalityOptions& o) {
  GateResult g;
  std::ostringstream os;
  if (r.worst_energy_offdiag >= o.offdiag_max || r.worst_momentum_offdiag >= o.offdiag_max) {
    g.pass = false;
    os << "off-diagonal cross products " << r.worst_energy_offdiag << " / " << r.worst_momentum_offdiag
       << " exceed " << o.offdiag_max << "; ";
  }
  if (r.worst_ratio_error >= o.ratio_max) {
    g.pass = false;
    os << "xiE/xiM ratio error " << r.worst_ratio_error << " exceeds " << o.ratio_max << "; ";
  }
  g.message = os.str();
  return g;
}

void print_modes(double lambda_um, const ModeSet& ms, const CrossProductReport& r) {
  std::cout << "lambda " << lambda_um << " um: " << ms.modes.size() << " mode(s)\n";
  for (std::size_t i = 0; i < ms.modes.size(); ++i)
    std::cout << "  [" << i << "] eta " << std::setprecision(10) << ms.modes[i].eta << "  residual "
              << std::setprecision(3) << ms.modes[i].residual << "  decay " << ms.modes[i].decay << "\n";
  std::cout << std::setprecision(3) << "  worst off-diagonal energy " << r.worst_energy_offdiag << ", momentum "
            << r.worst_momentum_offdiag << ", ratio error " << r.worst_ratio_error << " ("
            << to_string(r.quadrature) << ")\n"
            << std::setprecision(6);
}

int cmd_solve(const Options& o) {
  const RunConfig cfg = load(o);
  const WaveguideModel& model = require_model(cfg);
  const double lambda_um = o.lambda_um > 0.0 ? o.lambda_um : cfg.solve_lambda_um.value_or(0.0);
  if (!(lambda_um > 0.0)) throw ValidationError("no wavelength: pass --lambda or set solver.lambda_um");
  const std::string out = resolve_out(o, cfg.out_dir);
  const std::string prov = provenance(cfg.hash);

  const ModeSet ms = solve_at(model, omega_from_lambda_um(lambda_um));
  const CrossProductReport r = cross_product_report(ms.modes, cfg.orthogonality.quadrature);

  json manifest;
  manifest["lambda_um"] = lambda_um;
  manifest["omega"] = ms.omega;
  manifest["format"] = "WGMMODE v1, see io.hpp";
  json files = json::array();
  for (std::size_t i = 0; i < ms.modes.size(); ++i) {
    std::ostringstream name;
    name << "mode_" << std::setw(3) << std::setfill('0') << i << ".bin";
    write_mode_binary((fs::path(out) / "modes" / name.str()).string(), ms.modes[i]);
    files.push_back({{"file", name.str()}, {"eta", ms.modes[i].eta}});
  }
  manifest["modes"] = files;
  write_text_file((fs::path(out) / "modes" / "manifest.json").string(), json_text(manifest, prov));
  write_text_file((fs::path(out) / "modes.csv").string(), mode_scalars_csv(ms.modes, prov));
  write_text_file((fs::path(out) / "cross_products.csv").string(), with_header(prov, report_csv(r)));
  json rj = report_json(r);
  rj["lambda_um"] = lambda_um;
  write_text_file((fs::path(out) / "cross_products.json").string(), json_text(rj, prov));

  print_modes(lambda_um, ms, r);
  if (static_cast<int>(ms.modes.size()) < model.search.n_eigs)
    std::cout << "  note: " << ms.modes.size() << " of " << model.search.n_eigs
              << " requested modes lie in the search window\n";
  const GateResult g = gate(r, cfg.orthogonality);
  if (!g.pass) {
    std::cerr << "gate failed: " << g.message << "\n";
    return kGate;
  }
  return kOk;
}

int cmd_sweep(const Options& o) {
  const RunConfig cfg = load(o);
  const WaveguideModel& model = require_model(cfg);
  if (cfg.sweep_lambda_um.empty()) throw ValidationError("config has no sweep.lambda_um list");
  const std::string out = resolve_out(o, cfg.out_dir);
  const std::string prov = provenance(cfg.hash);

  std::vector<double> omegas;
  for (double l : cfg.sweep_lambda_um) omegas.push_back(omega_from_lambda_um(l));
  std::sort(omegas.begin(), omegas.end());

  bool gates_ok = true;
  json per_lambda = json::array();
  SweepOptions opts;
  opts.workers = resolve_workers(o, cfg.workers);
  // Runs on the calling thread in ascending omega: the single writer.
  opts.on_solved = [&](double omega, const ModeSet& ms) {
    const double lambda_um = lambda_um_from_omega(omega);
    const CrossProductReport r = cross_product_report(ms.modes, cfg.orthogonality.quadrature);
    const std::string tag = lambda_tag(lambda_um);
    write_text_file((fs::path(out) / ("modes_lambda_" + tag + ".csv")).string(), mode_scalars_csv(ms.modes, prov));
    json rj = report_json(r);
    rj["lambda_um"] = lambda_um;
    write_text_file((fs::path(out) / ("cross_products_lambda_" + tag + ".json")).string(), json_text(rj, prov));
    const GateResult g = gate(r, cfg.orthogonality);
    if (!g.pass) {
      gates_ok = false;
      std::cerr << "gate failed at lambda " << tag << " um: " << g.message << "\n";
    }
    per_lambda.push_back({{"lambda_um", lambda_um},
                          {"modes", ms.modes.size()},
                          {"worst_energy_offdiag", r.worst_energy_offdiag},
                          {"worst_momentum_offdiag", r.worst_momentum_offdiag},
                          {"worst_ratio_error", r.worst_ratio_error},
                          {"gate_pass", g.pass}});
    print_modes(lambda_um, ms, r);
  };
  const SweepResult res = dispersion_sweep(model, omegas, opts);

  json branches = json::array();
  for (const auto& b : res.branches) {
    const std::string file = "branch_" + b.label + ".csv";
    write_text_file((fs::path(out) / "branches" / file).string(), branch_csv(b, prov));
    double min_conf = 1.0;
    for (double c : b.confidence) min_conf = std::min(min_conf, c);
    branches.push_back({{"label", b.label},
                        {"file", "branches/" + file},
                        {"samples", b.samples.size()},
                        {"min_link_confidence", b.confidence.empty() ? json(nullptr) : json(min_conf)}});
  }
  json failures = json::array();
  for (const auto& f : res.failures) {
    failures.push_back({{"lambda_um", lambda_um_from_omega(f.omega)}, {"message", f.message}});
    std::cerr << "solve failed at lambda " << lambda_um_from_omega(f.omega) << " um: " << f.message << "\n";
  }
  json summary{{"per_lambda", per_lambda}, {"branches", branches}, {"failures", failures}};
  write_text_file((fs::path(out) / "sweep.json").string(), json_text(summary, prov));
  std::cout << res.branches.size() << " branch(es) over " << omegas.size() << " wavelength(s)\n";

  if (!res.failures.empty()) return kNumerical;
  return gates_ok ? kOk : kGate;
}

int cmd_validate(const Options& o) {
  if (o.fault == "odot-sign") {
    set_odot_sign_fault(true);
  } else if (!o.fault.empty()) {
    throw ValidationError("unknown fault '" + o.fault + "'");
  }
  const std::string out = resolve_out(o, "out/validate");
  const std::string prov = provenance(fnv1a_hex(o.fault.empty() ? "validate" : "validate:" + o.fault));
  // Fail on an unwritable destination before spending minutes on the suite.
  const std::string path = (fs::path(out) / "validation.json").string();
  write_text_file(path, json_text(json{{"status", "running"}}, prov));

  const std::vector<Check> checks = run_validation_suite();
  bool all = true;
  for (const auto& c : checks) {
    all = all && c.pass;
    std::cout << (c.pass ? "PASS " : "FAIL ") << std::left << std::setw(28) << c.name << std::right
              << std::setprecision(3) << c.value << " (< " << c.tolerance << ")"
              << (c.detail.empty() ? "" : "  " + c.detail) << "\n";
  }
  write_text_file(path, json_text(json{{"checks", checks_json(checks)}, {"pass", all}}, prov));
  return all ? kOk : kGate;
}

int cmd_pulse(const Options& o) {
  const RunConfig cfg = load(o);
  if (cfg.pulses.empty()) throw ValidationError("config has no [[pulse]] entries");
  const std::string out = resolve_out(o, cfg.out_dir);
  const std::string prov = provenance(cfg.hash);
  for (const auto& p : cfg.pulses) {
    const auto branch = make_pulse_branch(p);
    const SpectralAmplitude amp = make_pulse_amplitude(p, branch);
    std::vector<double> t(p.t_samples);
    for (int i = 0; i < p.t_samples; ++i)
      t[i] = 1e-12 * (p.t_min_ps + (p.t_max_ps - p.t_min_ps) * i / (p.t_samples - 1));
    const PulseReport r = pulse_report(amp, p.z_m, t);

    json j = pulse_report_json(r);
    j["name"] = p.name;
    j["branch"] = branch->label();
    const double w0 = omega_from_lambda_um(p.center_um);
    if (branch->contains(w0)) {
      const auto [e0, g0] = photon_quanta(*branch, w0);
      j["center_quanta"] = {{"omega0", w0}, {"hbar_omega0_j", e0}, {"hbar_k0_kg_m_s", g0}};
    }
    write_text_file((fs::path(out) / ("pulse_" + p.name + ".json")).string(), json_text(j, prov));
    for (std::size_t i = 0; i < p.z_m.size(); ++i) {
      const Envelope e = temporal_envelope(amp, p.z_m[i], t);
      std::ostringstream name;
      name << "envelope_" << p.name << "_z" << i << ".csv";
      write_text_file((fs::path(out) / name.str()).string(),
                      envelope_csv(e, prov + " z_m " + std::to_string(p.z_m[i])));
      if (e.aliasing)
        std::cerr << "warning: " << p.name << " envelope at z = " << p.z_m[i]
                  << " m reaches the time-window edge\n";
    }
    std::cout << p.name << ": energy " << r.energy.value << " J, momentum " << r.momentum.value << " kg m/s";
    if (r.tag == AmplitudeTag::quantum) std::cout << ", photons " << r.number.value;
    std::cout << "\n";
    for (std::size_t i = 0; i < r.z.size(); ++i)
      std::cout << "  z " << r.z[i] << " m: rms " << r.rms_duration[i] << " s, arrival " << r.arrival_time[i]
                << " s\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Full-vectorial finite-difference waveguide mode solver and pulse bookkeeping"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", o.config, "TOML run configuration");
    if (needs_config) c->required();
    sub->add_option("--out", o.out, "output directory (overrides WGM_OUT and the config)");
    sub->add_option("--workers", o.workers, "parallel frequency solves (overrides WGM_WORKERS)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--lambda", o.lambda_um, "vacuum wavelength in um")->check(CLI::PositiveNumber);
  };
  auto* solve = app.add_subcommand("solve", "solve the guided modes at one wavelength");
  auto* sweep = app.add_subcommand("sweep", "solve over the sweep wavelengths and track branches");
  auto* validate = app.add_subcommand("validate", "run the self-contained oracle suite");
  auto* pulse = app.add_subcommand("pulse", "pulse quanta, transfers and envelopes");
  add_common(solve, true);
  add_common(sweep, true);
  add_common(validate, false);
  add_common(pulse, true);
  validate->add_option("--fault", o.fault)->group("");  // mutation testing only

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInput;
  }

  try {
    if (*solve) return cmd_solve(o);
    if (*sweep) return cmd_sweep(o);
    if (*validate) return cmd_validate(o);
    if (*pulse) return cmd_pulse(o);
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kInput;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kInput;
  } catch (const RangeError& e) {
    std::cerr << "out of range: " << e.what() << "\n";
    return kInput;
  } catch (const ModelError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return kInput;
  }
  return kInput;
}
