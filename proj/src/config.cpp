#include "wgm/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include "wgm/errors.hpp"
#include "wgm/io.hpp"
#include "wgm/toml.hpp"

namespace wgm {

namespace {

using nlohmann::json;

// Checked view of one TOML table: every key must be consumed or listed.
class Table {
 public:
  Table(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ValidationError(where_ + " must be a table");
  }

  void allow(std::initializer_list<const char*> keys) const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      bool ok = false;
      for (const char* k : keys) ok = ok || it.key() == k;
      if (!ok) throw ValidationError(where_ + ": unknown key '" + it.key() + "'");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& raw(const char* key) const { return j_.at(key); }
  std::string path(const char* key) const { return where_ + "." + key; }

  double num(const char* key, double fallback) const { return has(key) ? num(key) : fallback; }
  double num(const char* key) const {
    require(key);
    const json& v = j_.at(key);
    if (!v.is_number()) throw ValidationError(path(key) + " must be a number");
    return v.get<double>();
  }
  int integer(const char* key, int fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ValidationError(path(key) + " must be an integer");
    return v.get<int>();
  }
  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ValidationError(path(key) + " must be true or false");
    return v.get<bool>();
  }
  std::string str(const char* key, const std::string& fallback) const {
    return has(key) ? str(key) : fallback;
  }
  std::string str(const char* key) const {
    require(key);
    const json& v = j_.at(key);
    if (!v.is_string()) throw ValidationError(path(key) + " must be a string");
    return v.get<std::string>();
  }
  std::vector<double> nums(const char* key) const {
    require(key);
    const json& v = j_.at(key);
    if (!v.is_array()) throw ValidationError(path(key) + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ValidationError(path(key) + " must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  Table sub(const char* key) const {
    require(key);
    return Table(j_.at(key), path(key));
  }

 private:
  void require(const char* key) const {
    if (!has(key)) throw ValidationError(where_ + ": missing required key '" + key + "'");
  }
  const json& j_;
  std::string where_;
};

double deg(double d) { return d * si::pi / 180.0; }

std::string resolve(const std::string& base_dir, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_absolute()) return p;
  return (std::filesystem::path(base_dir) / path).lexically_normal().string();
}

std::optional<RotationSpec> parse_rotation(const Table& t) {
  if (!t.has("rotation")) return std::nullopt;
  const json& steps = t.raw("rotation");
  if (!steps.is_array()) throw ValidationError(t.path("rotation") + " must be an array of tables");
  RotationSpec r;
  int idx = 0;
  for (const auto& s : steps) {
    Table st(s, t.path("rotation") + "[" + std::to_string(idx++) + "]");
    st.allow({"matrix", "axis", "angle_deg"});
    if (st.has("matrix")) {
      const json& m = st.raw("matrix");
      if (!m.is_array() || m.size() != 3) throw ValidationError(st.path("matrix") + " must be 3x3");
      Eigen::Matrix3d mat;
      for (int i = 0; i < 3; ++i) {
        if (!m[i].is_array() || m[i].size() != 3) throw ValidationError(st.path("matrix") + " must be 3x3");
        for (int j = 0; j < 3; ++j) {
          if (!m[i][j].is_number()) throw ValidationError(st.path("matrix") + " must hold numbers");
          mat(i, j) = m[i][j].get<double>();
        }
      }
      r = r.then(RotationSpec::from_matrix(mat));
    } else {
      const auto axis = st.nums("axis");
      if (axis.size() != 3) throw ValidationError(st.path("axis") + " must have 3 entries");
      r = r.then(RotationSpec(Eigen::Vector3d(axis[0], axis[1], axis[2]), deg(st.num("angle_deg"))));
    }
  }
  return r;
}

Shape parse_shape(const Table& t) {
  const std::string kind = t.str("shape");
  const double um = 1e-6;
  if (kind == "full_plane") {
    t.allow({"shape", "material", "rotation"});
    return FullPlane{};
  }
  if (kind == "half_plane") {
    t.allow({"shape", "material", "rotation", "y_um", "side"});
    const std::string side = t.str("side", "below");
    if (side != "below" && side != "above")
      throw ValidationError(t.path("side") + " must be \"below\" or \"above\"");
    return HalfPlane{t.num("y_um") * um, side == "below"};
  }
  if (kind == "rectangle") {
    t.allow({"shape", "material", "rotation", "x0_um", "x1_um", "y0_um", "y1_um"});
    Rectangle r{t.num("x0_um") * um, t.num("x1_um") * um, t.num("y0_um") * um, t.num("y1_um") * um};
    if (!(r.x0 < r.x1) || !(r.y0 < r.y1))
      throw ValidationError(t.path("shape") + ": rectangle needs x0_um < x1_um and y0_um < y1_um");
    return r;
  }
  if (kind == "trapezoid") {
    t.allow({"shape", "material", "rotation", "center_um", "base_y_um", "height_um", "top_width_um",
             "base_width_um", "sidewall_deg"});
    const double cx = t.num("center_um", 0.0) * um, y0 = t.num("base_y_um", 0.0) * um;
    const double h = t.num("height_um") * um;
    if (!(h > 0.0)) throw ValidationError(t.path("height_um") + " must be positive");
    const bool top = t.has("top_width_um"), base = t.has("base_width_um"), side = t.has("sidewall_deg");
    if (top && base && !side) {
      return Trapezoid{cx, y0, h, t.num("base_width_um") * um, t.num("top_width_um") * um};
    }
    if (side && top != base) {
      const double phi = deg(t.num("sidewall_deg"));
      return top ? Trapezoid::from_top_width(cx, y0, h, t.num("top_width_um") * um, phi)
                 : Trapezoid::from_sidewall(cx, y0, h, t.num("base_width_um") * um, phi);
    }
    throw ValidationError(t.path("shape") +
                          ": trapezoid needs sidewall_deg with exactly one of top_width_um / "
                          "base_width_um, or both widths without sidewall_deg");
  }
  throw ValidationError(t.path("shape") + ": unknown shape '" + kind +
                        "' (full_plane, half_plane, rectangle, trapezoid)");
}

WaveguideModel parse_model(const Table& root, const std::string& base_dir) {
  WaveguideModel m;

  // Materials: optional library file plus inline tables (inline wins).
  if (root.has("materials")) {
    const json& mj = root.raw("materials");
    if (!mj.is_object()) throw ValidationError("materials must be a table");
    json inline_tables = json::object();
    for (auto it = mj.begin(); it != mj.end(); ++it) {
      if (it.key() == "file") {
        if (!it->is_string()) throw ValidationError("materials.file must be a string");
        const auto lib = MaterialLibrary::from_toml_file(resolve(base_dir, it->get<std::string>()));
        for (const auto& [name, model] : lib.all()) m.materials.add(model);
      } else if (it->is_object()) {
        inline_tables[it.key()] = *it;
      } else {
        throw ValidationError("materials: unknown key '" + it.key() + "'");
      }
    }
    const MaterialLibrary inline_lib = MaterialLibrary::from_json(inline_tables);
    for (const auto& [name, model] : inline_lib.all()) m.materials.add(model);
  }

  Table geo = root.sub("geometry");
  geo.allow({"background", "background_rotation", "primitive"});
  {
    std::optional<RotationSpec> rot;
    if (geo.has("background_rotation")) {
      json wrapper = {{"rotation", geo.raw("background_rotation")}};
      rot = parse_rotation(Table(wrapper, "geometry.background"));
    }
    m.cross_section = CrossSection(geo.str("background"), rot);
  }
  if (geo.has("primitive")) {
    const json& prims = geo.raw("primitive");
    if (!prims.is_array()) throw ValidationError("geometry.primitive must be an array of tables");
    int idx = 0;
    for (const auto& pj : prims) {
      Table p(pj, "geometry.primitive[" + std::to_string(idx++) + "]");
      Shape s = parse_shape(p);
      m.cross_section.paint(s, p.str("material"), parse_rotation(p));
    }
  }
  for (const auto& p : m.cross_section.primitives())
    if (!m.materials.contains(p.material))
      throw ValidationError("geometry refers to unknown material '" + p.material + "'");

  Table grid = root.sub("grid");
  grid.allow({"nx", "ny", "center_um", "size_um", "subcell_average"});
  const auto c = grid.nums("center_um"), s = grid.nums("size_um");
  if (c.size() != 2 || s.size() != 2)
    throw ValidationError("grid.center_um and grid.size_um must have two entries");
  const int nx = grid.integer("nx", 0), ny = grid.integer("ny", 0);
  if (nx < 2 || ny < 2) throw ValidationError("grid.nx and grid.ny must be at least 2");
  if (!(s[0] > 0.0) || !(s[1] > 0.0)) throw ValidationError("grid.size_um entries must be positive");
  m.grid = Grid2D::centered(c[0] * 1e-6, c[1] * 1e-6, s[0] * 1e-6, s[1] * 1e-6, nx, ny);
  m.raster.subcell_average = grid.boolean("subcell_average", false);

  if (root.has("solver")) {
    Table sv = root.sub("solver");
    sv.allow({"lambda_um", "n_eigs", "eta_min", "eta_max", "cladding", "shift_eta", "decay_max",
              "residual_max", "imag_tol", "degeneracy_gap", "arnoldi_tol", "max_shift_lowerings"});
    auto& q = m.search;
    q.n_eigs = sv.integer("n_eigs", q.n_eigs);
    q.eta_min = sv.num("eta_min", q.eta_min);
    q.eta_max = sv.num("eta_max", q.eta_max);
    if (sv.has("shift_eta")) q.shift_eta = sv.num("shift_eta");
    q.decay_max = sv.num("decay_max", q.decay_max);
    q.residual_max = sv.num("residual_max", q.residual_max);
    q.imag_tol = sv.num("imag_tol", q.imag_tol);
    q.degeneracy_gap = sv.num("degeneracy_gap", q.degeneracy_gap);
    q.arnoldi_tol = sv.num("arnoldi_tol", q.arnoldi_tol);
    q.max_shift_lowerings = sv.integer("max_shift_lowerings", q.max_shift_lowerings);
    if (sv.has("cladding")) {
      m.cladding_material = sv.str("cladding");
      if (!m.materials.contains(*m.cladding_material))
        throw ValidationError("solver.cladding names unknown material '" + *m.cladding_material + "'");
    }
    if (q.n_eigs < 1) throw ValidationError("solver.n_eigs must be at least 1");
    if (q.eta_min < 0.0) throw ValidationError("solver.eta_min must be non-negative");
    if (q.eta_max > 0.0 && q.eta_min > q.eta_max) {
      std::ostringstream msg;
      msg << "solver.eta_min (" << q.eta_min << ") exceeds solver.eta_max (" << q.eta_max << ")";
      throw ValidationError(msg.str());
    }
    if (!(q.decay_max > 0.0) || !(q.residual_max > 0.0) || !(q.arnoldi_tol > 0.0))
      throw ValidationError("solver tolerances (decay_max, residual_max, arnoldi_tol) must be positive");
  }
  return m;
}

PulseSpec parse_pulse(const Table& t, const std::string& base_dir) {
  t.allow({"name", "normalization", "photons", "energy_j", "branch", "spectrum", "z_m", "time"});
  PulseSpec p;
  p.name = t.str("name", "pulse");
  const std::string norm = t.str("normalization", "quantum");
  if (norm == "quantum") {
    p.normalization = AmplitudeTag::quantum;
    p.photons = t.num("photons", 1.0);
    if (!(p.photons >= 0.0)) throw ValidationError(t.path("photons") + " must be non-negative");
  } else if (norm == "classical") {
    p.normalization = AmplitudeTag::classical;
    p.energy_j = t.num("energy_j");
    if (!(p.energy_j >= 0.0)) throw ValidationError(t.path("energy_j") + " must be non-negative");
  } else {
    throw ValidationError(t.path("normalization") + " must be \"quantum\" or \"classical\"");
  }

  Table b = t.sub("branch");
  const std::string kind = b.str("kind");
  if (kind == "taylor") {
    b.allow({"kind", "center_um", "k", "span_thz"});
    p.branch.kind = PulseBranchSpec::Kind::taylor;
    p.branch.center_um = b.num("center_um");
    p.branch.k = b.nums("k");
    p.branch.span_thz = b.num("span_thz");
    if (p.branch.k.empty()) throw ValidationError(b.path("k") + " needs at least k0");
    if (!(p.branch.span_thz > 0.0)) throw ValidationError(b.path("span_thz") + " must be positive");
  } else if (kind == "file") {
    b.allow({"kind", "path"});
    p.branch.kind = PulseBranchSpec::Kind::file;
    p.branch.path = resolve(base_dir, b.str("path"));
  } else {
    throw ValidationError(b.path("kind") + " must be \"taylor\" or \"file\"");
  }

  Table s = t.sub("spectrum");
  p.spectrum_kind = s.str("kind", "gaussian");
  if (p.spectrum_kind == "gaussian") {
    s.allow({"kind", "center_um", "fwhm_thz", "chirp_fs2", "samples", "span_sigmas"});
    p.center_um = s.num("center_um");
    p.fwhm_thz = s.num("fwhm_thz");
    p.chirp_fs2 = s.num("chirp_fs2", 0.0);
    p.samples = s.integer("samples", p.samples);
    p.span_sigmas = s.num("span_sigmas", p.span_sigmas);
    if (!(p.fwhm_thz > 0.0)) throw ValidationError(s.path("fwhm_thz") + " must be positive");
    if (p.samples < 3) throw ValidationError(s.path("samples") + " must be at least 3");
  } else if (p.spectrum_kind == "file") {
    s.allow({"kind", "path"});
    p.spectrum_path = resolve(base_dir, s.str("path"));
  } else {
    throw ValidationError(s.path("kind") + " must be \"gaussian\" or \"file\"");
  }

  if (t.has("z_m")) p.z_m = t.nums("z_m");
  if (t.has("time")) {
    Table tm = t.sub("time");
    tm.allow({"t_min_ps", "t_max_ps", "samples"});
    p.t_min_ps = tm.num("t_min_ps");
    p.t_max_ps = tm.num("t_max_ps");
    p.t_samples = tm.integer("samples", p.t_samples);
    if (!(p.t_min_ps < p.t_max_ps) || p.t_samples < 2)
      throw ValidationError(t.path("time") + " needs t_min_ps < t_max_ps and samples >= 2");
  }
  return p;
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::string& base_dir) {
  const json doc = parse_toml(text);
  Table root(doc, "config");
  root.allow({"run", "materials", "geometry", "grid", "solver", "sweep", "orthogonality", "pulse"});
  RunConfig cfg;
  cfg.hash = fnv1a_hex(text);

  if (root.has("run")) {
    Table run = root.sub("run");
    run.allow({"name", "out", "workers"});
    cfg.name = run.str("name", "");
    if (run.has("out")) cfg.out_dir = resolve(base_dir, run.str("out"));
    cfg.workers = run.integer("workers", 1);
    if (cfg.workers < 1) throw ValidationError("run.workers must be at least 1");
  }
  if (root.has("geometry") || root.has("grid")) {
    cfg.model = parse_model(root, base_dir);
  } else if (root.has("solver")) {
    throw ValidationError("solver section given without geometry and grid");
  }
  if (root.has("solver")) {
    Table sv = root.sub("solver");
    if (sv.has("lambda_um")) cfg.solve_lambda_um = sv.num("lambda_um");
  }
  if (root.has("sweep")) {
    Table sw = root.sub("sweep");
    sw.allow({"lambda_um"});
    cfg.sweep_lambda_um = sw.nums("lambda_um");
  }
  for (double l : cfg.sweep_lambda_um)
    if (!(l > 0.0)) throw ValidationError("sweep.lambda_um entries must be positive");
  if (cfg.solve_lambda_um && !(*cfg.solve_lambda_um > 0.0))
    throw ValidationError("solver.lambda_um must be positive");
  if (root.has("orthogonality")) {
    Table o = root.sub("orthogonality");
    o.allow({"quadrature", "offdiag_max", "ratio_max"});
    if (o.has("quadrature")) cfg.orthogonality.quadrature = quadrature_from_string(o.str("quadrature"));
    cfg.orthogonality.offdiag_max = o.num("offdiag_max", cfg.orthogonality.offdiag_max);
    cfg.orthogonality.ratio_max = o.num("ratio_max", cfg.orthogonality.ratio_max);
  }
  if (root.has("pulse")) {
    const json& pj = root.raw("pulse");
    if (!pj.is_array()) throw ValidationError("pulse must be an array of tables ([[pulse]])");
    int idx = 0;
    for (const auto& p : pj) cfg.pulses.push_back(parse_pulse(Table(p, "pulse[" + std::to_string(idx++) + "]"), base_dir));
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  const std::string text = read_text_file(path);
  const auto base = std::filesystem::path(path).parent_path().string();
  RunConfig cfg = parse_run_config(text, base.empty() ? "." : base);
  cfg.path = path;
  return cfg;
}

std::shared_ptr<const BranchModel> make_pulse_branch(const PulseSpec& p) {
  if (p.branch.kind == PulseBranchSpec::Kind::taylor) {
    const double w0 = omega_from_lambda_um(p.branch.center_um);
    const double half = si::pi * p.branch.span_thz * 1e12;
    return std::make_shared<const BranchModel>(
        BranchModel::taylor(p.name + ":taylor", w0, p.branch.k, w0 - half, w0 + half));
  }
  const DispersionBranch b = read_branch_csv(read_text_file(p.branch.path));
  return std::make_shared<const BranchModel>(BranchModel::tabulated(b));
}

SpectralAmplitude make_pulse_amplitude(const PulseSpec& p, std::shared_ptr<const BranchModel> branch) {
  const double scale = p.normalization == AmplitudeTag::quantum ? p.photons : p.energy_j;
  if (p.spectrum_kind == "gaussian") {
    return gaussian_amplitude(std::move(branch), omega_from_lambda_um(p.center_um),
                              2.0 * si::pi * p.fwhm_thz * 1e12, p.chirp_fs2 * 1e-30, p.normalization,
                              scale, p.samples, p.span_sigmas);
  }
  // File spectrum: omega, re_c, im_c; used as given.
  SpectralAmplitude a;
  a.branch = std::move(branch);
  a.tag = p.normalization;
  std::istringstream is(read_text_file(p.spectrum_path));
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0]))) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double w, re, im;
    if (!(ls >> w >> re >> im))
      throw ValidationError(p.spectrum_path + " line " + std::to_string(lineno) + ": expected omega, re, im");
    a.omega.push_back(w);
    a.c.emplace_back(re, im);
  }
  a.validate();
  return a;
}

}  // namespace wgm
