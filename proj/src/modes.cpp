#include "wgm/modes.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>

#include "wgm/errors.hpp"

namespace wgm {

const char* to_string(Quadrature q) {
  return q == Quadrature::yee_native ? "yee_native" : "cell_centered";
}

Quadrature quadrature_from_string(const std::string& s) {
  if (s == "cell_centered") return Quadrature::cell_centered;
  if (s == "yee_native") return Quadrature::yee_native;
  throw ValidationError("unknown quadrature '" + s + "' (expected cell_centered or yee_native)");
}

namespace {
std::atomic<bool> g_odot_fault{false};
double odot_z_sign() { return g_odot_fault.load(std::memory_order_relaxed) ? 1.0 : -1.0; }
}  // namespace

void set_odot_sign_fault(bool enabled) { g_odot_fault.store(enabled); }
bool odot_sign_fault() { return g_odot_fault.load(); }

cplx odot(const Vec3c& x, const Vec3c& y) {
  return 0.5 * (x(0) * y(0) + x(1) * y(1) + odot_z_sign() * x(2) * y(2));
}

namespace {

// Samples laid out so that every product used by the integrals pairs equal
// indices: (ex, hy, dx, by, curl_h_x, curl_e_y), (ey, hx, dy, bx, curl_h_y,
// curl_e_x), (ez, dz, curl_h_z), (hz, bz, curl_e_z).
struct Samples {
  std::vector<cplx> ex, ey, ez, hx, hy, hz, dx, dy, dz, bx, by, bz;
  std::vector<cplx> chx, chy, chz, cex, cey, cez;
  double w = 0.0;
};

std::vector<cplx> to_cells_x_edge(const NodeArray& a, int nx, int ny) {  // (nx, ny+1) nodes
  std::vector<cplx> out(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) out[j * nx + i] = 0.5 * (a(i, j) + a(i, j + 1));
  return out;
}

std::vector<cplx> to_cells_y_edge(const NodeArray& a, int nx, int ny) {  // (nx+1, ny) nodes
  std::vector<cplx> out(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) out[j * nx + i] = 0.5 * (a(i, j) + a(i + 1, j));
  return out;
}

std::vector<cplx> to_cells_corner(const NodeArray& a, int nx, int ny) {  // (nx+1, ny+1) nodes
  std::vector<cplx> out(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      out[j * nx + i] = 0.25 * (a(i, j) + a(i + 1, j) + a(i, j + 1) + a(i + 1, j + 1));
  return out;
}

// Transverse curls of a profile at the nodes matching the partner field.
struct Curls {
  NodeArray hx, hy, hz;  // (curl H) on Ex, Ey, Ez nodes
  NodeArray ex, ey, ez;  // (curl E) on Ey, Ex, Hz nodes
};

Curls curls(const ModeProfile& m) {
  const Grid2D& g = m.grid;
  const int nx = g.nx, ny = g.ny;
  const double hx = g.hx(), hy = g.hy();
  Curls c{NodeArray(nx, ny + 1), NodeArray(nx + 1, ny), NodeArray(nx + 1, ny + 1),
          NodeArray(nx + 1, ny), NodeArray(nx, ny + 1), NodeArray(nx, ny)};
  // Wall rows stay zero: their partner samples vanish on the PEC boundary.
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      c.hx(i, j) = (m.hz(i, j) - m.hz(i, j - 1)) / hy;
      c.ey(i, j) = -(m.ez(i + 1, j) - m.ez(i, j)) / hx;
    }
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i) {
      c.hy(i, j) = -(m.hz(i, j) - m.hz(i - 1, j)) / hx;
      c.ex(i, j) = (m.ez(i, j + 1) - m.ez(i, j)) / hy;
    }
  for (int j = 1; j < ny; ++j)
    for (int i = 1; i < nx; ++i)
      c.hz(i, j) = (m.hy(i, j) - m.hy(i - 1, j)) / hx - (m.hx(i, j) - m.hx(i, j - 1)) / hy;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      c.ez(i, j) = (m.ey(i + 1, j) - m.ey(i, j)) / hx - (m.ex(i, j + 1) - m.ex(i, j)) / hy;
  return c;
}

Samples samples(const ModeProfile& m, Quadrature q, bool with_curls) {
  Samples s;
  const int nx = m.grid.nx, ny = m.grid.ny;
  s.w = m.grid.hx() * m.grid.hy();
  Curls c;
  if (with_curls) c = curls(m);
  if (q == Quadrature::yee_native) {
    s.ex = m.ex.v; s.hy = m.hy.v; s.dx = m.dx.v; s.by = m.by.v;
    s.ey = m.ey.v; s.hx = m.hx.v; s.dy = m.dy.v; s.bx = m.bx.v;
    s.ez = m.ez.v; s.dz = m.dz.v;
    s.hz = m.hz.v; s.bz = m.bz.v;
    if (with_curls) {
      s.chx = c.hx.v; s.cey = c.ey.v;
      s.chy = c.hy.v; s.cex = c.ex.v;
      s.chz = c.hz.v; s.cez = c.ez.v;
    }
    return s;
  }
  s.ex = to_cells_x_edge(m.ex, nx, ny);
  s.hy = to_cells_x_edge(m.hy, nx, ny);
  s.dx = to_cells_x_edge(m.dx, nx, ny);
  s.by = to_cells_x_edge(m.by, nx, ny);
  s.ey = to_cells_y_edge(m.ey, nx, ny);
  s.hx = to_cells_y_edge(m.hx, nx, ny);
  s.dy = to_cells_y_edge(m.dy, nx, ny);
  s.bx = to_cells_y_edge(m.bx, nx, ny);
  s.ez = to_cells_corner(m.ez, nx, ny);
  s.dz = to_cells_corner(m.dz, nx, ny);
  s.hz = m.hz.v;
  s.bz = m.bz.v;
  if (with_curls) {
    s.chx = to_cells_x_edge(c.hx, nx, ny);
    s.cey = to_cells_x_edge(c.ey, nx, ny);
    s.chy = to_cells_y_edge(c.hy, nx, ny);
    s.cex = to_cells_y_edge(c.ex, nx, ny);
    s.chz = to_cells_corner(c.hz, nx, ny);
    s.cez = c.ez.v;
  }
  return s;
}

void require_same_grid(const ModeProfile& a, const ModeProfile& b) {
  if (!(a.grid == b.grid)) throw ValidationError("cross product requires profiles on the same grid");
}

void require_same_omega(const ModeProfile& a, const ModeProfile& b) {
  if (std::abs(a.omega - b.omega) > 1e-12 * std::max(std::abs(a.omega), std::abs(b.omega)))
    throw ValidationError("cross product requires profiles at the same frequency");
}

cplx dot(const std::vector<cplx>& a, const std::vector<cplx>& b, bool conj_a) {
  cplx acc = 0.0;
  if (conj_a)
    for (std::size_t k = 0; k < a.size(); ++k) acc += std::conj(a[k]) * b[k];
  else
    for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

// sum [Em* x Hn + En x Hm*]_z
cplx energy_sum(const Samples& m, const Samples& n) {
  cplx a = dot(m.ex, n.hy, true) - dot(m.ey, n.hx, true);
  cplx b = dot(m.hy, n.ex, true) - dot(m.hx, n.ey, true);
  return m.w * (a + b);
}

// sum [Em (.) Dn* + En* (.) Dm + Hn* (.) Bm + Hm (.) Bn*]
cplx momentum_sum(const Samples& m, const Samples& n) {
  auto signed_conj_first = [](const Samples& p, const Samples& q, auto fa, auto fb) {
    // sum conj(p.a) q.b over x, y minus z
    return dot(p.*fa[0], q.*fb[0], true) + dot(p.*fa[1], q.*fb[1], true) +
           odot_z_sign() * dot(p.*fa[2], q.*fb[2], true);
  };
  using Member = std::vector<cplx> Samples::*;
  const Member e[3] = {&Samples::ex, &Samples::ey, &Samples::ez};
  const Member d[3] = {&Samples::dx, &Samples::dy, &Samples::dz};
  const Member h[3] = {&Samples::hx, &Samples::hy, &Samples::hz};
  const Member b[3] = {&Samples::bx, &Samples::by, &Samples::bz};
  cplx t1 = signed_conj_first(n, m, d, e);  // Dn* . Em
  cplx t2 = signed_conj_first(n, m, e, d);  // En* . Dm
  cplx t3 = signed_conj_first(n, m, h, b);  // Hn* . Bm
  cplx t4 = signed_conj_first(n, m, b, h);  // Bn* . Hm
  return 0.5 * m.w * (t1 + t2 + t3 + t4);
}

}  // namespace

cplx energy_cross(const ModeProfile& m, const ModeProfile& n, Quadrature q) {
  require_same_grid(m, n);
  require_same_omega(m, n);
  return energy_sum(samples(m, q, false), samples(n, q, false));
}

cplx momentum_cross(const ModeProfile& m, const ModeProfile& n, Quadrature q) {
  require_same_grid(m, n);
  require_same_omega(m, n);
  return momentum_sum(samples(m, q, false), samples(n, q, false));
}

double xi_energy(const ModeProfile& m, Quadrature q) {
  auto s = samples(m, q, false);
  return energy_sum(s, s).real();
}

double xi_momentum(const ModeProfile& m, Quadrature q) {
  auto s = samples(m, q, false);
  return momentum_sum(s, s).real();
}

double profile_overlap(const ModeProfile& a, const ModeProfile& b) {
  require_same_grid(a, b);
  auto sa = samples(a, kDefaultQuadrature, false);
  auto sb = samples(b, kDefaultQuadrature, false);
  double xa = energy_sum(sa, sa).real(), xb = energy_sum(sb, sb).real();
  if (!(xa > 0.0) || !(xb > 0.0)) return 0.0;
  return std::clamp(std::abs(energy_sum(sa, sb)) / std::sqrt(xa * xb), 0.0, 1.0);
}

namespace {

double ratio_error(double xi_e, double xi_m, double omega, double k) {
  if (xi_m == 0.0) throw ValidationError("xi_m is zero; the ratio relation is undefined");
  const double phase_velocity = omega / k;
  return std::abs(xi_e / xi_m - phase_velocity) / std::abs(phase_velocity);
}

}  // namespace

double ratio_check(const ModeProfile& m) { return ratio_error(m.xi_e, m.xi_m, m.omega, m.k); }

double ratio_check(const ModeProfile& m, Quadrature q) {
  auto s = samples(m, q, false);
  return ratio_error(energy_sum(s, s).real(), momentum_sum(s, s).real(), m.omega, m.k);
}

FlowMaps flow_maps(const ModeProfile& m) {
  auto s = samples(m, Quadrature::cell_centered, false);
  FlowMaps f;
  f.grid = m.grid;
  const std::size_t n = s.ex.size();
  f.sz.resize(n);
  f.tzz.resize(n);
  const double zs = odot_z_sign();
  for (std::size_t k = 0; k < n; ++k) {
    cplx exh = s.ex[k] * std::conj(s.hy[k]) - s.ey[k] * std::conj(s.hx[k]);
    f.sz[k] = 0.5 * exh.real();
    cplx ed = s.ex[k] * std::conj(s.dx[k]) + s.ey[k] * std::conj(s.dy[k]) + zs * s.ez[k] * std::conj(s.dz[k]);
    cplx hb = s.hx[k] * std::conj(s.bx[k]) + s.hy[k] * std::conj(s.by[k]) + zs * s.hz[k] * std::conj(s.bz[k]);
    // (.) carries a factor 1/2; the time average of the real field another.
    f.tzz[k] = 0.25 * (ed + hb).real();
    f.sz_integral += f.sz[k] * s.w;
    f.tzz_integral += f.tzz[k] * s.w;
  }
  return f;
}

ModeProfile normalize_mode(const ModeProfile& m, Normalization convention, double power_w) {
  double factor;
  if (convention == Normalization::classical) {
    if (!(m.xi_e > 0.0)) throw ValidationError("classical normalization needs xi_e > 0");
    if (!(power_w > 0.0)) throw ValidationError("normalization power must be positive");
    factor = std::sqrt(4.0 * power_w / m.xi_e);
  } else {
    if (!(m.xi_m > 0.0) || !(m.k > 0.0))
      throw ValidationError("quantum normalization needs xi_m > 0 and k > 0");
    factor = std::sqrt(si::hbar * m.k / m.xi_m);
  }
  ModeProfile out = m;
  scale_fields(out, factor);
  return out;
}

IdentityIntegrals identity_integrals(const ModeProfile& m, Quadrature q) {
  auto s = samples(m, q, true);
  IdentityIntegrals r;
  const double inv_w = 1.0 / m.omega;
  r.xi_m = momentum_sum(s, s).real();
  r.i1 = 2.0 * m.k * inv_w * energy_sum(s, s).real();
  // C2 = (curl H) . E* + (curl E*) . H
  cplx c2 = dot(s.ex, s.chx, true) + dot(s.ey, s.chy, true) + dot(s.ez, s.chz, true) +
            dot(s.cex, s.hx, true) + dot(s.cey, s.hy, true) + dot(s.cez, s.hz, true);
  // C3 = 2 Ez (curl H*)_z + 2 (curl E)_z Hz*
  cplx c3 = 2.0 * (dot(s.chz, s.ez, true) + dot(s.hz, s.cez, true));
  // i (C - C*) is real: -2 Im C.
  r.i2 = I * inv_w * s.w * (c2 - std::conj(c2));
  r.i3 = I * inv_w * s.w * (c3 - std::conj(c3));
  return r;
}

CrossProductReport cross_product_report(const std::vector<ModeProfile>& modes, Quadrature q) {
  CrossProductReport r;
  r.quadrature = q;
  const int n = static_cast<int>(modes.size());
  if (n == 0) return r;
  for (const auto& m : modes) {
    require_same_grid(modes.front(), m);
    require_same_omega(modes.front(), m);
  }
  r.omega = modes.front().omega;
  std::vector<Samples> s;
  s.reserve(n);
  for (const auto& m : modes) s.push_back(samples(m, q, false));
  r.energy.resize(n, n);
  r.momentum.resize(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      r.energy(a, b) = energy_sum(s[a], s[b]);
      r.momentum(a, b) = momentum_sum(s[a], s[b]);
    }
  r.energy_offdiag = Eigen::MatrixXd::Zero(n, n);
  r.momentum_offdiag = Eigen::MatrixXd::Zero(n, n);
  double scale_e = 0.0, scale_m = 0.0;
  for (int a = 0; a < n; ++a) {
    r.eta.push_back(modes[a].eta);
    r.cluster.push_back(modes[a].cluster);
    scale_e = std::max(scale_e, std::abs(r.energy(a, a)));
    scale_m = std::max(scale_m, std::abs(r.momentum(a, a)));
    r.diagonal_imag_defect = std::max(
        {r.diagonal_imag_defect, std::abs(r.energy(a, a).imag()) / std::abs(r.energy(a, a)),
         std::abs(r.momentum(a, a).imag()) / std::abs(r.momentum(a, a))});
    // Ratio from the report's own quadrature.
    double err = ratio_error(r.energy(a, a).real(), r.momentum(a, a).real(), modes[a].omega, modes[a].k);
    r.ratio_error.push_back(err);
    r.worst_ratio_error = std::max(r.worst_ratio_error, err);
  }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      r.hermitian_defect = std::max(
          {r.hermitian_defect, std::abs(r.energy(a, b) - std::conj(r.energy(b, a))) / scale_e,
           std::abs(r.momentum(a, b) - std::conj(r.momentum(b, a))) / scale_m});
      if (a == b) continue;
      r.energy_offdiag(a, b) =
          2.0 * std::abs(r.energy(a, b)) / (r.energy(a, a).real() + r.energy(b, b).real());
      r.momentum_offdiag(a, b) =
          2.0 * std::abs(r.momentum(a, b)) / (r.momentum(a, a).real() + r.momentum(b, b).real());
      const bool degenerate = modes[a].cluster >= 0 && modes[a].cluster == modes[b].cluster;
      if (degenerate) continue;
      r.worst_energy_offdiag = std::max(r.worst_energy_offdiag, r.energy_offdiag(a, b));
      r.worst_momentum_offdiag = std::max(r.worst_momentum_offdiag, r.momentum_offdiag(a, b));
    }
  return r;
}

std::string report_csv(const CrossProductReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "quantity,m,n,re,im,normalized\n";
  const auto n = r.energy.rows();
  for (int pass = 0; pass < 2; ++pass) {
    const auto& mat = pass == 0 ? r.energy : r.momentum;
    const auto& nrm = pass == 0 ? r.energy_offdiag : r.momentum_offdiag;
    const char* name = pass == 0 ? "xi_e" : "xi_m";
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b)
        os << name << ',' << a << ',' << b << ',' << mat(a, b).real() << ',' << mat(a, b).imag()
           << ',' << nrm(a, b) << '\n';
  }
  return os.str();
}

nlohmann::json report_json(const CrossProductReport& r) {
  nlohmann::json j;
  j["quadrature"] = to_string(r.quadrature);
  j["omega"] = r.omega;
  j["eta"] = r.eta;
  j["cluster"] = r.cluster;
  j["ratio_error"] = r.ratio_error;
  j["worst_energy_offdiag"] = r.worst_energy_offdiag;
  j["worst_momentum_offdiag"] = r.worst_momentum_offdiag;
  j["worst_ratio_error"] = r.worst_ratio_error;
  j["diagonal_imag_defect"] = r.diagonal_imag_defect;
  j["hermitian_defect"] = r.hermitian_defect;
  return j;
}

}  // namespace wgm
