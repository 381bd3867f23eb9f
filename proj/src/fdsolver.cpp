#include "wgm/fdsolver.hpp"

#include <Eigen/UmfPackSupport>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wgm/eigs.hpp"
#include "wgm/errors.hpp"
#include "wgm/modes.hpp"

namespace wgm {

namespace {

using Triplet = Eigen::Triplet<cplx>;
using RowSparse = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

// Sparse row under construction: (column, coefficient) pairs, duplicates allowed.
using Row = std::vector<std::pair<int, cplx>>;

void add(Row& r, int col, cplx c) {
  if (col >= 0 && c != cplx{}) r.emplace_back(col, c);
}

void add_row(Row& r, const RowSparse& m, int row, cplx scale) {
  if (row < 0 || scale == cplx{}) return;
  for (RowSparse::InnerIterator it(m, row); it; ++it) r.emplace_back(static_cast<int>(it.col()), scale * it.value());
}

RowSparse from_rows(const std::vector<Row>& rows, int ncols) {
  std::vector<Triplet> trips;
  std::size_t nnz = 0;
  for (const auto& r : rows) nnz += r.size();
  trips.reserve(nnz);
  for (std::size_t k = 0; k < rows.size(); ++k)
    for (const auto& [c, v] : rows[k]) trips.emplace_back(static_cast<int>(k), c, v);
  RowSparse m(static_cast<Eigen::Index>(rows.size()), ncols);
  m.setFromTriplets(trips.begin(), trips.end());
  m.prune(cplx{});
  return m;
}

struct Indexer {
  int nx, ny;
  int ez(int i, int j) const {
    return (i < 0 || i > nx || j < 0 || j > ny) ? -1 : j * (nx + 1) + i;
  }
  int hz(int i, int j) const { return (i < 0 || i >= nx || j < 0 || j >= ny) ? -1 : j * nx + i; }
  int exn(int i, int j) const { return (i < 0 || i >= nx || j < 0 || j > ny) ? -1 : j * nx + i; }
  int eyn(int i, int j) const { return (i < 0 || i > nx || j < 0 || j >= ny) ? -1 : j * (nx + 1) + i; }
};

std::string node_text(const Grid2D& g, NodeSet set, int i, int j) {
  auto [x, y] = node_position(g, set, i, j);
  std::ostringstream os;
  os << "(x = " << x * 1e6 << " um, y = " << y * 1e6 << " um)";
  return os.str();
}

}  // namespace

OperatorPencil assemble_operator(const EpsilonMap& map) {
  return assemble_operator(std::make_shared<const EpsilonMap>(map));
}

OperatorPencil assemble_operator(std::shared_ptr<const EpsilonMap> map_ptr) {
  if (!map_ptr) throw ValidationError("assemble_operator needs a permittivity map");
  const EpsilonMap& map = *map_ptr;
  const Grid2D& g = map.grid;
  if (!(map.omega > 0.0)) throw ValidationError("frequency must be positive");
  const int nx = g.nx, ny = g.ny;
  const UnknownLayout L(g);
  const Indexer ix{nx, ny};
  const int n = L.size();
  const double k0 = map.omega / si::c0;
  const double dx = 1.0 / (k0 * g.hx()), dy = 1.0 / (k0 * g.hy());

  auto eps_ex = [&](int i, int j) -> const Eigen::Matrix3cd& { return map.at(NodeSet::ex, i, j); };
  auto eps_ey = [&](int i, int j) -> const Eigen::Matrix3cd& { return map.at(NodeSet::ey, i, j); };
  auto eps_ez = [&](int i, int j) -> const Eigen::Matrix3cd& { return map.at(NodeSet::ez, i, j); };

  // Ez on every Ez node (wall rows empty). From the z row of curl H + i D = 0:
  // eps_zz Ez = i (dHy/dx - dHx/dy) - (eps_zx Ex + eps_zy Ey) with two-point
  // averages whose coefficients are the adjoints of the Ez coupling in D_x, D_y.
  std::vector<Row> ez_rows(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  std::vector<Row> dz_rows(ez_rows.size());
  for (int j = 1; j < ny; ++j)
    for (int i = 1; i < nx; ++i) {
      const auto& ez = eps_ez(i, j);
      const double ezz = ez(2, 2).real();
      if (!(ezz >= 1e-9))
        throw ModelError("eps_zz below 1e-9 at Ez node " + node_text(g, NodeSet::ez, i, j) +
                         "; longitudinal field cannot be eliminated");
      Row ch;  // i * curl_z H
      add(ch, L.hy(i, j), I * dx);
      add(ch, L.hy(i - 1, j), -I * dx);
      add(ch, L.hx(i, j), -I * dy);
      add(ch, L.hx(i, j - 1), I * dy);
      dz_rows[ix.ez(i, j)] = ch;
      Row r;
      for (auto [c, v] : ch) r.emplace_back(c, v / ezz);
      for (int a : {i - 1, i})
        add(r, L.ex(a, j), -0.25 * (ez(2, 0) + eps_ex(a, j)(2, 0)) / ezz);
      for (int b : {j - 1, j})
        add(r, L.ey(i, b), -0.25 * (ez(2, 1) + eps_ey(i, b)(2, 1)) / ezz);
      ez_rows[ix.ez(i, j)] = std::move(r);
    }
  RowSparse rz = from_rows(ez_rows, n);

  // Z0 Hz = -i (dEy/dx - dEx/dy) on every cell.
  std::vector<Row> hz_rows(static_cast<std::size_t>(nx * ny));
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      Row& r = hz_rows[ix.hz(i, j)];
      add(r, L.ey(i + 1, j), -I * dx);
      add(r, L.ey(i, j), I * dx);
      add(r, L.ex(i, j + 1), I * dy);
      add(r, L.ex(i, j), -I * dy);
    }
  RowSparse rhz = from_rows(hz_rows, n);

  // D / eps0 on Ex nodes: eps_xx Ex + 4-point eps_xy Ey + 2-point eps_xz Ez, each
  // off-diagonal weight the mean of the tensor at both ends of the coupling.
  std::vector<Row> dx_rows(static_cast<std::size_t>(nx * (ny + 1)));
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const auto& e = eps_ex(i, j);
      Row r;
      add(r, L.ex(i, j), e(0, 0).real());
      for (int c : {i, i + 1})
        for (int d : {j - 1, j})
          if (L.ey(c, d) >= 0) add(r, L.ey(c, d), 0.125 * (e(0, 1) + eps_ey(c, d)(0, 1)));
      for (int a : {i, i + 1}) add_row(r, rz, ix.ez(a, j), 0.25 * (e(0, 2) + eps_ez(a, j)(0, 2)));
      dx_rows[ix.exn(i, j)] = std::move(r);
    }
  RowSparse rdx = from_rows(dx_rows, n);

  std::vector<Row> dy_rows(static_cast<std::size_t>((nx + 1) * ny));
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i) {
      const auto& e = eps_ey(i, j);
      Row r;
      add(r, L.ey(i, j), e(1, 1).real());
      for (int a : {i - 1, i})
        for (int b : {j, j + 1})
          if (L.ex(a, b) >= 0) add(r, L.ex(a, b), 0.125 * (e(1, 0) + eps_ex(a, b)(1, 0)));
      for (int b : {j, j + 1}) add_row(r, rz, ix.ez(i, b), 0.25 * (e(1, 2) + eps_ez(i, b)(1, 2)));
      dy_rows[ix.eyn(i, j)] = std::move(r);
    }
  RowSparse rdy = from_rows(dy_rows, n);

  // Transverse operator: eta psi = M psi.
  std::vector<Row> m_rows(static_cast<std::size_t>(n));
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      Row& re = m_rows[L.ex(i, j)];  // eta Ex = Hy - i dEz/dx
      add(re, L.hy(i, j), 1.0);
      add_row(re, rz, ix.ez(i + 1, j), -I * dx);
      add_row(re, rz, ix.ez(i, j), I * dx);
      Row& rh = m_rows[L.hy(i, j)];  // eta Hy = -i dHz/dy + Dx
      add_row(rh, rhz, ix.hz(i, j), -I * dy);
      add_row(rh, rhz, ix.hz(i, j - 1), I * dy);
      add_row(rh, rdx, ix.exn(i, j), 1.0);
    }
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i) {
      Row& re = m_rows[L.ey(i, j)];  // eta Ey = -Hx - i dEz/dy
      add(re, L.hx(i, j), -1.0);
      add_row(re, rz, ix.ez(i, j + 1), -I * dy);
      add_row(re, rz, ix.ez(i, j), I * dy);
      Row& rh = m_rows[L.hx(i, j)];  // eta Hx = -i dHz/dx - Dy
      add_row(rh, rhz, ix.hz(i, j), -I * dx);
      add_row(rh, rhz, ix.hz(i - 1, j), I * dx);
      add_row(rh, rdy, ix.eyn(i, j), -1.0);
    }

  OperatorPencil p;
  p.omega = map.omega;
  p.grid = g;
  p.layout = L;
  p.map = std::move(map_ptr);
  p.m = SparseMatrixC(from_rows(m_rows, n));

  // B pairs Ex with Hy and Ey with -Hx.
  std::vector<Triplet> bt;
  bt.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < L.n_ex(); ++k) {
    bt.emplace_back(k, L.off_hy() + k, 1.0);
    bt.emplace_back(L.off_hy() + k, k, 1.0);
  }
  for (int k = 0; k < L.n_ey(); ++k) {
    bt.emplace_back(L.off_ey() + k, L.off_hx() + k, -1.0);
    bt.emplace_back(L.off_hx() + k, L.off_ey() + k, -1.0);
  }
  p.b.resize(n, n);
  p.b.setFromTriplets(bt.begin(), bt.end());
  p.a = p.b * p.m;

  p.ez_from_psi = std::move(rz);
  p.hz_from_psi = std::move(rhz);
  p.dx_from_psi = std::move(rdx);
  p.dy_from_psi = std::move(rdy);
  p.dz_from_psi = from_rows(dz_rows, n);
  return p;
}

// ---------------------------------------------------------------------------

namespace {

NodeArray scatter(const Eigen::VectorXcd& v, int nx, int ny, double scale) {
  NodeArray a(nx, ny);
  for (Eigen::Index k = 0; k < v.size(); ++k) a.v[static_cast<std::size_t>(k)] = scale * v(k);
  return a;
}

std::vector<const NodeArray*> e_like(const ModeProfile& m) { return {&m.ex, &m.ey, &m.ez}; }

}  // namespace

void scale_fields(ModeProfile& m, cplx s) {
  for (NodeArray* a : {&m.ex, &m.ey, &m.ez, &m.hx, &m.hy, &m.hz, &m.dx, &m.dy, &m.dz, &m.bx,
                       &m.by, &m.bz})
    for (auto& v : a->v) v *= s;
  const double s2 = std::norm(s);
  m.xi_e *= s2;
  m.xi_m *= s2;
}

ModeProfile complete_fields(const OperatorPencil& p, const Eigen::VectorXcd& psi, double eta) {
  const UnknownLayout& L = p.layout;
  if (psi.size() != L.size()) throw ValidationError("unknown vector size does not match the pencil");
  const Grid2D& g = p.grid;
  const int nx = g.nx, ny = g.ny;
  ModeProfile m;
  m.grid = g;
  m.omega = p.omega;
  m.eta = eta;
  m.k = eta * p.omega / si::c0;

  m.ex = NodeArray(nx, ny + 1);
  m.hy = NodeArray(nx, ny + 1);
  m.ey = NodeArray(nx + 1, ny);
  m.hx = NodeArray(nx + 1, ny);
  const double inv_z0 = 1.0 / si::z0;
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      m.ex(i, j) = psi(L.ex(i, j));
      m.hy(i, j) = psi(L.hy(i, j)) * inv_z0;
    }
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i) {
      m.ey(i, j) = psi(L.ey(i, j));
      m.hx(i, j) = psi(L.hx(i, j)) * inv_z0;
    }
  m.ez = scatter(p.ez_from_psi * psi, nx + 1, ny + 1, 1.0);
  m.hz = scatter(p.hz_from_psi * psi, nx, ny, inv_z0);
  m.dx = scatter(p.dx_from_psi * psi, nx, ny + 1, si::eps0);
  m.dy = scatter(p.dy_from_psi * psi, nx + 1, ny, si::eps0);
  m.dz = scatter(p.dz_from_psi * psi, nx + 1, ny + 1, si::eps0);
  m.bx = m.hx;
  m.by = m.hy;
  m.bz = m.hz;
  for (NodeArray* a : {&m.bx, &m.by, &m.bz})
    for (auto& v : a->v) v *= si::mu0;

  m.xi_e = xi_energy(m);
  m.xi_m = xi_momentum(m);
  m.residual = residual(m).value_or(0.0);
  m.decay = boundary_decay(m);
  return m;
}

std::optional<double> residual(const ModeProfile& m) {
  const Grid2D& g = m.grid;
  const int nx = g.nx, ny = g.ny;
  const double k0 = m.omega / si::c0;
  const double dx = 1.0 / (k0 * g.hx()), dy = 1.0 / (k0 * g.hy());
  const double eta = m.eta;
  // Normalized fields: H~ = Z0 H, D~ = D / eps0.
  auto H = [&](const NodeArray& a, int i, int j) { return si::z0 * a.at_or_zero(i, j); };
  auto D = [&](const NodeArray& a, int i, int j) { return a.at_or_zero(i, j) / si::eps0; };
  auto E = [](const NodeArray& a, int i, int j) { return a.at_or_zero(i, j); };

  double rr = 0.0, scale = 0.0;
  auto acc = [&](cplx r) { rr += std::norm(r); };
  for (const auto* a : e_like(m))
    for (auto v : a->v) scale += std::norm(v);
  for (const auto* a : {&m.hx, &m.hy, &m.hz})
    for (auto v : a->v) scale += std::norm(si::z0 * v);
  for (const auto* a : {&m.dx, &m.dy, &m.dz})
    for (auto v : a->v) scale += std::norm(v / si::eps0);
  if (scale == 0.0) return std::nullopt;

  // curl E - i H~ = 0 on H nodes; curl H~ + i D~ = 0 on E nodes (interior only).
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i) {
      acc(dy * (E(m.ez, i, j + 1) - E(m.ez, i, j)) - I * eta * E(m.ey, i, j) - I * H(m.hx, i, j));
      acc(I * eta * H(m.hx, i, j) - dx * (H(m.hz, i, j) - H(m.hz, i - 1, j)) + I * D(m.dy, i, j));
    }
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      acc(I * eta * E(m.ex, i, j) - dx * (E(m.ez, i + 1, j) - E(m.ez, i, j)) - I * H(m.hy, i, j));
      acc(dy * (H(m.hz, i, j) - H(m.hz, i, j - 1)) - I * eta * H(m.hy, i, j) + I * D(m.dx, i, j));
    }
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      acc(dx * (E(m.ey, i + 1, j) - E(m.ey, i, j)) - dy * (E(m.ex, i, j + 1) - E(m.ex, i, j)) -
          I * H(m.hz, i, j));
  for (int j = 1; j < ny; ++j)
    for (int i = 1; i < nx; ++i)
      acc(dx * (H(m.hy, i, j) - H(m.hy, i - 1, j)) - dy * (H(m.hx, i, j) - H(m.hx, i, j - 1)) +
          I * D(m.dz, i, j));
  return std::sqrt(rr / scale);
}

double boundary_decay(const ModeProfile& m) {
  const Grid2D& g = m.grid;
  const double tx = 1.01 * g.hx(), ty = 1.01 * g.hy();
  double peak = 0.0, edge = 0.0;
  auto visit = [&](const NodeArray& a, NodeSet set, double scale) {
    for (int j = 0; j < a.ny; ++j)
      for (int i = 0; i < a.nx; ++i) {
        double v = std::abs(a(i, j)) * scale;
        peak = std::max(peak, v);
        auto [x, y] = node_position(g, set, i, j);
        bool near = x - g.x0 <= tx || g.x1 - x <= tx || y - g.y0 <= ty || g.y1 - y <= ty;
        if (near) edge = std::max(edge, v);
      }
  };
  visit(m.ex, NodeSet::ex, 1.0);
  visit(m.ey, NodeSet::ey, 1.0);
  visit(m.ez, NodeSet::ez, 1.0);
  visit(m.hx, NodeSet::ey, si::z0);
  visit(m.hy, NodeSet::ex, si::z0);
  visit(m.hz, NodeSet::hz, si::z0);
  return peak > 0.0 ? edge / peak : 0.0;
}

// ---------------------------------------------------------------------------

namespace {

// UMFPACK factorization of M - sigma I. The solver references the matrix, so
// the shifted copy lives alongside it.
// (M - sigma)^-1 applied as (A - sigma B)^-1 B: the pencil form is Hermitian
// and pattern-symmetric, so UMFPACK picks its symmetric (AMD) ordering and the
// factors stay far sparser than those of M - sigma.
class ShiftInvert {
 public:
  ShiftInvert(const OperatorPencil& p, double sigma) : b_(p.b), shifted_(p.a - sigma * p.b) {
    shifted_.makeCompressed();
    lu_.umfpackControl()(UMFPACK_STRATEGY) = UMFPACK_STRATEGY_SYMMETRIC;
    lu_.compute(shifted_);
    if (lu_.info() != Eigen::Success)
      throw NumericalError("sparse LU of the shifted operator failed (shift lands on an eigenvalue?)");
  }
  void apply(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const {
    const Eigen::VectorXcd bx = b_ * x;
    y = lu_.solve(bx);
  }

 private:
  const SparseMatrixC& b_;
  SparseMatrixC shifted_;
  Eigen::UmfPackLU<SparseMatrixC> lu_;
};

struct Candidate {
  cplx eta;
  Eigen::VectorXcd psi;
};

cplx b_form(const OperatorPencil& p, const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) {
  return u.dot(p.b * v);  // u^H B v
}

// Rotates the global phase so the largest transverse E sample is real positive.
void fix_phase(const UnknownLayout& L, Eigen::VectorXcd& psi) {
  Eigen::Index best = 0;
  double mag = -1.0;
  const int ne = L.n_ex() + L.n_ey();
  for (Eigen::Index k = 0; k < ne; ++k)
    if (std::abs(psi(k)) > mag * (1.0 + 1e-12)) {
      mag = std::abs(psi(k));
      best = k;
    }
  if (mag > 0.0) psi *= std::conj(psi(best)) / mag;
}

}  // namespace

ModeSet solve_modes(const OperatorPencil& p, const SearchParams& s) {
  if (s.n_eigs < 1) throw ValidationError("n_eigs must be at least 1");
  const double map_max = p.map ? p.map->max_index() : 0.0;
  const double eta_max = s.eta_max > 0.0 ? s.eta_max : map_max;
  if (!(s.eta_min >= 0.0) || !(eta_max > s.eta_min))
    throw ValidationError("eta search interval must satisfy 0 <= eta_min < eta_max");

  ModeSet out;
  out.omega = p.omega;
  SolverDiagnostics& diag = out.diagnostics;
  std::vector<Candidate> accepted;
  // Shift-invert returns every eigenvalue within some radius of the shift.
  // Starting at eta_max and lowering to the lowest value seen therefore walks
  // the window from the top without gaps.
  double sigma = s.shift_eta.value_or(eta_max);
  for (int attempt = 0; attempt <= s.max_shift_lowerings; ++attempt) {
    diag.shifts.push_back(sigma);
    ShiftInvert si_op(p, sigma);
    KrylovSchurOptions ko;
    ko.nev = s.n_eigs + 2;
    ko.tol = s.arnoldi_tol;
    auto ks = krylov_schur([&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { si_op.apply(x, y); },
                           p.m.rows(), ko);
    if (ks.converged < ko.nev) {
      std::ostringstream os;
      os << "Arnoldi did not converge: " << ks.converged << " of " << ko.nev
         << " Ritz pairs reached the tolerance; worst residual " << ks.residuals.maxCoeff();
      throw NumericalError(os.str());
    }
    diag.eigenpairs += static_cast<int>(ks.values.size());
    diag.restarts += ks.restarts;
    diag.operator_applications += ks.operator_applications;

    const std::size_t earlier = accepted.size();
    double lowest_seen = eta_max;
    bool window_exhausted = false;
    for (Eigen::Index q = 0; q < ks.values.size(); ++q) {
      cplx eta = sigma + 1.0 / ks.values(q);
      lowest_seen = std::min(lowest_seen, eta.real());
      if (eta.real() <= s.eta_min) window_exhausted = true;
      if (std::abs(eta.imag()) > s.imag_tol * std::abs(eta.real())) {
        ++diag.rejected_complex;
        continue;
      }
      if (!(eta.real() > s.eta_min) || eta.real() > eta_max * (1.0 + 1e-12)) {
        ++diag.rejected_window;
        continue;
      }
      Eigen::VectorXcd psi = ks.vectors.col(q);
      // Skip repeats from an earlier shift: same eta and not B-orthogonal.
      bool repeat = false;
      for (std::size_t c_idx = 0; c_idx < earlier; ++c_idx) {
        const auto& c = accepted[c_idx];
        if (std::abs(c.eta.real() - eta.real()) > 1e-8 * eta.real()) continue;
        cplx ov = b_form(p, c.psi, psi);
        double nn = std::sqrt(std::abs(b_form(p, c.psi, c.psi) * b_form(p, psi, psi)));
        if (std::abs(ov) > 1e-6 * nn) repeat = true;
      }
      if (repeat) continue;
      accepted.push_back({cplx(eta.real(), 0.0), psi});
    }
    if (static_cast<int>(accepted.size()) >= s.n_eigs || window_exhausted) break;
    sigma = lowest_seen * (1.0 - 1e-6);
  }

  std::sort(accepted.begin(), accepted.end(),
            [](const Candidate& a, const Candidate& b) { return a.eta.real() > b.eta.real(); });

  // Degenerate clusters: Gram-Schmidt in the energy form.
  std::vector<int> cluster(accepted.size(), -1);
  int next_cluster = 0;
  for (std::size_t a = 0; a + 1 < accepted.size(); ++a) {
    const double ea = accepted[a].eta.real();
    const double eb = accepted[a + 1].eta.real();
    if (std::abs(ea - eb) < s.degeneracy_gap * std::abs(ea)) {
      if (cluster[a] < 0) cluster[a] = next_cluster++;
      cluster[a + 1] = cluster[a];
    }
  }
  for (std::size_t a = 0; a < accepted.size(); ++a) {
    if (cluster[a] < 0) continue;
    for (std::size_t b = 0; b < a; ++b) {
      if (cluster[b] != cluster[a]) continue;
      cplx num = b_form(p, accepted[b].psi, accepted[a].psi);
      cplx den = b_form(p, accepted[b].psi, accepted[b].psi);
      accepted[a].psi -= (num / den) * accepted[b].psi;
    }
  }

  for (std::size_t a = 0; a < accepted.size(); ++a) {
    Eigen::VectorXcd psi = accepted[a].psi;
    fix_phase(p.layout, psi);
    ModeProfile m = complete_fields(p, psi, accepted[a].eta.real());
    m.cluster = cluster[a];
    if (!(m.xi_e > 0.0)) {
      ++diag.rejected_sign;
      continue;
    }
    if (m.decay > s.decay_max) {
      ++diag.rejected_decay;
      continue;
    }
    if (m.residual > s.residual_max) {
      ++diag.rejected_residual;
      continue;
    }
    out.modes.push_back(std::move(m));
    if (static_cast<int>(out.modes.size()) == s.n_eigs) break;
  }
  if (out.modes.empty() && diag.rejected_residual > 0)
    throw NumericalError("every candidate mode exceeded the residual limit");
  return out;
}

}  // namespace wgm
