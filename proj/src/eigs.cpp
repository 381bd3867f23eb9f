#include "wgm/eigs.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "wgm/constants.hpp"
#include "wgm/errors.hpp"

namespace wgm {

namespace {

// Complex Givens generator (LAPACK zlartg convention): c real, s complex with
// [c s; -conj(s) c] [f; g] = [r; 0].
void givens(cplx f, cplx g, double& c, cplx& s) {
  if (g == cplx{}) {
    c = 1.0;
    s = 0.0;
    return;
  }
  if (f == cplx{}) {
    c = 0.0;
    s = std::conj(g) / std::abs(g);
    return;
  }
  double af = std::abs(f), ag = std::abs(g);
  double nrm = std::hypot(af, ag);
  c = af / nrm;
  s = (f / af) * std::conj(g) / nrm;
}

// x' = c x + s y, y' = -conj(s) x + c y
template <typename X, typename Y>
void rot(X&& x, Y&& y, double c, cplx s) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    cplx xi = x(i), yi = y(i);
    x(i) = c * xi + s * yi;
    y(i) = -std::conj(s) * xi + c * yi;
  }
}

void swap_adjacent(Eigen::MatrixXcd& t, Eigen::MatrixXcd& z, Eigen::Index k) {
  const Eigen::Index n = t.rows();
  cplx t11 = t(k, k), t22 = t(k + 1, k + 1);
  double c;
  cplx s;
  givens(t(k, k + 1), t22 - t11, c, s);
  if (k + 2 < n) {
    auto r1 = t.row(k).segment(k + 2, n - k - 2);
    auto r2 = t.row(k + 1).segment(k + 2, n - k - 2);
    rot(r1, r2, c, s);
  }
  {
    auto c1 = t.col(k).head(k);
    auto c2 = t.col(k + 1).head(k);
    rot(c1, c2, c, std::conj(s));
  }
  t(k, k) = t22;
  t(k + 1, k + 1) = t11;
  t(k + 1, k) = 0.0;
  auto q1 = z.col(k);
  auto q2 = z.col(k + 1);
  rot(q1, q2, c, std::conj(s));
}

Eigen::VectorXcd random_unit(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = cplx(nd(rng), nd(rng));
  return v / v.norm();
}

// Two-pass classical Gram-Schmidt of w against the first `cols` columns of V.
Eigen::VectorXcd orthogonalize(const Eigen::MatrixXcd& v, Eigen::Index cols, Eigen::VectorXcd& w) {
  Eigen::VectorXcd h = v.leftCols(cols).adjoint() * w;
  w.noalias() -= v.leftCols(cols) * h;
  Eigen::VectorXcd h2 = v.leftCols(cols).adjoint() * w;
  w.noalias() -= v.leftCols(cols) * h2;
  return h + h2;
}

}  // namespace

void sort_schur_by_magnitude(Eigen::MatrixXcd& t, Eigen::MatrixXcd& z) {
  const Eigen::Index n = t.rows();
  // Bubble sort: stable and O(n^2) swaps, fine for Krylov subspace sizes.
  for (Eigen::Index pass = 0; pass < n; ++pass) {
    bool swapped = false;
    for (Eigen::Index k = 0; k + 1 < n - pass; ++k) {
      if (std::abs(t(k + 1, k + 1)) > std::abs(t(k, k))) {
        swap_adjacent(t, z, k);
        swapped = true;
      }
    }
    if (!swapped) break;
  }
}

KrylovSchurResult krylov_schur(const LinearOperator& op, Eigen::Index n,
                               const KrylovSchurOptions& opts) {
  if (opts.nev < 1) throw ValidationError("nev must be positive");
  const Eigen::Index nev = std::min<Eigen::Index>(opts.nev, n - 1);
  Eigen::Index m = opts.ncv > 0 ? opts.ncv : std::max<Eigen::Index>(2 * nev + 10, 30);
  m = std::min(m, n - 1);
  if (m <= nev) throw ValidationError("Krylov subspace too small for the requested eigenpairs");

  std::mt19937_64 rng(opts.seed);
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(n, m + 1);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(m + 1, m);
  v.col(0) = random_unit(n, rng);

  KrylovSchurResult res;
  Eigen::Index k = 0;
  Eigen::VectorXcd w(n);
  for (int restart = 0;; ++restart) {
    for (Eigen::Index j = k; j < m; ++j) {
      op(v.col(j), w);
      ++res.operator_applications;
      const double wnorm0 = w.norm();
      Eigen::VectorXcd coeff = orthogonalize(v, j + 1, w);
      h.col(j).head(j + 1) = coeff;
      double beta = w.norm();
      if (beta <= 1e-13 * std::max(wnorm0, 1e-300)) {
        // Invariant subspace found: continue with a fresh orthogonal direction.
        w = random_unit(n, rng);
        orthogonalize(v, j + 1, w);
        w /= w.norm();
        h(j + 1, j) = 0.0;
        v.col(j + 1) = w;
      } else {
        h(j + 1, j) = beta;
        v.col(j + 1) = w / beta;
      }
    }

    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(h.topLeftCorner(m, m));
    if (schur.info() != Eigen::Success) throw NumericalError("Schur decomposition failed");
    Eigen::MatrixXcd t = schur.matrixT();
    Eigen::MatrixXcd z = schur.matrixU();
    sort_schur_by_magnitude(t, z);

    // The last row of H holds beta e_m^T for a completed Arnoldi sweep; after
    // restarts it still multiplies only column m-1 once the sweep ran to m.
    const cplx beta = h(m, m - 1);
    Eigen::VectorXd resid(nev);
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(m, nev);
    int nconv = 0;
    for (Eigen::Index i = 0; i < nev; ++i) {
      // Eigenvector of the leading (i+1)x(i+1) triangular block.
      Eigen::VectorXcd yi = Eigen::VectorXcd::Zero(m);
      yi(i) = 1.0;
      const cplx lam = t(i, i);
      for (Eigen::Index r = i - 1; r >= 0; --r) {
        cplx acc = 0.0;
        for (Eigen::Index c2 = r + 1; c2 <= i; ++c2) acc += t(r, c2) * yi(c2);
        cplx d = t(r, r) - lam;
        if (std::abs(d) < 1e-300) d = 1e-300;
        yi(r) = -acc / d;
      }
      Eigen::VectorXcd zy = z * yi;
      zy /= zy.norm();
      y.col(i) = zy;
      double r_i = std::abs(beta) * std::abs(zy(m - 1)) / std::max(std::abs(lam), 1e-300);
      resid(i) = r_i;
      if (r_i <= opts.tol) ++nconv;
    }

    if (nconv >= nev || restart >= opts.max_restarts) {
      res.values.resize(nev);
      for (Eigen::Index i = 0; i < nev; ++i) res.values(i) = t(i, i);
      res.vectors = v.leftCols(m) * y;
      for (Eigen::Index i = 0; i < nev; ++i) res.vectors.col(i).normalize();
      res.residuals = resid;
      res.converged = nconv;
      res.restarts = restart;
      return res;
    }

    // Thick restart keeping the leading kk Schur vectors.
    Eigen::Index kk = std::min<Eigen::Index>(m - 1, std::max<Eigen::Index>(nev + nconv, (m + nev) / 2));
    Eigen::MatrixXcd vk = v.leftCols(m) * z.leftCols(kk);
    Eigen::VectorXcd vlast = v.col(m);
    v.setZero();
    v.leftCols(kk) = vk;
    v.col(kk) = vlast;
    h.setZero();
    h.topLeftCorner(kk, kk) = t.topLeftCorner(kk, kk);
    h.row(kk).head(kk) = beta * z.row(m - 1).head(kk);
    k = kk;
  }
}

}  // namespace wgm
