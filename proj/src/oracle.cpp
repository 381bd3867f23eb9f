#include "wgm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "wgm/errors.hpp"

namespace wgm {

namespace {

// Characteristic function of order p; decreasing from kappa_max d - p pi at
// eta = n_clad to -(p + 1) pi at eta = n_core.
double slab_residual(double eta, double n1, double n2, double d, double k0, SlabPolarization pol,
                     int p) {
  const double kappa = k0 * std::sqrt(std::max(n1 * n1 - eta * eta, 0.0));
  const double gamma = k0 * std::sqrt(std::max(eta * eta - n2 * n2, 0.0));
  double r = kappa > 0.0 ? gamma / kappa : std::numeric_limits<double>::infinity();
  if (pol == SlabPolarization::tm) r *= (n1 * n1) / (n2 * n2);
  return kappa * d - p * si::pi - 2.0 * std::atan(r);
}

}  // namespace

std::vector<double> slab_dispersion(double n_core, double n_clad, double thickness_m,
                                    double lambda_m, SlabPolarization pol) {
  std::vector<double> roots;
  if (!(n_core > n_clad)) return roots;
  const double k0 = 2.0 * si::pi / lambda_m;
  const double v = k0 * std::sqrt(n_core * n_core - n_clad * n_clad) * thickness_m;
  const int scan = 2000;
  for (int p = 0; p * si::pi < v; ++p) {
    auto f = [&](double eta) {
      return slab_residual(eta, n_core, n_clad, thickness_m, k0, pol, p);
    };
    // Sign scan from the cladding side; the first change brackets the root.
    double lo = n_clad, flo = f(lo);
    bool found = false;
    double hi = lo;
    for (int s = 1; s <= scan && !found; ++s) {
      hi = n_clad + (n_core - n_clad) * s / scan;
      const double fhi = f(hi);
      if ((flo > 0.0) != (fhi > 0.0)) {
        found = true;
      } else {
        lo = hi;
        flo = fhi;
      }
    }
    if (!found) continue;
    while (hi - lo > 1e-15 * n_core) {
      const double mid = 0.5 * (lo + hi);
      if ((f(mid) > 0.0) == (flo > 0.0)) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    roots.push_back(0.5 * (lo + hi));
  }
  return roots;
}

std::vector<BoxMode> box_modes(double a_m, double b_m, double n_fill, double omega) {
  std::vector<BoxMode> out;
  const double k0 = omega / si::c0;
  const int pmax = static_cast<int>(n_fill * k0 * a_m / si::pi) + 1;
  const int qmax = static_cast<int>(n_fill * k0 * b_m / si::pi) + 1;
  for (int p = 0; p <= pmax; ++p)
    for (int q = 0; q <= qmax; ++q) {
      if (p + q == 0) continue;
      const double kt2 = std::pow(p * si::pi / a_m, 2) + std::pow(q * si::pi / b_m, 2);
      const double eta2 = n_fill * n_fill - kt2 / (k0 * k0);
      if (eta2 <= 0.0) continue;
      out.push_back({p, q, BoxPolarization::te, std::sqrt(eta2)});
      if (p > 0 && q > 0) out.push_back({p, q, BoxPolarization::tm, std::sqrt(eta2)});
    }
  std::stable_sort(out.begin(), out.end(),
                   [](const BoxMode& l, const BoxMode& r) { return l.eta > r.eta; });
  return out;
}

std::pair<double, double> uniaxial_plane_indices(const EpsilonTensor& eps,
                                                 const Eigen::Vector3d& direction) {
  const Eigen::Matrix3cd& m = eps.matrix();
  if (m.imag().cwiseAbs().maxCoeff() > 1e-14 * m.cwiseAbs().maxCoeff())
    throw ValidationError("uniaxial_plane_indices needs a real symmetric tensor");
  if (!(direction.norm() > 0.0)) throw ValidationError("propagation direction is zero");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m.real());
  const Eigen::Vector3d ev = es.eigenvalues();
  const double tol = 1e-9 * ev.cwiseAbs().maxCoeff();
  const bool low_pair = std::abs(ev(1) - ev(0)) <= tol;
  const bool high_pair = std::abs(ev(2) - ev(1)) <= tol;
  if (!low_pair && !high_pair)
    throw ValidationError("tensor is biaxial (three distinct eigenvalues); not uniaxial");
  if (low_pair && high_pair) {
    const double n = std::sqrt(ev(1));
    return {n, n};
  }
  // The distinct eigenvalue defines the optic axis.
  const int axis_index = low_pair ? 2 : 0;
  const double eps_o = low_pair ? ev(0) : ev(2);
  const double eps_e = ev(axis_index);
  const Eigen::Vector3d axis = es.eigenvectors().col(axis_index);
  const double c = std::clamp(axis.dot(direction.normalized()), -1.0, 1.0);
  const double s2 = 1.0 - c * c;
  // Index ellipsoid: 1 / n_e(theta)^2 = cos^2 / n_o^2 + sin^2 / n_E^2.
  const double inv = c * c / eps_o + s2 / eps_e;
  return {std::sqrt(eps_o), 1.0 / std::sqrt(inv)};
}

namespace {

struct Monomial {
  int a, b, c;
};

std::vector<Monomial> monomials(int degree) {
  std::vector<Monomial> out;
  for (int a = 0; a <= degree; ++a)
    for (int b = 0; a + b <= degree; ++b)
      for (int c = 0; a + b + c <= degree; ++c) out.push_back({a, b, c});
  return out;
}

double ipow(double x, int n) { return n <= 0 ? 1.0 : std::pow(x, n); }

}  // namespace

AnalyticField random_polynomial_field(unsigned seed, int degree) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto terms = monomials(degree);
  std::vector<std::array<cplx, 3>> coef(terms.size());
  for (auto& c : coef)
    for (auto& v : c) v = {u(rng), u(rng)};
  AnalyticField f;
  f.label = "polynomial(seed=" + std::to_string(seed) + ", degree=" + std::to_string(degree) + ")";
  f.value = [terms, coef](const Eigen::Vector3d& r) {
    Eigen::Vector3cd v = Eigen::Vector3cd::Zero();
    for (std::size_t t = 0; t < terms.size(); ++t) {
      const double mono = ipow(r(0), terms[t].a) * ipow(r(1), terms[t].b) * ipow(r(2), terms[t].c);
      for (int k = 0; k < 3; ++k) v(k) += coef[t][k] * mono;
    }
    return v;
  };
  f.jacobian = [terms, coef](const Eigen::Vector3d& r) {
    Eigen::Matrix3cd j = Eigen::Matrix3cd::Zero();
    for (std::size_t t = 0; t < terms.size(); ++t) {
      const auto [a, b, c] = terms[t];
      const double d[3] = {a * ipow(r(0), a - 1) * ipow(r(1), b) * ipow(r(2), c),
                           b * ipow(r(0), a) * ipow(r(1), b - 1) * ipow(r(2), c),
                           c * ipow(r(0), a) * ipow(r(1), b) * ipow(r(2), c - 1)};
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) j(k, l) += coef[t][k] * d[l];
    }
    return j;
  };
  return f;
}

AnalyticField random_trigonometric_field(unsigned seed) {
  // X_a = sum_t A_at sin(k_t . r + p_t) cos(q_t . r + s_t)
  struct Term {
    Eigen::Vector3d k, q;
    double p, s;
    Eigen::Vector3cd amp;
  };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Term> terms(3);
  for (auto& t : terms) {
    t.k = 3.0 * Eigen::Vector3d(u(rng), u(rng), u(rng));
    t.q = 3.0 * Eigen::Vector3d(u(rng), u(rng), u(rng));
    t.p = si::pi * u(rng);
    t.s = si::pi * u(rng);
    for (int a = 0; a < 3; ++a) t.amp(a) = {u(rng), u(rng)};
  }
  AnalyticField f;
  f.label = "trigonometric(seed=" + std::to_string(seed) + ")";
  f.value = [terms](const Eigen::Vector3d& r) {
    Eigen::Vector3cd v = Eigen::Vector3cd::Zero();
    for (const auto& t : terms) v += t.amp * (std::sin(t.k.dot(r) + t.p) * std::cos(t.q.dot(r) + t.s));
    return v;
  };
  f.jacobian = [terms](const Eigen::Vector3d& r) {
    Eigen::Matrix3cd j = Eigen::Matrix3cd::Zero();
    for (const auto& t : terms) {
      const double a = t.k.dot(r) + t.p, b = t.q.dot(r) + t.s;
      const Eigen::Vector3d grad = std::cos(a) * std::cos(b) * t.k - std::sin(a) * std::sin(b) * t.q;
      j += t.amp * grad.cast<cplx>().transpose();
    }
    return j;
  };
  return f;
}

double lemma3_check(const AnalyticField& xf, const AnalyticField& yf,
                    const std::vector<Eigen::Vector3d>& points) {
  double worst = 0.0;
  for (const auto& r : points) {
    const Eigen::Vector3cd x = xf.value(r), y = yf.value(r);
    const Eigen::Matrix3cd jx = xf.jacobian(r), jy = yf.jacobian(r);
    const cplx div_y = jy.trace();
    const Eigen::Vector3cd curl_x(jx(2, 1) - jx(1, 2), jx(0, 2) - jx(2, 0), jx(1, 0) - jx(0, 1));
    // Bilinear cross product; Eigen's complex cross() is not bilinear.
    const Eigen::Vector3cd y_cross_curl(y(1) * curl_x(2) - y(2) * curl_x(1),
                                        y(2) * curl_x(0) - y(0) * curl_x(2),
                                        y(0) * curl_x(1) - y(1) * curl_x(0));
    const Eigen::Vector3cd lhs = x * div_y - y_cross_curl;
    for (int a = 0; a < 3; ++a) {
      cplx div_q = 0.0, w = 0.0;
      for (int b = 0; b < 3; ++b) {
        div_q += jx(a, b) * y(b) + x(a) * jy(b, b);
        div_q -= 0.5 * (jx(b, a) * y(b) + x(b) * jy(b, a));
        w += 0.5 * (x(b) * jy(b, a) - y(b) * jx(b, a));
      }
      worst = std::max(worst, std::abs(lhs(a) - div_q - w));
    }
  }
  return worst;
}

Lemma1Result lemma1_check(const AnalyticField& xf, const Grid2D& g,
                          const std::vector<double>& z_samples) {
  Lemma1Result out;
  const double area = g.hx() * g.hy();
  for (double z : z_samples) {
    cplx div_int = 0.0, dz_int = 0.0;
    double peak = 0.0, edge = 0.0;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const Eigen::Vector3d r(g.x(i + 0.5), g.y(j + 0.5), z);
        const Eigen::Matrix3cd jac = xf.jacobian(r);
        div_int += jac.trace() * area;
        dz_int += jac(2, 2) * area;
        const double mag = xf.value(r).norm();
        peak = std::max(peak, mag);
        if (i == 0 || j == 0 || i == g.nx - 1 || j == g.ny - 1) edge = std::max(edge, mag);
      }
    out.residual = std::max(out.residual, std::abs(div_int - dz_int));
    out.scale = std::max(out.scale, std::abs(dz_int));
    if (peak > 0.0 && edge > 1e-12 * peak) out.decay_warning = true;
  }
  return out;
}

std::pair<double, double> lemma2_defects(const Eigen::Matrix3cd& kappa, const Eigen::Vector3cd& x1,
                                         const Eigen::Vector3cd& x2) {
  // "." is the bilinear product without conjugation.
  auto bdot = [](const Eigen::Vector3cd& a, const Eigen::Vector3cd& b) {
    return (a.array() * b.array()).sum();
  };
  const Eigen::Vector3cd k1 = kappa * x1, k2 = kappa * x2;
  const double norm_k = kappa.norm();
  const double s12 = norm_k * x1.norm() * x2.norm();
  const double s11 = norm_k * x1.squaredNorm();
  const double first = std::abs(bdot(x1, k2.conjugate()) - bdot(k1, x2.conjugate()));
  const double second = std::abs(bdot(x1, k1.conjugate()).imag());
  return {s12 > 0.0 ? first / s12 : first, s11 > 0.0 ? second / s11 : second};
}

IdentityIntegrals appendix_c_cancellation(const ModeProfile& m, Quadrature q) {
  return identity_integrals(m, q);
}

std::optional<double> convergence_order(double v_h, double v_h2, double v_h4) {
  const double num = std::abs(v_h - v_h2), den = std::abs(v_h2 - v_h4);
  if (num == 0.0 || den == 0.0 || !std::isfinite(num) || !std::isfinite(den)) return std::nullopt;
  return std::log2(num / den);
}

nlohmann::json checks_json(const std::vector<Check>& checks) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : checks)
    out.push_back({{"name", c.name},
                   {"value", c.value},
                   {"tolerance", c.tolerance},
                   {"pass", c.pass},
                   {"detail", c.detail}});
  return out;
}

}  // namespace wgm
