#include "wgm/quantum.hpp"

#include <cmath>
// Boost 1.74's pchip.hpp calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/special_functions/hermite.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "wgm/errors.hpp"

namespace wgm {

namespace {

// Piecewise-linear interpolation on a strictly increasing grid.
double lerp_table(const std::vector<double>& x, const std::vector<double>& y, double at) {
  auto it = std::upper_bound(x.begin(), x.end(), at);
  std::size_t hi = std::clamp<std::size_t>(it - x.begin(), 1, x.size() - 1);
  const std::size_t lo = hi - 1;
  const double t = (at - x[lo]) / (x[hi] - x[lo]);
  return y[lo] + t * (y[hi] - y[lo]);
}

}  // namespace

BranchModel BranchModel::tabulated(const DispersionBranch& branch) {
  const auto& s = branch.samples;
  if (s.empty()) throw ValidationError("branch '" + branch.label + "' has no samples");
  std::vector<double> w, k, xe, xm;
  for (const auto& p : s) {
    if (!w.empty() && !(p.omega > w.back()))
      throw ValidationError("branch '" + branch.label + "': omega must increase strictly");
    w.push_back(p.omega);
    k.push_back(p.k);
    xe.push_back(p.xi_e);
    xm.push_back(p.xi_m);
  }
  BranchModel b;
  b.label_ = branch.label;
  b.omega_min_ = w.front();
  b.omega_max_ = w.back();
  if (w.size() == 1) {
    const double k0 = k[0], e0 = xe[0], m0 = xm[0];
    b.k_ = [k0](double) { return k0; };
    b.xi_e_ = [e0](double) { return e0; };
    b.xi_m_ = [m0](double) { return m0; };
    return b;
  }
  if (w.size() >= 4) {
    using Pchip = boost::math::interpolators::pchip<std::vector<double>>;
    auto spline = std::make_shared<Pchip>(std::vector<double>(w), std::vector<double>(k));
    b.k_ = [spline](double x) { return (*spline)(x); };
  } else {
    b.k_ = [w, k](double x) { return lerp_table(w, k, x); };
  }
  b.xi_e_ = [w, xe](double x) { return lerp_table(w, xe, x); };
  b.xi_m_ = [w, xm](double x) { return lerp_table(w, xm, x); };
  return b;
}

BranchModel BranchModel::taylor(std::string label, double omega0, std::vector<double> taylor,
                                double omega_min, double omega_max) {
  if (taylor.empty()) throw ValidationError("taylor branch needs at least k0");
  if (!(omega_min < omega_max) || !(omega_min > 0.0))
    throw ValidationError("taylor branch needs 0 < omega_min < omega_max");
  BranchModel b;
  b.label_ = std::move(label);
  b.omega_min_ = omega_min;
  b.omega_max_ = omega_max;
  b.k_ = [omega0, taylor](double w) {
    double acc = 0.0, term = 1.0;
    const double d = w - omega0;
    for (std::size_t n = 0; n < taylor.size(); ++n) {
      acc += taylor[n] * term;
      term *= d / static_cast<double>(n + 1);
    }
    return acc;
  };
  b.xi_e_ = [](double) { return 4.0; };
  auto kf = b.k_;
  b.xi_m_ = [kf](double w) { return 4.0 * kf(w) / w; };
  return b;
}

void BranchModel::require(double omega) const {
  if (!contains(omega)) {
    std::ostringstream msg;
    msg << "omega " << omega << " rad/s lies outside branch '" << label_ << "' range ["
        << omega_min_ << ", " << omega_max_ << "]";
    throw RangeError(msg.str());
  }
}

double BranchModel::k(double omega) const {
  require(omega);
  return k_(omega);
}
double BranchModel::xi_e(double omega) const {
  require(omega);
  return xi_e_(omega);
}
double BranchModel::xi_m(double omega) const {
  require(omega);
  return xi_m_(omega);
}

std::pair<double, double> photon_quanta(const BranchModel& branch, double omega) {
  return {si::hbar * omega, si::hbar * branch.k(omega)};
}

void SpectralAmplitude::validate() const {
  if (!branch) throw ValidationError("spectral amplitude has no branch");
  if (omega.size() != c.size())
    throw ValidationError("spectral amplitude: omega and c differ in length");
  if (omega.size() < 2) throw ValidationError("spectral amplitude needs at least two samples");
  for (std::size_t i = 1; i < omega.size(); ++i)
    if (!(omega[i] > omega[i - 1]))
      throw ValidationError("spectral amplitude: omega grid must increase strictly");
  if (!branch->contains(omega.front()) || !branch->contains(omega.back()))
    throw RangeError("spectral amplitude grid extends beyond branch '" + branch->label() + "'");
  for (const auto& v : c)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw ValidationError("spectral amplitude has non-finite samples");
}

namespace {

std::vector<double> trapezoid_weights(const std::vector<double>& x) {
  std::vector<double> w(x.size(), 0.0);
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double h = 0.5 * (x[i + 1] - x[i]);
    w[i] += h;
    w[i + 1] += h;
  }
  return w;
}

}  // namespace

SpectralAmplitude gaussian_amplitude(std::shared_ptr<const BranchModel> branch, double omega0,
                                     double fwhm_omega, double chirp_s2, AmplitudeTag tag,
                                     double scale, int n, double half_span_sigmas) {
  if (!(fwhm_omega > 0.0)) throw ValidationError("gaussian spectrum needs fwhm > 0");
  if (n < 3) throw ValidationError("gaussian spectrum needs at least 3 samples");
  if (!(scale >= 0.0)) throw ValidationError("gaussian spectrum scale must be non-negative");
  const double s = fwhm_omega / (2.0 * std::sqrt(std::log(2.0)));
  SpectralAmplitude a;
  a.branch = std::move(branch);
  a.tag = tag;
  a.omega.resize(n);
  a.c.resize(n);
  for (int i = 0; i < n; ++i) {
    const double d = half_span_sigmas * s * (2.0 * i / (n - 1) - 1.0);
    a.omega[i] = omega0 + d;
    a.c[i] = std::exp(cplx(-d * d / (2.0 * s * s), 0.5 * chirp_s2 * d * d));
  }
  a.validate();
  std::vector<double> dens(n);
  for (int i = 0; i < n; ++i)
    dens[i] = std::norm(a.c[i]) * (tag == AmplitudeTag::classical ? a.branch->xi_e(a.omega[i]) : 1.0);
  const double norm = trapezoid(a.omega, dens).value;
  const double amp = std::sqrt(scale / norm);
  for (auto& v : a.c) v *= amp;
  return a;
}

std::vector<double> spectral_density(const SpectralAmplitude& c, DensityKind kind) {
  c.validate();
  if (kind == DensityKind::number && c.tag == AmplitudeTag::classical)
    throw ValidationError("photon-number density needs a quantum-tagged amplitude");
  std::vector<double> out(c.omega.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double w = c.omega[i], a2 = std::norm(c.c[i]);
    if (c.tag == AmplitudeTag::classical) {
      out[i] = a2 * (kind == DensityKind::energy ? c.branch->xi_e(w) : c.branch->xi_m(w));
    } else if (kind == DensityKind::energy) {
      out[i] = si::hbar * w * a2;
    } else if (kind == DensityKind::momentum) {
      out[i] = si::hbar * c.branch->k(w) * a2;
    } else {
      out[i] = a2;
    }
  }
  return out;
}

Integral trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ValidationError("trapezoid: length mismatch");
  Integral r;
  if (x.size() < 2) return r;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) r.value += 0.5 * (x[i + 1] - x[i]) * (y[i] + y[i + 1]);
  // Coarse rule on even indices, compared over the same span.
  const std::size_t last = (x.size() - 1) / 2 * 2;
  if (last >= 2) {
    double fine = 0.0, coarse = 0.0;
    for (std::size_t i = 0; i < last; ++i) fine += 0.5 * (x[i + 1] - x[i]) * (y[i] + y[i + 1]);
    for (std::size_t i = 0; i < last; i += 2) coarse += 0.5 * (x[i + 2] - x[i]) * (y[i] + y[i + 2]);
    r.halving_estimate = std::abs(fine - coarse);
  }
  return r;
}

namespace {

Integral summed(const std::vector<SpectralAmplitude>& cs, DensityKind kind) {
  Integral total;
  for (const auto& c : cs) {
    if (c.tag != cs.front().tag)
      throw ValidationError("cannot mix classical and quantum amplitudes in one transfer");
    const Integral part = trapezoid(c.omega, spectral_density(c, kind));
    total.value += part.value;
    total.halving_estimate += part.halving_estimate;
  }
  return total;
}

}  // namespace

Integral transferred_energy(const std::vector<SpectralAmplitude>& cs) {
  return summed(cs, DensityKind::energy);
}
Integral transferred_momentum(const std::vector<SpectralAmplitude>& cs) {
  return summed(cs, DensityKind::momentum);
}
Integral photon_number(const std::vector<SpectralAmplitude>& cs) {
  return summed(cs, DensityKind::number);
}

Eigen::MatrixXcd TemporalModeBasis::gram() const {
  return f.adjoint() * weights.cast<cplx>().asDiagonal() * f;
}

double TemporalModeBasis::gram_defect() const {
  const Eigen::MatrixXcd g = gram();
  return (g - Eigen::MatrixXcd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

TemporalModeBasis build_temporal_basis(std::shared_ptr<const BranchModel> branch,
                                       const Eigen::MatrixXcd& samples,
                                       const std::vector<double>& omega) {
  if (samples.rows() != static_cast<Eigen::Index>(omega.size()))
    throw ValidationError("temporal basis: sample rows must match the omega grid");
  if (samples.cols() < 1) throw ValidationError("temporal basis needs at least one function");
  SpectralAmplitude probe{branch, omega, std::vector<cplx>(omega.size()), AmplitudeTag::quantum};
  probe.validate();
  TemporalModeBasis b;
  b.branch = std::move(branch);
  b.omega = omega;
  const auto w = trapezoid_weights(omega);
  b.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  const Eigen::VectorXcd wc = b.weights.cast<cplx>();
  auto inner = [&](const Eigen::VectorXcd& a, const Eigen::VectorXcd& c) {
    return (a.conjugate().array() * wc.array() * c.array()).sum();
  };
  b.f = samples;
  for (Eigen::Index l = 0; l < b.f.cols(); ++l) {
    Eigen::VectorXcd v = b.f.col(l);
    const double before = std::sqrt(inner(v, v).real());
    // Two modified Gram-Schmidt passes keep the Gram defect at round-off.
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index p = 0; p < l; ++p) v -= inner(b.f.col(p), v) * b.f.col(p);
    const double after = std::sqrt(inner(v, v).real());
    if (!(before > 0.0) || !(after > 1e-8 * before)) {
      std::ostringstream msg;
      msg << "temporal basis is rank deficient at function " << l << " (" << b.f.cols()
          << " requested on " << omega.size() << " samples)";
      throw NumericalError(msg.str());
    }
    b.f.col(l) = v / after;
  }
  return b;
}

TemporalModeBasis build_temporal_basis(std::shared_ptr<const BranchModel> branch,
                                       const HermiteGaussSpec& spec,
                                       const std::vector<double>& omega) {
  if (spec.count < 1) throw ValidationError("Hermite-Gauss basis needs count >= 1");
  if (!(spec.bandwidth > 0.0)) throw ValidationError("Hermite-Gauss basis needs bandwidth > 0");
  Eigen::MatrixXcd s(static_cast<Eigen::Index>(omega.size()), spec.count);
  for (std::size_t i = 0; i < omega.size(); ++i) {
    const double u = (omega[i] - spec.omega0) / spec.bandwidth;
    const double g = std::exp(-0.5 * u * u);
    for (int l = 0; l < spec.count; ++l)
      s(static_cast<Eigen::Index>(i), l) = boost::math::hermite(static_cast<unsigned>(l), u) * g;
  }
  return build_temporal_basis(std::move(branch), s, omega);
}

namespace {

// M_ll' = int g(omega) f^l* f^l' d omega
Eigen::MatrixXcd weighted_moment(const TemporalModeBasis& b, const std::function<double(double)>& g) {
  Eigen::VectorXcd w(b.weights.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = b.weights(i) * g(b.omega[i]);
  return b.f.adjoint() * w.asDiagonal() * b.f;
}

}  // namespace

Expectations fock_expectations(const TemporalModeBasis& basis, const std::vector<int>& occupations) {
  if (static_cast<int>(occupations.size()) != basis.size())
    throw ValidationError("occupation count " + std::to_string(occupations.size()) +
                          " does not match basis size " + std::to_string(basis.size()));
  Expectations e;
  const auto mf = weighted_moment(basis, [](double w) { return si::hbar * w; });
  const auto mg = weighted_moment(basis, [&](double w) { return si::hbar * basis.branch->k(w); });
  const auto mn = basis.gram();
  for (int l = 0; l < basis.size(); ++l) {
    if (occupations[l] < 0) throw ValidationError("occupations must be non-negative");
    e.energy += occupations[l] * mf(l, l).real();
    e.momentum += occupations[l] * mg(l, l).real();
    e.number += occupations[l] * mn(l, l).real();
  }
  return e;
}

Expectations coefficient_expectations(const TemporalModeBasis& basis, const Eigen::VectorXcd& alpha) {
  if (alpha.size() != basis.size()) throw ValidationError("coefficient count does not match basis");
  const auto mf = weighted_moment(basis, [](double w) { return si::hbar * w; });
  const auto mg = weighted_moment(basis, [&](double w) { return si::hbar * basis.branch->k(w); });
  Expectations e;
  e.energy = alpha.dot(mf * alpha).real();
  e.momentum = alpha.dot(mg * alpha).real();
  e.number = alpha.dot(basis.gram() * alpha).real();
  return e;
}

Eigen::VectorXcd expand(const TemporalModeBasis& basis, const SpectralAmplitude& c) {
  if (c.omega != basis.omega) throw ValidationError("amplitude and basis grids differ");
  const Eigen::Map<const Eigen::VectorXcd> v(c.c.data(), static_cast<Eigen::Index>(c.c.size()));
  return basis.f.adjoint() * (basis.weights.cast<cplx>().asDiagonal() * v);
}

Expectations amplitude_expectations(const SpectralAmplitude& c) {
  if (c.tag != AmplitudeTag::quantum)
    throw ValidationError("photon expectations need a quantum-tagged amplitude");
  return {transferred_energy({c}).value, transferred_momentum({c}).value, photon_number({c}).value};
}

SpectralAmplitude propagate(const SpectralAmplitude& c, double dz) {
  c.validate();
  SpectralAmplitude out = c;
  for (std::size_t i = 0; i < c.c.size(); ++i)
    out.c[i] = c.c[i] * std::exp(I * (c.branch->k(c.omega[i]) * dz));
  return out;
}

Envelope temporal_envelope(const SpectralAmplitude& c, double z, const std::vector<double>& t) {
  c.validate();
  if (t.size() < 2) throw ValidationError("temporal envelope needs at least two time samples");
  const std::size_t n = c.omega.size();
  const auto w = trapezoid_weights(c.omega);
  // Reference carrier removed from the phase sums to keep the arguments small.
  const double w_ref = c.omega[n / 2];
  const double k_ref = c.branch->k(w_ref);
  std::vector<cplx> base(n);
  std::vector<double> dw(n);
  for (std::size_t i = 0; i < n; ++i) {
    base[i] = w[i] * c.c[i] * std::exp(I * ((c.branch->k(c.omega[i]) - k_ref) * z));
    dw[i] = c.omega[i] - w_ref;
  }
  Envelope e;
  e.t = t;
  e.a.resize(t.size());
  const double norm = 1.0 / std::sqrt(2.0 * si::pi);
  for (std::size_t j = 0; j < t.size(); ++j) {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += base[i] * std::exp(-I * (dw[i] * t[j]));
    e.a[j] = norm * acc * std::exp(I * (k_ref * z - w_ref * t[j]));
  }
  std::vector<double> p(t.size()), tp(t.size());
  double peak = 0.0;
  for (std::size_t j = 0; j < t.size(); ++j) {
    p[j] = std::norm(e.a[j]);
    tp[j] = t[j] * p[j];
    peak = std::max(peak, std::abs(e.a[j]));
  }
  const double total = trapezoid(t, p).value;
  if (total > 0.0) {
    e.centroid = trapezoid(t, tp).value / total;
    std::vector<double> m2(t.size());
    for (std::size_t j = 0; j < t.size(); ++j) m2[j] = (t[j] - e.centroid) * (t[j] - e.centroid) * p[j];
    e.rms_duration = std::sqrt(trapezoid(t, m2).value / total);
  }
  e.aliasing = peak > 0.0 && std::max(std::abs(e.a.front()), std::abs(e.a.back())) > 1e-3 * peak;
  return e;
}

double gaussian_rms_duration(double rms0, double k2, double z) {
  const double r = k2 * z / (2.0 * rms0 * rms0);
  return rms0 * std::sqrt(1.0 + r * r);
}

PulseReport pulse_report(const SpectralAmplitude& c, const std::vector<double>& z,
                         const std::vector<double>& t) {
  PulseReport r;
  r.tag = c.tag;
  r.energy = transferred_energy({c});
  r.momentum = transferred_momentum({c});
  if (c.tag == AmplitudeTag::quantum) r.number = photon_number({c});
  for (double zz : z) {
    const Envelope e = temporal_envelope(c, zz, t);
    r.z.push_back(zz);
    r.rms_duration.push_back(e.rms_duration);
    r.arrival_time.push_back(e.centroid);
    r.aliasing.push_back(e.aliasing);
  }
  return r;
}

nlohmann::json pulse_report_json(const PulseReport& r) {
  auto integral = [](const Integral& i) {
    return nlohmann::json{{"value", i.value}, {"halving_estimate", i.halving_estimate}};
  };
  nlohmann::json j;
  j["normalization"] = r.tag == AmplitudeTag::quantum ? "quantum" : "classical";
  j["transferred_energy_j"] = integral(r.energy);
  j["transferred_momentum_kg_m_s"] = integral(r.momentum);
  if (r.tag == AmplitudeTag::quantum) j["photon_number"] = integral(r.number);
  j["vacuum_terms"] = "dropped (normal ordering)";
  nlohmann::json samples = nlohmann::json::array();
  for (std::size_t i = 0; i < r.z.size(); ++i)
    samples.push_back({{"z_m", r.z[i]},
                       {"rms_duration_s", r.rms_duration[i]},
                       {"arrival_time_s", r.arrival_time[i]},
                       {"aliasing", static_cast<bool>(r.aliasing[i])}});
  j["propagation"] = samples;
  return j;
}

std::string envelope_csv(const Envelope& e, const std::string& header_comment) {
  std::ostringstream os;
  if (!header_comment.empty()) os << "# " << header_comment << "\n";
  os << "t_s,re_A,im_A,abs_A2\n" << std::setprecision(17);
  for (std::size_t j = 0; j < e.t.size(); ++j)
    os << e.t[j] << ',' << e.a[j].real() << ',' << e.a[j].imag() << ',' << std::norm(e.a[j]) << '\n';
  return os.str();
}

}  // namespace wgm
