#include "wgm/materials.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wgm/errors.hpp"
#include "wgm/toml.hpp"

namespace wgm {

namespace {

constexpr double kMinPrincipalEps = 1e-6;

std::string window_text(const MaterialModel& m) {
  std::ostringstream os;
  os << "[" << m.window_min_um << ", " << m.window_max_um << "] um";
  return os.str();
}

double interp_linear(const std::vector<double>& x, const std::vector<double>& y, double xq) {
  auto it = std::upper_bound(x.begin(), x.end(), xq);
  if (it == x.begin()) return y.front();
  if (it == x.end()) return y.back();
  std::size_t i = static_cast<std::size_t>(it - x.begin());
  double t = (xq - x[i - 1]) / (x[i] - x[i - 1]);
  return y[i - 1] + t * (y[i] - y[i - 1]);
}

}  // namespace

// ---------------------------------------------------------------------------
// EpsilonTensor

bool EpsilonTensor::is_hermitian(const Eigen::Matrix3cd& m, double tol) {
  double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

EpsilonTensor::EpsilonTensor(const Eigen::Matrix3cd& m) : m_(m) {
  if (!is_hermitian(m_)) throw ValidationError("permittivity tensor is not Hermitian");
  // Symmetrize away rounding so downstream identities hold exactly.
  m_ = 0.5 * (m_ + m_.adjoint()).eval();
  if (eigenvalues().minCoeff() <= 0.0)
    throw ModelError("permittivity tensor is not positive definite");
}

EpsilonTensor EpsilonTensor::diagonal(double exx, double eyy, double ezz) {
  Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
  m(0, 0) = exx;
  m(1, 1) = eyy;
  m(2, 2) = ezz;
  return EpsilonTensor(m);
}

Eigen::Vector3d EpsilonTensor::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

// ---------------------------------------------------------------------------
// RotationSpec

namespace {

Eigen::Matrix3d axis_angle_matrix(const RotationSpec::Step& s) {
  double n = s.axis.norm();
  if (!(n > 0.0)) throw ValidationError("rotation axis must be non-zero");
  return Eigen::AngleAxisd(s.angle, s.axis / n).toRotationMatrix();
}

void check_proper(const Eigen::Matrix3d& r) {
  double orth = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (orth > 1e-12 || std::abs(r.determinant() - 1.0) > 1e-12)
    throw ValidationError("rotation matrix is not a proper rotation (orthogonal, det = +1)");
}

}  // namespace

RotationSpec::RotationSpec(const Eigen::Vector3d& axis, double angle)
    : RotationSpec(std::vector<Step>{{axis, angle}}) {}

RotationSpec::RotationSpec(std::vector<Step> steps) : steps_(std::move(steps)) {
  for (const auto& s : steps_) r_ = axis_angle_matrix(s) * r_;
}

RotationSpec RotationSpec::from_matrix(const Eigen::Matrix3d& r) {
  check_proper(r);
  Eigen::AngleAxisd aa(r);
  RotationSpec out;
  out.steps_ = {{aa.axis(), aa.angle()}};
  out.r_ = r;
  return out;
}

bool RotationSpec::is_identity(double tol) const {
  return (r_ - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= tol;
}

RotationSpec RotationSpec::inverse() const {
  RotationSpec out;
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it)
    out.steps_.push_back({it->axis, -it->angle});
  out.r_ = r_.transpose();
  return out;
}

RotationSpec RotationSpec::then(const RotationSpec& next) const {
  RotationSpec out;
  out.steps_ = steps_;
  out.steps_.insert(out.steps_.end(), next.steps_.begin(), next.steps_.end());
  out.r_ = next.r_ * r_;
  return out;
}

EpsilonTensor rotate_tensor(const EpsilonTensor& eps, const RotationSpec& rot) {
  check_proper(rot.matrix());
  if (rot.is_identity()) return eps;
  Eigen::Matrix3cd r = rot.matrix().cast<cplx>();
  return EpsilonTensor(r * eps.matrix() * r.transpose());
}

// ---------------------------------------------------------------------------
// Dispersion models

double sellmeier_index(const SellmeierCoefficients& coeffs, double lambda_um) {
  if (coeffs.b.size() != coeffs.c.size())
    throw ValidationError("Sellmeier B and C lists differ in length");
  const double l2 = lambda_um * lambda_um;
  double n2 = 1.0;
  for (std::size_t i = 0; i < coeffs.b.size(); ++i) {
    double denom = l2 - coeffs.c[i];
    if (std::abs(denom) <= 1e-12 * std::max(1.0, std::abs(l2)))
      throw ModelError("Sellmeier pole: lambda^2 equals C_" + std::to_string(i + 1));
    n2 += coeffs.b[i] * l2 / denom;
  }
  if (n2 <= 0.0) throw ModelError("Sellmeier evaluation gives index^2 <= 0");
  return std::sqrt(n2);
}

MaterialModel MaterialModel::constant_index(std::string name, double n) {
  MaterialModel m;
  m.name = std::move(name);
  m.kind = MaterialKind::constant;
  m.axis_count = 1;
  m.indices = {n};
  return m;
}

MaterialModel MaterialModel::constant_tensor(std::string name, const Eigen::Matrix3cd& eps) {
  MaterialModel m;
  m.name = std::move(name);
  m.kind = MaterialKind::constant;
  m.axis_count = 3;
  m.tensor = EpsilonTensor(eps).matrix();
  return m;
}

void MaterialModel::validate() const {
  auto bad = [&](const std::string& what) {
    throw ValidationError("material '" + name + "': " + what);
  };
  if (axis_count < 1 || axis_count > 3) bad("axis count must be 1, 2 or 3");
  if (!(window_min_um < window_max_um) || window_min_um < 0.0) bad("invalid validity window");
  const auto axes = static_cast<std::size_t>(axis_count);
  switch (kind) {
    case MaterialKind::constant:
      if (tensor) {
        EpsilonTensor check(*tensor);
        (void)check;
      } else if (indices.size() != axes) {
        bad("expected " + std::to_string(axes) + " constant indices");
      }
      break;
    case MaterialKind::sellmeier:
      if (sellmeier.size() != axes) bad("expected one Sellmeier coefficient set per axis");
      for (const auto& s : sellmeier)
        if (s.b.size() != s.c.size()) bad("Sellmeier B and C lengths differ");
      break;
    case MaterialKind::tabulated:
      if (table_lambda_um.size() < 2) bad("table needs at least two wavelengths");
      for (std::size_t i = 1; i < table_lambda_um.size(); ++i)
        if (!(table_lambda_um[i] > table_lambda_um[i - 1]))
          bad("tabulated wavelengths must be strictly increasing");
      if (table_index.size() != axes) bad("expected one index column per axis");
      for (const auto& col : table_index)
        if (col.size() != table_lambda_um.size()) bad("index column length mismatch");
      break;
  }
}

std::array<double, 3> MaterialModel::principal_indices(double lambda_um) const {
  std::vector<double> n;
  switch (kind) {
    case MaterialKind::constant:
      n = indices;
      break;
    case MaterialKind::sellmeier:
      for (const auto& s : sellmeier) n.push_back(sellmeier_index(s, lambda_um));
      break;
    case MaterialKind::tabulated:
      for (const auto& col : table_index) n.push_back(interp_linear(table_lambda_um, col, lambda_um));
      break;
  }
  if (n.size() == 1) return {n[0], n[0], n[0]};
  if (n.size() == 2) return {n[0], n[0], n[1]};
  if (n.size() == 3) return {n[0], n[1], n[2]};
  throw ValidationError("material '" + name + "' has no principal indices");
}

EpsilonTensor eval_permittivity(const MaterialModel& material, double omega) {
  if (!(omega > 0.0)) throw RangeError("angular frequency must be positive");
  const double lambda_um = lambda_um_from_omega(omega);
  if (lambda_um < material.window_min_um || lambda_um > material.window_max_um) {
    std::ostringstream os;
    os << "material '" << material.name << "': wavelength " << lambda_um
       << " um outside validity window " << window_text(material);
    throw RangeError(os.str());
  }
  if (material.kind == MaterialKind::constant && material.tensor)
    return EpsilonTensor(*material.tensor);
  auto n = material.principal_indices(lambda_um);
  std::array<double, 3> eps{};
  for (int i = 0; i < 3; ++i) {
    // Tabulated/constant data may carry signed values; reject non-physical ones.
    eps[i] = n[i] * n[i];
    if (!(n[i] > 0.0) || eps[i] < kMinPrincipalEps)
      throw ModelError("material '" + material.name + "': non-physical index at " +
                       std::to_string(lambda_um) + " um");
  }
  return EpsilonTensor::diagonal(eps[0], eps[1], eps[2]);
}

// ---------------------------------------------------------------------------
// MaterialLibrary

void MaterialLibrary::add(MaterialModel m) {
  m.validate();
  std::string key = m.name;
  models_[key] = std::move(m);
}

const MaterialModel& MaterialLibrary::get(const std::string& name) const {
  auto it = models_.find(name);
  if (it == models_.end()) throw ValidationError("unknown material '" + name + "'");
  return it->second;
}

namespace {

std::vector<double> to_doubles(const nlohmann::json& j, const std::string& ctx) {
  if (!j.is_array()) throw ValidationError(ctx + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw ValidationError(ctx + " must contain numbers only");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<std::vector<double>> to_rows(const nlohmann::json& j, const std::string& ctx) {
  if (!j.is_array()) throw ValidationError(ctx + " must be an array of arrays");
  std::vector<std::vector<double>> out;
  for (const auto& row : j) out.push_back(to_doubles(row, ctx));
  return out;
}

MaterialModel material_from_json(const std::string& name, const nlohmann::json& t) {
  static const std::vector<std::string> allowed = {
      "kind", "axes", "window_um", "citation", "indices", "tensor_re", "tensor_im",
      "B",    "C",    "wavelength_um", "index"};
  for (auto it = t.begin(); it != t.end(); ++it)
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw ValidationError("material '" + name + "': unknown key '" + it.key() + "'");

  MaterialModel m;
  m.name = name;
  const std::string kind = t.value("kind", std::string("constant"));
  if (kind == "constant") {
    m.kind = MaterialKind::constant;
  } else if (kind == "sellmeier") {
    m.kind = MaterialKind::sellmeier;
  } else if (kind == "tabulated") {
    m.kind = MaterialKind::tabulated;
  } else {
    throw ValidationError("material '" + name + "': unknown kind '" + kind + "'");
  }
  m.axis_count = t.value("axes", 1);
  m.citation = t.value("citation", std::string());
  if (t.contains("window_um")) {
    auto w = to_doubles(t["window_um"], name + ".window_um");
    if (w.size() != 2) throw ValidationError("material '" + name + "': window_um needs [min, max]");
    m.window_min_um = w[0];
    m.window_max_um = w[1];
  }
  const std::string ctx = "material '" + name + "'";
  switch (m.kind) {
    case MaterialKind::constant:
      if (t.contains("tensor_re")) {
        auto re = to_rows(t["tensor_re"], ctx + ".tensor_re");
        std::vector<std::vector<double>> im(3, std::vector<double>(3, 0.0));
        if (t.contains("tensor_im")) im = to_rows(t["tensor_im"], ctx + ".tensor_im");
        if (re.size() != 3 || im.size() != 3) throw ValidationError(ctx + ": tensor must be 3x3");
        Eigen::Matrix3cd e;
        for (int r = 0; r < 3; ++r) {
          if (re[r].size() != 3 || im[r].size() != 3) throw ValidationError(ctx + ": tensor must be 3x3");
          for (int c = 0; c < 3; ++c) e(r, c) = cplx(re[r][c], im[r][c]);
        }
        m.tensor = e;
        m.axis_count = 3;
      } else {
        m.indices = to_doubles(t.at("indices"), ctx + ".indices");
      }
      break;
    case MaterialKind::sellmeier: {
      auto b = to_rows(t.at("B"), ctx + ".B");
      auto c = to_rows(t.at("C"), ctx + ".C");
      if (b.size() != c.size()) throw ValidationError(ctx + ": B and C need the same axis count");
      for (std::size_t i = 0; i < b.size(); ++i) m.sellmeier.push_back({b[i], c[i]});
      break;
    }
    case MaterialKind::tabulated:
      m.table_lambda_um = to_doubles(t.at("wavelength_um"), ctx + ".wavelength_um");
      m.table_index = to_rows(t.at("index"), ctx + ".index");
      if (!t.contains("window_um")) {
        m.window_min_um = m.table_lambda_um.front();
        m.window_max_um = m.table_lambda_um.back();
      }
      break;
  }
  return m;
}

}  // namespace

MaterialLibrary MaterialLibrary::from_json(const nlohmann::json& doc) {
  MaterialLibrary lib;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!it->is_object()) throw ValidationError("material '" + it.key() + "' must be a table");
    lib.add(material_from_json(it.key(), *it));
  }
  return lib;
}

MaterialLibrary MaterialLibrary::from_toml_string(const std::string& text) {
  return from_json(parse_toml(text));
}

MaterialLibrary MaterialLibrary::from_toml_file(const std::string& path) {
  return from_json(parse_toml_file(path));
}

}  // namespace wgm
