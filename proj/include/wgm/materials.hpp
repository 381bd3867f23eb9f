#pragma once

#include <Eigen/Dense>

#include <array>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wgm/constants.hpp"

namespace wgm {

/// Relative permittivity sample: a 3x3 complex Hermitian matrix.
///
/// Construction validates Hermiticity (1e-14 absolute, scaled by the
/// largest entry) and positive definiteness.
class EpsilonTensor {
 public:
  EpsilonTensor() : m_(Eigen::Matrix3cd::Identity()) {}
  explicit EpsilonTensor(const Eigen::Matrix3cd& m);

  static EpsilonTensor identity() { return EpsilonTensor{}; }
  static EpsilonTensor isotropic(double eps) { return diagonal(eps, eps, eps); }
  static EpsilonTensor diagonal(double exx, double eyy, double ezz);

  const Eigen::Matrix3cd& matrix() const { return m_; }
  cplx operator()(int r, int c) const { return m_(r, c); }

  /// Real eigenvalues in ascending order.
  Eigen::Vector3d eigenvalues() const;

  static bool is_hermitian(const Eigen::Matrix3cd& m, double tol = 1e-14);

 private:
  Eigen::Matrix3cd m_;
};

/// Proper rotation R mapping crystal-frame vectors into the channel frame.
///
/// Built from an ordered list of axis-angle steps; the first step is applied
/// first (R = R_n ... R_2 R_1). A typical crystal description is a cut
/// rotation followed by an in-plane rotation of the channel axis.
class RotationSpec {
 public:
  struct Step {
    Eigen::Vector3d axis;
    double angle;  // radians
  };

  RotationSpec() = default;
  RotationSpec(const Eigen::Vector3d& axis, double angle);
  explicit RotationSpec(std::vector<Step> steps);

  /// Wraps an explicit matrix; throws ValidationError unless R is orthogonal
  /// with det(R) = +1 to 1e-12.
  static RotationSpec from_matrix(const Eigen::Matrix3d& r);

  const Eigen::Matrix3d& matrix() const { return r_; }
  const std::vector<Step>& steps() const { return steps_; }
  bool is_identity(double tol = 1e-15) const;
  RotationSpec inverse() const;
  /// Rotation that applies `*this` first and then `next`.
  RotationSpec then(const RotationSpec& next) const;

 private:
  std::vector<Step> steps_;
  Eigen::Matrix3d r_ = Eigen::Matrix3d::Identity();
};

/// Returns R eps R^T. Throws ValidationError if `rot` is not a proper rotation.
EpsilonTensor rotate_tensor(const EpsilonTensor& eps, const RotationSpec& rot);

struct SellmeierCoefficients {
  std::vector<double> b;  // dimensionless strengths
  std::vector<double> c;  // resonance terms, um^2
};

/// n = sqrt(1 + sum_i B_i l^2 / (l^2 - C_i)), lambda in micrometres.
double sellmeier_index(const SellmeierCoefficients& coeffs, double lambda_um);

enum class MaterialKind { constant, sellmeier, tabulated };

/// Frequency-dependent material in its principal (crystal) frame.
///
/// `axis_count` is 1 (isotropic), 2 (uniaxial: ordinary, extraordinary;
/// the extraordinary axis is crystal Z) or 3 (biaxial X, Y, Z). A constant
/// material may instead carry a full Hermitian tensor, which is how
/// gyrotropic media enter.
struct MaterialModel {
  std::string name;
  MaterialKind kind = MaterialKind::constant;
  int axis_count = 1;
  double window_min_um = 0.0;
  double window_max_um = std::numeric_limits<double>::infinity();
  std::string citation;

  std::vector<double> indices;                   // constant
  std::optional<Eigen::Matrix3cd> tensor;        // constant, full tensor
  std::vector<SellmeierCoefficients> sellmeier;  // one per axis
  std::vector<double> table_lambda_um;           // tabulated, increasing
  std::vector<std::vector<double>> table_index;  // one column per axis

  static MaterialModel constant_index(std::string name, double n);
  static MaterialModel constant_tensor(std::string name, const Eigen::Matrix3cd& eps);

  /// Checks the structural invariants; throws ValidationError.
  void validate() const;
  /// Principal refractive indices (X, Y, Z) at a vacuum wavelength.
  std::array<double, 3> principal_indices(double lambda_um) const;
};

/// Permittivity in the crystal principal frame at angular frequency omega.
/// Throws RangeError outside the validity window and ModelError for
/// non-physical values.
EpsilonTensor eval_permittivity(const MaterialModel& material, double omega);

/// Named collection of materials, typically loaded from a TOML file.
class MaterialLibrary {
 public:
  void add(MaterialModel m);
  const MaterialModel& get(const std::string& name) const;
  bool contains(const std::string& name) const { return models_.count(name) != 0; }
  const std::map<std::string, MaterialModel>& all() const { return models_; }

  /// Parses a material table document (see data/materials.toml).
  static MaterialLibrary from_json(const nlohmann::json& doc);
  static MaterialLibrary from_toml_string(const std::string& text);
  static MaterialLibrary from_toml_file(const std::string& path);

 private:
  std::map<std::string, MaterialModel> models_;
};

}  // namespace wgm
