#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wgm/materials.hpp"

namespace wgm {

// Shapes, in metres. Every shape owns its lower/left boundary exclusively and
// its upper/right boundary inclusively, so a point on a shared edge belongs to
// the shape below/left of it unless a later primitive claims it.

struct FullPlane {};

struct HalfPlane {
  double y_level = 0.0;
  bool below = true;  // y <= y_level when true, y > y_level otherwise
};

struct Rectangle {
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
};

/// Isosceles trapezoid standing on y = y_base, centred at center_x.
struct Trapezoid {
  double center_x = 0.0;
  double y_base = 0.0;
  double height = 0.0;
  double base_width = 0.0;
  double top_width = 0.0;

  /// Top width from a sidewall angle phi in (0, pi/2] measured from the base:
  /// top = base - 2 height / tan(phi). Throws ValidationError if negative.
  static Trapezoid from_sidewall(double center_x, double y_base, double height,
                                 double base_width, double phi);
  /// Base width from the top width and sidewall angle.
  static Trapezoid from_top_width(double center_x, double y_base, double height,
                                  double top_width, double phi);
};

using Shape = std::variant<FullPlane, HalfPlane, Rectangle, Trapezoid>;

bool contains(const Shape& shape, double x, double y);

struct Primitive {
  Shape shape;
  std::string material;
  std::optional<RotationSpec> rotation;
};

/// Ordered paint list; the first primitive is always a full-plane background.
class CrossSection {
 public:
  explicit CrossSection(std::string background_material,
                        std::optional<RotationSpec> rotation = std::nullopt);

  CrossSection& paint(Shape shape, std::string material,
                      std::optional<RotationSpec> rotation = std::nullopt);

  const std::vector<Primitive>& primitives() const { return prims_; }

  /// Last-painted primitive containing (x, y).
  const Primitive& point_query(double x, double y) const;

 private:
  std::vector<Primitive> prims_;
};

/// Uniform rectangular window with Nx x Ny cells.
///
/// Field placement follows the 2D Yee cell: Ex at (i+1/2, j), Ey at (i, j+1/2),
/// Ez at (i, j), Hx at (i, j+1/2), Hy at (i+1/2, j), Hz at (i+1/2, j+1/2).
struct Grid2D {
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
  int nx = 0, ny = 0;

  Grid2D() = default;
  Grid2D(double x0, double x1, double y0, double y1, int nx, int ny);

  double hx() const { return (x1 - x0) / nx; }
  double hy() const { return (y1 - y0) / ny; }
  double x(double i) const { return x0 + i * hx(); }
  double y(double j) const { return y0 + j * hy(); }
  /// Window of size (wx, wy) centred on (cx, cy).
  static Grid2D centered(double cx, double cy, double wx, double wy, int nx, int ny);

  bool operator==(const Grid2D& o) const = default;
};

/// Staggered sampling locations.
enum class NodeSet { ex, ey, ez, hz };

/// Complex samples on one staggered node set, row-major (index = j * nx + i).
struct NodeArray {
  int nx = 0, ny = 0;
  std::vector<cplx> v;

  NodeArray() = default;
  NodeArray(int nx_, int ny_) : nx(nx_), ny(ny_), v(static_cast<std::size_t>(nx_) * ny_) {}
  cplx& operator()(int i, int j) { return v[static_cast<std::size_t>(j) * nx + i]; }
  cplx operator()(int i, int j) const { return v[static_cast<std::size_t>(j) * nx + i]; }
  /// Zero outside the stored range (PEC walls).
  cplx at_or_zero(int i, int j) const {
    return (i < 0 || j < 0 || i >= nx || j >= ny) ? cplx{} : (*this)(i, j);
  }
};

/// Dimensions of a node set on `grid`, including boundary nodes.
std::pair<int, int> node_dims(const Grid2D& grid, NodeSet set);
/// Physical coordinate of node (i, j) of a set.
std::pair<double, double> node_position(const Grid2D& grid, NodeSet set, int i, int j);

/// Permittivity tensors at the Ex, Ey and Ez sampling points of a grid.
struct EpsilonMap {
  Grid2D grid;
  double omega = 0.0;
  std::vector<Eigen::Matrix3cd> ex, ey, ez;  // row-major over node_dims

  const Eigen::Matrix3cd& at(NodeSet set, int i, int j) const;
  double max_index() const;
};

struct RasterOptions {
  /// Average each tensor entry over a 2x2 sub-sample pattern instead of
  /// sampling at the node itself.
  bool subcell_average = false;
};

/// Evaluates, rotates and samples the permittivity of `cs` on `grid`.
/// Material errors are re-thrown with the failing node position.
EpsilonMap rasterize(const CrossSection& cs, const MaterialLibrary& lib, const Grid2D& grid,
                     double omega, const RasterOptions& opts = {});

}  // namespace wgm
