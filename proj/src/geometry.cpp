#include "wgm/geometry.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "wgm/errors.hpp"

namespace wgm {

Trapezoid Trapezoid::from_sidewall(double center_x, double y_base, double height,
                                   double base_width, double phi) {
  if (!(phi > 0.0 && phi <= si::pi / 2 + 1e-15))
    throw ValidationError("sidewall angle must lie in (0, 90] degrees");
  if (!(height > 0.0) || !(base_width > 0.0))
    throw ValidationError("trapezoid height and base width must be positive");
  double top = base_width - 2.0 * height / std::tan(phi);
  if (std::abs(top) < 1e-15 * base_width) top = 0.0;
  if (top < 0.0) throw ValidationError("trapezoid sidewall angle gives a negative top width");
  return {center_x, y_base, height, base_width, top};
}

Trapezoid Trapezoid::from_top_width(double center_x, double y_base, double height,
                                    double top_width, double phi) {
  if (!(phi > 0.0 && phi <= si::pi / 2 + 1e-15))
    throw ValidationError("sidewall angle must lie in (0, 90] degrees");
  if (!(height > 0.0) || top_width < 0.0)
    throw ValidationError("trapezoid height must be positive and top width non-negative");
  double base = top_width + 2.0 * height / std::tan(phi);
  return {center_x, y_base, height, base, top_width};
}

namespace {

struct ContainsVisitor {
  double x, y;
  bool operator()(const FullPlane&) const { return true; }
  bool operator()(const HalfPlane& h) const { return h.below ? y <= h.y_level : y > h.y_level; }
  bool operator()(const Rectangle& r) const {
    return x > r.x0 && x <= r.x1 && y > r.y0 && y <= r.y1;
  }
  bool operator()(const Trapezoid& t) const {
    if (!(y > t.y_base && y <= t.y_base + t.height)) return false;
    double frac = (y - t.y_base) / t.height;
    double half = 0.5 * (t.base_width + (t.top_width - t.base_width) * frac);
    return x > t.center_x - half && x <= t.center_x + half;
  }
};

}  // namespace

bool contains(const Shape& shape, double x, double y) {
  return std::visit(ContainsVisitor{x, y}, shape);
}

CrossSection::CrossSection(std::string background_material, std::optional<RotationSpec> rotation) {
  prims_.push_back({FullPlane{}, std::move(background_material), std::move(rotation)});
}

CrossSection& CrossSection::paint(Shape shape, std::string material,
                                  std::optional<RotationSpec> rotation) {
  if (const auto* r = std::get_if<Rectangle>(&shape); r && !(r->x1 > r->x0 && r->y1 > r->y0))
    throw ValidationError("rectangle must have positive extent");
  prims_.push_back({std::move(shape), std::move(material), std::move(rotation)});
  return *this;
}

const Primitive& CrossSection::point_query(double x, double y) const {
  for (auto it = prims_.rbegin(); it != prims_.rend(); ++it)
    if (contains(it->shape, x, y)) return *it;
  return prims_.front();
}

// ---------------------------------------------------------------------------

Grid2D::Grid2D(double x0_, double x1_, double y0_, double y1_, int nx_, int ny_)
    : x0(x0_), x1(x1_), y0(y0_), y1(y1_), nx(nx_), ny(ny_) {
  if (nx < 8 || ny < 8) throw ValidationError("grid needs at least 8 cells per direction");
  if (!(x1 > x0) || !(y1 > y0)) throw ValidationError("grid extent must be positive");
}

Grid2D Grid2D::centered(double cx, double cy, double wx, double wy, int nx, int ny) {
  return Grid2D(cx - wx / 2, cx + wx / 2, cy - wy / 2, cy + wy / 2, nx, ny);
}

std::pair<int, int> node_dims(const Grid2D& g, NodeSet set) {
  switch (set) {
    case NodeSet::ex: return {g.nx, g.ny + 1};
    case NodeSet::ey: return {g.nx + 1, g.ny};
    case NodeSet::ez: return {g.nx + 1, g.ny + 1};
    case NodeSet::hz: return {g.nx, g.ny};
  }
  return {0, 0};
}

std::pair<double, double> node_position(const Grid2D& g, NodeSet set, int i, int j) {
  switch (set) {
    case NodeSet::ex: return {g.x(i + 0.5), g.y(j)};
    case NodeSet::ey: return {g.x(i), g.y(j + 0.5)};
    case NodeSet::ez: return {g.x(i), g.y(j)};
    case NodeSet::hz: return {g.x(i + 0.5), g.y(j + 0.5)};
  }
  return {0.0, 0.0};
}

const Eigen::Matrix3cd& EpsilonMap::at(NodeSet set, int i, int j) const {
  auto [nx, ny] = node_dims(grid, set);
  (void)ny;
  const std::size_t k = static_cast<std::size_t>(j) * nx + i;
  switch (set) {
    case NodeSet::ex: return ex[k];
    case NodeSet::ey: return ey[k];
    default: return ez[k];
  }
}

double EpsilonMap::max_index() const {
  double best = 0.0;
  for (const auto* arr : {&ex, &ey, &ez})
    for (const auto& e : *arr) {
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(e, Eigen::EigenvaluesOnly);
      best = std::max(best, es.eigenvalues().maxCoeff());
    }
  return std::sqrt(best);
}

EpsilonMap rasterize(const CrossSection& cs, const MaterialLibrary& lib, const Grid2D& grid,
                     double omega, const RasterOptions& opts) {
  EpsilonMap map;
  map.grid = grid;
  map.omega = omega;

  // One rotated tensor per primitive, evaluated the first time a node lands
  // in it; primitives sharing a material share the dispersion evaluation.
  std::map<std::string, EpsilonTensor> base;
  std::vector<std::optional<Eigen::Matrix3cd>> per_prim(cs.primitives().size());
  auto tensor_at = [&](double x, double y) -> const Eigen::Matrix3cd& {
    const Primitive& p = cs.point_query(x, y);
    auto& slot = per_prim[static_cast<std::size_t>(&p - cs.primitives().data())];
    if (!slot) {
      auto where = [&] {
        std::ostringstream os;
        os << " (at x = " << x * 1e6 << " um, y = " << y * 1e6 << " um)";
        return os.str();
      };
      try {
        auto it = base.find(p.material);
        if (it == base.end())
          it = base.emplace(p.material, eval_permittivity(lib.get(p.material), omega)).first;
        slot = p.rotation ? rotate_tensor(it->second, *p.rotation).matrix() : it->second.matrix();
      } catch (const RangeError& e) {
        throw RangeError(e.what() + where());
      } catch (const ModelError& e) {
        throw ModelError(e.what() + where());
      } catch (const ValidationError& e) {
        throw ValidationError(e.what() + where());
      }
    }
    return *slot;
  };

  const double qx = grid.hx() / 4, qy = grid.hy() / 4;
  for (NodeSet set : {NodeSet::ex, NodeSet::ey, NodeSet::ez}) {
    auto [nx, ny] = node_dims(grid, set);
    auto& out = set == NodeSet::ex ? map.ex : set == NodeSet::ey ? map.ey : map.ez;
    out.resize(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        auto [x, y] = node_position(grid, set, i, j);
        Eigen::Matrix3cd e;
        if (opts.subcell_average) {
          e = 0.25 * (tensor_at(x - qx, y - qy) + tensor_at(x + qx, y - qy) +
                      tensor_at(x - qx, y + qy) + tensor_at(x + qx, y + qy));
        } else {
          e = tensor_at(x, y);
        }
        out[static_cast<std::size_t>(j) * nx + i] = e;
      }
  }
  return map;
}

}  // namespace wgm
