#ifndef GPMANIP_SDF_HPP_
#define GPMANIP_SDF_HPP_

#include <string>
#include <variant>
#include <vector>

#include "gpmanip/types.hpp"

namespace gpmanip {

struct SphereObstacle {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
};

struct BoxObstacle {
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Zero();  // axis-aligned
};

using Obstacle = std::variant<SphereObstacle, BoxObstacle>;

/// Exact signed distance to a single primitive (negative inside).
double primitive_distance(const Obstacle& obstacle, const Vec3& point);

struct SdfQuery {
  double distance = 0.0;
  Vec3 gradient = Vec3::Zero();  // unit-normalized when well defined
  bool in_bounds = true;
};

/// Discretized signed distance field of the workspace. Immutable after
/// construction; concurrent queries are safe.
class SDFGrid {
 public:
  /// Distance reported for empty fields and out-of-bounds queries.
  static constexpr double kFarClamp = 1e3;

  SDFGrid(Vec3 origin, double cell_size, Eigen::Vector3i dims,
          std::vector<double> data);

  const Vec3& origin() const { return origin_; }
  double cell_size() const { return cell_size_; }
  const Eigen::Vector3i& dims() const { return dims_; }
  double at(int ix, int iy, int iz) const;

  /// Trilinearly interpolated distance and central-difference gradient.
  SdfQuery query(const Vec3& point) const;

 private:
  double interp(const Vec3& point) const;

  Vec3 origin_;
  double cell_size_;
  Eigen::Vector3i dims_;
  std::vector<double> data_;
};

/// Rasterize analytic primitives onto a grid spanning [bounds_min, bounds_max]
/// (pointwise min over primitives). An empty list yields a uniform far field.
SDFGrid build_sdf(const std::vector<Obstacle>& obstacles,
                  const Vec3& bounds_min, const Vec3& bounds_max,
                  double cell_size);

}  // namespace gpmanip

#endif  // GPMANIP_SDF_HPP_
