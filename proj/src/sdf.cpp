#include "gpmanip/sdf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gpmanip {

double primitive_distance(const Obstacle& obstacle, const Vec3& point) {
  if (const auto* sphere = std::get_if<SphereObstacle>(&obstacle)) {
    return (point - sphere->center).norm() - sphere->radius;
  }
  const auto& box = std::get<BoxObstacle>(obstacle);
  const Vec3 q = (point - box.center).cwiseAbs() - box.half_extents;
  const Vec3 outside = q.cwiseMax(0.0);
  const double inside = std::min(q.maxCoeff(), 0.0);
  return outside.norm() + inside;
}

SDFGrid::SDFGrid(Vec3 origin, double cell_size, Eigen::Vector3i dims,
                 std::vector<double> data)
    : origin_(origin), cell_size_(cell_size), dims_(dims),
      data_(std::move(data)) {
  if (!(cell_size_ > 0.0)) throw std::invalid_argument("cell_size must be > 0");
  if (dims_.minCoeff() < 2) throw std::invalid_argument("grid dims must be >= 2");
  const size_t expected = static_cast<size_t>(dims_.x()) *
                          static_cast<size_t>(dims_.y()) *
                          static_cast<size_t>(dims_.z());
  if (data_.size() != expected) {
    throw std::invalid_argument("SDF data size does not match dims");
  }
}

double SDFGrid::at(int ix, int iy, int iz) const {
  return data_[static_cast<size_t>((ix * dims_.y() + iy) * dims_.z() + iz)];
}

double SDFGrid::interp(const Vec3& point) const {
  const Vec3 local = (point - origin_) / cell_size_;
  double fx = std::clamp(local.x(), 0.0, static_cast<double>(dims_.x() - 1));
  double fy = std::clamp(local.y(), 0.0, static_cast<double>(dims_.y() - 1));
  double fz = std::clamp(local.z(), 0.0, static_cast<double>(dims_.z() - 1));

  const int ix = std::min(static_cast<int>(fx), dims_.x() - 2);
  const int iy = std::min(static_cast<int>(fy), dims_.y() - 2);
  const int iz = std::min(static_cast<int>(fz), dims_.z() - 2);
  const double ux = fx - ix, uy = fy - iy, uz = fz - iz;

  double result = 0.0;
  for (int dx = 0; dx <= 1; ++dx) {
    for (int dy = 0; dy <= 1; ++dy) {
      for (int dz = 0; dz <= 1; ++dz) {
        const double w = (dx ? ux : 1.0 - ux) * (dy ? uy : 1.0 - uy) *
                         (dz ? uz : 1.0 - uz);
        result += w * at(ix + dx, iy + dy, iz + dz);
      }
    }
  }
  return result;
}

SdfQuery SDFGrid::query(const Vec3& point) const {
  SdfQuery res;
  const Vec3 local = (point - origin_) / cell_size_;
  for (int k = 0; k < 3; ++k) {
    if (local[k] < 0.0 || local[k] > static_cast<double>(dims_[k] - 1)) {
      res.in_bounds = false;
    }
  }
  if (!res.in_bounds) {
    res.distance = kFarClamp;
    return res;
  }

  res.distance = interp(point);
  const double h = cell_size_;
  Vec3 grad;
  for (int k = 0; k < 3; ++k) {
    Vec3 lo = point, hi = point;
    lo[k] -= h;
    hi[k] += h;
    grad[k] = (interp(hi) - interp(lo)) / (2.0 * h);
  }
  if (grad.norm() > 1e-9) grad.normalize();
  res.gradient = grad;
  return res;
}

SDFGrid build_sdf(const std::vector<Obstacle>& obstacles,
                  const Vec3& bounds_min, const Vec3& bounds_max,
                  double cell_size) {
  if (!(cell_size > 0.0)) throw std::invalid_argument("cell_size must be > 0");
  if (((bounds_max - bounds_min).array() <= 0.0).any()) {
    throw std::invalid_argument("bounds_max must exceed bounds_min");
  }

  Eigen::Vector3i dims;
  for (int k = 0; k < 3; ++k) {
    dims[k] = std::max(
        2, static_cast<int>(std::ceil((bounds_max[k] - bounds_min[k]) /
                                      cell_size)) + 1);
  }

  std::vector<double> data(static_cast<size_t>(dims.x()) *
                           static_cast<size_t>(dims.y()) *
                           static_cast<size_t>(dims.z()));
  size_t idx = 0;
  for (int ix = 0; ix < dims.x(); ++ix) {
    for (int iy = 0; iy < dims.y(); ++iy) {
      for (int iz = 0; iz < dims.z(); ++iz, ++idx) {
        const Vec3 p = bounds_min + cell_size * Vec3(ix, iy, iz);
        double d = SDFGrid::kFarClamp;
        for (const Obstacle& obs : obstacles) {
          d = std::min(d, primitive_distance(obs, p));
        }
        data[idx] = d;
      }
    }
  }
  return SDFGrid(bounds_min, cell_size, dims, std::move(data));
}

}  // namespace gpmanip
