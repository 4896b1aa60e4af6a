#ifndef GPMANIP_CHAIN_MODEL_HPP_
#define GPMANIP_CHAIN_MODEL_HPP_

#include <string>
#include <vector>

#include "gpmanip/types.hpp"

namespace gpmanip {

/// Revolute joint: fixed transform from the previous frame, then a rotation
/// about `axis` (unit vector expressed in the frame after `origin`).
struct Joint {
  Vec3 axis = Vec3::UnitZ();
  Pose origin;
  double lower = -3.14159265358979323846;
  double upper = 3.14159265358979323846;
};

/// Sphere used for collision checking, rigidly attached to a link.
/// Link i is the body that moves with joints 0..i.
struct CollisionSphere {
  int link = 0;
  Vec3 center = Vec3::Zero();  // in the link frame
  double radius = 0.0;
};

/// Kinematic description of an n-DOF serial manipulator with revolute joints.
/// Immutable after construction; safe to share across concurrent solves.
class ChainModel {
 public:
  ChainModel(std::vector<Joint> joints, int task_dim,
             std::vector<CollisionSphere> spheres = {},
             Pose ee_offset = Pose{});

  int dof() const { return static_cast<int>(joints_.size()); }
  int task_dim() const { return task_dim_; }
  const std::vector<Joint>& joints() const { return joints_; }
  const Joint& joint(int i) const { return joints_[static_cast<size_t>(i)]; }
  const std::vector<CollisionSphere>& collision_spheres() const {
    return spheres_;
  }
  const Pose& ee_offset() const { return ee_offset_; }

  Vec lower_limits() const;
  Vec upper_limits() const;
  Vec clamp_to_limits(const Vec& q) const;
  bool within_limits(const Vec& q, double tol = 0.0) const;

  /// Cached manipulability ceiling (see estimate_m_max in kinematics.hpp).
  /// Zero until set_m_max is called.
  double m_max() const { return m_max_; }
  void set_m_max(double m) { m_max_ = m; }

  static ChainModel from_json_file(const std::string& path);
  static ChainModel from_json_string(const std::string& text);

 private:
  std::vector<Joint> joints_;
  int task_dim_;
  std::vector<CollisionSphere> spheres_;
  Pose ee_offset_;
  double m_max_ = 0.0;
};

}  // namespace gpmanip

#endif  // GPMANIP_CHAIN_MODEL_HPP_
