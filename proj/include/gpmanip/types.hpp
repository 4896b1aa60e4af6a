#ifndef GPMANIP_TYPES_HPP_
#define GPMANIP_TYPES_HPP_

#include <Eigen/Dense>

namespace gpmanip {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Rigid transform (rotation + translation), meters and radians throughout.
struct Pose {
  Mat3 R = Mat3::Identity();
  Vec3 p = Vec3::Zero();

  Pose operator*(const Pose& other) const {
    return Pose{R * other.R, R * other.p + p};
  }
  Vec3 apply(const Vec3& x) const { return R * x + p; }
};

/// Rotation from roll-pitch-yaw (URDF convention: Rz(yaw)*Ry(pitch)*Rx(roll)).
inline Mat3 rpy_to_rotation(double roll, double pitch, double yaw) {
  return (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
          Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
          Eigen::AngleAxisd(roll, Vec3::UnitX()))
      .toRotationMatrix();
}

}  // namespace gpmanip

#endif  // GPMANIP_TYPES_HPP_
