#ifndef GPMANIP_KINEMATICS_HPP_
#define GPMANIP_KINEMATICS_HPP_

#include <cstdint>
#include <vector>

#include "gpmanip/chain_model.hpp"
#include "gpmanip/types.hpp"

namespace gpmanip {

/// Forward-kinematics result: one frame per link plus the end-effector.
/// axes[i] / origins[i] are the world-frame rotation axis and position of
/// joint i, used to build the geometric Jacobian.
struct FkResult {
  std::vector<Pose> link_frames;  // frame of link i (after joint i's rotation)
  Pose ee;                        // end-effector frame
  std::vector<Vec3> axes;         // world joint axes z_i
  std::vector<Vec3> origins;      // world joint origins p_i
};

/// Manipulability diagnostics at one configuration.
struct ManipReport {
  double m = 0.0;            // sqrt(det(J J^T)) = product of singular values
  Vec singular_values;       // p values, sorted descending
  double smallest_sv = 0.0;  // near-singularity diagnostic
};

FkResult forward_kinematics(const ChainModel& model, const Vec& q);

/// End-effector position only (convenience wrapper).
Vec3 fk_position(const ChainModel& model, const Vec& q);

/// World position of a collision sphere center at configuration q.
Vec3 sphere_center(const ChainModel& model, const FkResult& fk,
                   const CollisionSphere& sphere);

/// Geometric Jacobian, p x n. Row convention: linear x,y(,z) first, then
/// angular x,y,z when task_dim == 6. task_dim == 2 keeps only the in-plane
/// linear rows (x, y).
Mat jacobian(const ChainModel& model, const Vec& q);

/// Analytic partial derivative of the geometric Jacobian w.r.t. joint j.
Mat jacobian_partial(const ChainModel& model, const Vec& q, int j);

/// Position Jacobian (3 x n) of an arbitrary world point rigidly attached to
/// `link` (columns for joints beyond the link are zero).
Mat point_jacobian(const ChainModel& model, const FkResult& fk, int link,
                   const Vec3& world_point);

ManipReport manipulability(const ChainModel& model, const Vec& q);

/// Moore-Penrose pseudo-inverse via SVD; singular values below
/// rel_tol * sigma_max are truncated.
Mat pseudo_inverse(const Mat& J, double rel_tol = 1e-8);

/// Analytic gradient of the manipulability index,
/// entry j = m * Tr((dJ/dtheta_j) J^+). Finite at singularities through
/// pseudo-inverse truncation.
Vec manipulability_gradient(const ChainModel& model, const Vec& q);

/// Randomized estimate of the chain's manipulability ceiling: max over
/// `samples` uniform in-limit configurations, times a 1.05 safety factor.
/// Deterministic given seed.
double estimate_m_max(const ChainModel& model, int samples, uint64_t seed);

}  // namespace gpmanip

#endif  // GPMANIP_KINEMATICS_HPP_
