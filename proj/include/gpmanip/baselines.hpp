#ifndef GPMANIP_BASELINES_HPP_
#define GPMANIP_BASELINES_HPP_

#include <vector>

#include "gpmanip/chain_model.hpp"
#include "gpmanip/types.hpp"

namespace gpmanip {

/// Kinematic-control baseline options (fixed-step Euler rollout).
struct TrackerOptions {
  double dt = 0.02;            // [s]
  double gain = 1.0;           // task-error feedback [1/s]
  double damping_eps = 0.05;   // smallest-sv threshold for damping ramp
  double damping_max = 0.1;
  double nullspace_gain = 1.0;
  double vel_limit = 1.0471975511965976;  // pi/3 [rad/s]
  double pos_tol = 1e-2;       // success threshold [m]
  double timeout = 20.0;       // [s]

  void validate() const;
};

enum class TrackerPolicy {
  kDampedLeastSquares,   // singularity-robust DLS tracking
  kNullspaceManip,       // pseudo-inverse tracking + null-space manip ascent
};

/// One DLS tracking step: omega = J^T (J J^T + lambda^2 I)^-1 gain*(x_goal -
/// fk), lambda ramped up as the smallest singular value falls below
/// damping_eps; clipped per joint to vel_limit.
Vec dls_tracker_step(const ChainModel& model, const Vec& q, const Vec3& x_goal,
                     const TrackerOptions& opts);

/// Redundancy-resolution step: pseudo-inverse tracking plus the
/// manipulability gradient projected into null(J). Degenerates to plain
/// pseudo-inverse tracking when the chain is not redundant.
Vec nullspace_manip_tracker_step(const ChainModel& model, const Vec& q,
                                 const Vec3& x_goal,
                                 const TrackerOptions& opts);

struct TrackerStep {
  Vec q;
  Vec omega;
  double m = 0.0;
};

struct TrackerTrace {
  std::vector<TrackerStep> steps;
  bool solved = false;
  double min_manip = 0.0;
  double mean_manip = 0.0;
  double max_manip = 0.0;
  double max_vel = 0.0;   // max over steps of ||omega||_inf
  double mean_vel = 0.0;
  double wall_time = 0.0;
};

/// Euler rollout q <- q + dt * omega until the position error drops below
/// pos_tol or the timeout elapses.
TrackerTrace run_tracker(const ChainModel& model, const Vec& q0,
                         const Vec3& x_goal, const TrackerOptions& opts,
                         TrackerPolicy policy);

}  // namespace gpmanip

#endif  // GPMANIP_BASELINES_HPP_
