#include "gpmanip/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gpmanip/kinematics.hpp"

namespace gpmanip {

void TrackerOptions::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (gain < 0.0 || nullspace_gain < 0.0) {
    throw std::invalid_argument("gains must be >= 0");
  }
  if (!(vel_limit > 0.0)) throw std::invalid_argument("vel_limit must be > 0");
  if (!(timeout > 0.0)) throw std::invalid_argument("timeout must be > 0");
}

namespace {

Vec clip_velocity(Vec omega, double limit) {
  return omega.cwiseMax(-limit).cwiseMin(limit);
}

Vec task_error(const ChainModel& model, const Vec& q, const Vec3& x_goal,
               int p) {
  return (x_goal - fk_position(model, q)).head(p);
}

}  // namespace

Vec dls_tracker_step(const ChainModel& model, const Vec& q, const Vec3& x_goal,
                     const TrackerOptions& opts) {
  opts.validate();
  const int p = model.task_dim() == 2 ? 2 : 3;
  const Mat J = jacobian(model, q).topRows(p);
  const Vec err = opts.gain * task_error(model, q, x_goal, p);

  // Damping active only in the singular region: lambda ramps from 0 at
  // smallest_sv = damping_eps to damping_max at smallest_sv = 0.
  Eigen::JacobiSVD<Mat> svd(J);
  const double sv_min = svd.singularValues().minCoeff();
  double lambda = 0.0;
  if (sv_min < opts.damping_eps) {
    const double t = 1.0 - sv_min / opts.damping_eps;
    lambda = opts.damping_max * t;
  }

  const Mat JJt = J * J.transpose() + lambda * lambda * Mat::Identity(p, p);
  const Vec omega = J.transpose() * JJt.ldlt().solve(err);
  return clip_velocity(omega, opts.vel_limit);
}

Vec nullspace_manip_tracker_step(const ChainModel& model, const Vec& q,
                                 const Vec3& x_goal,
                                 const TrackerOptions& opts) {
  opts.validate();
  const int n = model.dof();
  const int p = model.task_dim() == 2 ? 2 : 3;
  if (n <= p) return dls_tracker_step(model, q, x_goal, opts);

  const Mat J = jacobian(model, q).topRows(p);
  const Mat J_pinv = pseudo_inverse(J);
  const Vec err = opts.gain * task_error(model, q, x_goal, p);
  const Mat null_proj = Mat::Identity(n, n) - J_pinv * J;
  const Vec omega = J_pinv * err +
                    null_proj * (opts.nullspace_gain *
                                 manipulability_gradient(model, q));
  return clip_velocity(omega, opts.vel_limit);
}

TrackerTrace run_tracker(const ChainModel& model, const Vec& q0,
                         const Vec3& x_goal, const TrackerOptions& opts,
                         TrackerPolicy policy) {
  opts.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const int p = model.task_dim() == 2 ? 2 : 3;
  const int max_steps = static_cast<int>(std::ceil(opts.timeout / opts.dt));

  TrackerTrace trace;
  Vec q = q0;
  double sum_m = 0.0, sum_vel = 0.0;
  trace.min_manip = std::numeric_limits<double>::infinity();

  int step = 0;
  for (; step <= max_steps; ++step) {
    const double m = manipulability(model, q).m;
    trace.min_manip = std::min(trace.min_manip, m);
    trace.max_manip = std::max(trace.max_manip, m);
    sum_m += m;

    if (task_error(model, q, x_goal, p).norm() < opts.pos_tol) {
      trace.steps.push_back({q, Vec::Zero(model.dof()), m});
      trace.solved = true;
      ++step;
      break;
    }
    if (step == max_steps) break;

    const Vec omega = policy == TrackerPolicy::kDampedLeastSquares
                          ? dls_tracker_step(model, q, x_goal, opts)
                          : nullspace_manip_tracker_step(model, q, x_goal, opts);
    const double vel = omega.lpNorm<Eigen::Infinity>();
    trace.max_vel = std::max(trace.max_vel, vel);
    sum_vel += vel;
    trace.steps.push_back({q, omega, m});
    q = model.clamp_to_limits(q + opts.dt * omega);
  }

  trace.mean_manip = step > 0 ? sum_m / step : 0.0;
  trace.mean_vel = trace.steps.empty() ? 0.0 : sum_vel / trace.steps.size();
  if (!trace.solved && !std::isfinite(trace.min_manip)) trace.min_manip = 0.0;
  trace.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return trace;
}

}  // namespace gpmanip
