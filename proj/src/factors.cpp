#include "gpmanip/factors.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace gpmanip {

// ---------------------------------------------------------------------------
// GP prior factor

GpPriorFactor::GpPriorFactor(const GPParams& params, int i)
    : vars_{i, i + 1} {
  if (i < 0 || i + 1 >= params.num_support) {
    throw std::invalid_argument("GP prior factor index out of range");
  }
  const Transition tr = transition(params, params.dt());
  phi_ = tr.Phi;
  // Whiten with the Cholesky factor of Q(dt): r_w = L^-1 r.
  const Eigen::LLT<Mat> llt(tr.Q);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("process covariance Q(dt) not positive definite");
  }
  const Mat L = llt.matrixL();
  phi_w_ = L.triangularView<Eigen::Lower>().solve(phi_);
  neg_i_w_ = L.triangularView<Eigen::Lower>().solve(
      Mat(-Mat::Identity(phi_.rows(), phi_.cols())));
}

void GpPriorFactor::evaluate(const GPTrajectory& traj, Vec& r,
                             std::vector<Mat>* jac) const {
  r = phi_w_ * traj.state(vars_[0]) + neg_i_w_ * traj.state(vars_[1]);
  if (jac) {
    jac->resize(2);
    (*jac)[0] = phi_w_;
    (*jac)[1] = neg_i_w_;
  }
}

// ---------------------------------------------------------------------------
// State prior

StatePriorFactor::StatePriorFactor(int i, Vec mean, double sigma_theta)
    : vars_{i}, mean_(std::move(mean)) {
  if (!(sigma_theta > 0.0)) {
    throw std::invalid_argument("sigma_theta must be > 0");
  }
  inv_sqrt_sigma_ = 1.0 / std::sqrt(sigma_theta);
}

void StatePriorFactor::evaluate(const GPTrajectory& traj, Vec& r,
                                std::vector<Mat>* jac) const {
  r = inv_sqrt_sigma_ * (traj.state(vars_[0]) - mean_);
  if (jac) {
    jac->resize(1);
    (*jac)[0] = inv_sqrt_sigma_ * Mat::Identity(mean_.size(), mean_.size());
  }
}

// ---------------------------------------------------------------------------
// Manipulability cost

void ManipFactorParams::validate() const {
  if (!(sigma_s > 0.0)) throw std::invalid_argument("sigma_s must be > 0");
  if (!(c > 0.0)) throw std::invalid_argument("c must be > 0");
  if (!(m_max > 0.0)) throw std::invalid_argument("m_max must be > 0");
}

double manip_cost(const ChainModel& model, const Vec& q,
                  const ManipFactorParams& params) {
  const double m = manipulability(model, q).m;
  return std::log((params.m_max + params.c) / (m + params.c));
}

Vec manip_cost_gradient(const ChainModel& model, const Vec& q,
                        const ManipFactorParams& params) {
  const double m = manipulability(model, q).m;
  const Mat J_pinv = pseudo_inverse(jacobian(model, q));
  const int n = model.dof();
  Vec grad(n);
  const double scale = -m / (m + params.c);
  for (int j = 0; j < n; ++j) {
    grad[j] = scale * (jacobian_partial(model, q, j) * J_pinv).trace();
  }
  return grad;
}

ManipFactor::ManipFactor(const ChainModel& model, int i,
                         ManipFactorParams params)
    : model_(model), vars_{i}, params_(params) {
  params_.validate();
}

void ManipFactor::evaluate(const GPTrajectory& traj, Vec& r,
                           std::vector<Mat>* jac) const {
  const int n = model_.dof();
  const Vec q = traj.theta(vars_[0]);
  const double w = 1.0 / std::sqrt(params_.sigma_s);
  r.resize(1);
  r[0] = w * manip_cost(model_, q, params_);
  if (jac) {
    jac->resize(1);
    Mat J = Mat::Zero(1, 2 * n);
    J.leftCols(n) = w * manip_cost_gradient(model_, q, params_).transpose();
    (*jac)[0] = J;
  }
}

InterpManipFactor::InterpManipFactor(const ChainModel& model,
                                     const GPParams& gp_params, int interval,
                                     double tau, ManipFactorParams params)
    : model_(model),
      vars_{interval, interval + 1},
      params_(params),
      tau_(tau) {
  params_.validate();
  const double ti = gp_params.support_time(interval);
  if (!(tau > ti && tau < ti + gp_params.dt())) {
    throw std::invalid_argument("interpolation time outside open interval");
  }
  GPTrajectory::interp_matrices(gp_params, interval, tau, lambda_, psi_);
}

void InterpManipFactor::evaluate(const GPTrajectory& traj, Vec& r,
                                 std::vector<Mat>* jac) const {
  const int n = model_.dof();
  const Vec x_tau = traj.mean_at(tau_) +
                    lambda_ * (traj.state(vars_[0]) - traj.mean(vars_[0])) +
                    psi_ * (traj.state(vars_[1]) - traj.mean(vars_[1]));
  const Vec q = x_tau.head(n);
  const double w = 1.0 / std::sqrt(params_.sigma_s);
  r.resize(1);
  r[0] = w * manip_cost(model_, q, params_);
  if (jac) {
    const Vec grad = manip_cost_gradient(model_, q, params_);
    jac->resize(2);
    (*jac)[0] = w * grad.transpose() * lambda_.topRows(n);
    (*jac)[1] = w * grad.transpose() * psi_.topRows(n);
  }
}

// ---------------------------------------------------------------------------
// Collision cost

void CollisionFactorParams::validate() const {
  if (!(sigma_obs > 0.0)) throw std::invalid_argument("sigma_obs must be > 0");
  if (eps < 0.0) throw std::invalid_argument("eps must be >= 0");
}

Vec collision_cost(const ChainModel& model, const SDFGrid& sdf, const Vec& q,
                   double eps, bool* out_of_bounds) {
  const auto& spheres = model.collision_spheres();
  const FkResult fk = forward_kinematics(model, q);
  Vec costs(spheres.size());
  bool oob = false;
  for (size_t s = 0; s < spheres.size(); ++s) {
    const Vec3 center = sphere_center(model, fk, spheres[s]);
    const SdfQuery query = sdf.query(center);
    oob = oob || !query.in_bounds;
    costs[static_cast<Eigen::Index>(s)] =
        std::max(eps + spheres[s].radius - query.distance, 0.0);
  }
  if (out_of_bounds) *out_of_bounds = oob;
  return costs;
}

namespace detail {

void collision_residual(const ChainModel& model, const SDFGrid& sdf,
                        const Vec& q, const CollisionFactorParams& params,
                        Vec& r, Mat* dcost_dq) {
  const auto& spheres = model.collision_spheres();
  const int n = model.dof();
  const double w = 1.0 / std::sqrt(params.sigma_obs);
  const FkResult fk = forward_kinematics(model, q);

  r.resize(static_cast<Eigen::Index>(spheres.size()));
  if (dcost_dq) *dcost_dq = Mat::Zero(static_cast<Eigen::Index>(spheres.size()), n);

  for (size_t s = 0; s < spheres.size(); ++s) {
    const auto row = static_cast<Eigen::Index>(s);
    const Vec3 center = sphere_center(model, fk, spheres[s]);
    const SdfQuery query = sdf.query(center);
    const double cost =
        std::max(params.eps + spheres[s].radius - query.distance, 0.0);
    r[row] = w * cost;
    if (dcost_dq && cost > 0.0 && query.in_bounds) {
      // d cost / d q = -grad_d^T * J_point; subgradient 0 at the hinge knee.
      const Mat Jp = point_jacobian(model, fk, spheres[s].link, center);
      dcost_dq->row(row) = -w * query.gradient.transpose() * Jp;
    }
  }
}

}  // namespace detail

CollisionFactor::CollisionFactor(const ChainModel& model, const SDFGrid& sdf,
                                 int i, CollisionFactorParams params)
    : model_(model), sdf_(sdf), vars_{i}, params_(params) {
  params_.validate();
}

void CollisionFactor::evaluate(const GPTrajectory& traj, Vec& r,
                               std::vector<Mat>* jac) const {
  const int n = model_.dof();
  const Vec q = traj.theta(vars_[0]);
  Mat dq;
  detail::collision_residual(model_, sdf_, q, params_, r, jac ? &dq : nullptr);
  if (jac) {
    jac->resize(1);
    Mat J = Mat::Zero(r.size(), 2 * n);
    J.leftCols(n) = dq;
    (*jac)[0] = J;
  }
}

InterpCollisionFactor::InterpCollisionFactor(const ChainModel& model,
                                             const SDFGrid& sdf,
                                             const GPParams& gp_params,
                                             int interval, double tau,
                                             CollisionFactorParams params)
    : model_(model),
      sdf_(sdf),
      vars_{interval, interval + 1},
      params_(params),
      tau_(tau) {
  params_.validate();
  GPTrajectory::interp_matrices(gp_params, interval, tau, lambda_, psi_);
}

void InterpCollisionFactor::evaluate(const GPTrajectory& traj, Vec& r,
                                     std::vector<Mat>* jac) const {
  const int n = model_.dof();
  const Vec x_tau = traj.mean_at(tau_) +
                    lambda_ * (traj.state(vars_[0]) - traj.mean(vars_[0])) +
                    psi_ * (traj.state(vars_[1]) - traj.mean(vars_[1]));
  Mat dq;
  detail::collision_residual(model_, sdf_, x_tau.head(n), params_, r,
                             jac ? &dq : nullptr);
  if (jac) {
    jac->resize(2);
    (*jac)[0] = dq * lambda_.topRows(n);
    (*jac)[1] = dq * psi_.topRows(n);
  }
}

// ---------------------------------------------------------------------------
// Goal position

GoalPositionFactor::GoalPositionFactor(const ChainModel& model, int i,
                                       Vec3 goal, double sigma)
    : model_(model), vars_{i}, goal_(goal) {
  if (!(sigma > 0.0)) throw std::invalid_argument("goal sigma must be > 0");
  inv_sqrt_sigma_ = 1.0 / std::sqrt(sigma);
}

void GoalPositionFactor::evaluate(const GPTrajectory& traj, Vec& r,
                                  std::vector<Mat>* jac) const {
  const int n = model_.dof();
  const int d = dim();
  const Vec q = traj.theta(vars_[0]);
  r = inv_sqrt_sigma_ * (fk_position(model_, q) - goal_).head(d);
  if (jac) {
    const Mat J_full = jacobian(model_, q);
    jac->resize(1);
    Mat J = Mat::Zero(d, 2 * n);
    J.leftCols(n) = inv_sqrt_sigma_ * J_full.topRows(d);
    (*jac)[0] = J;
  }
}

}  // namespace gpmanip
