#ifndef GPMANIP_FACTORS_HPP_
#define GPMANIP_FACTORS_HPP_

#include <memory>
#include <vector>

#include "gpmanip/chain_model.hpp"
#include "gpmanip/gp_prior.hpp"
#include "gpmanip/kinematics.hpp"
#include "gpmanip/sdf.hpp"
#include "gpmanip/types.hpp"

namespace gpmanip {

/// One term of the MAP objective. Residuals and Jacobians are whitened:
/// the factor's cost contribution is 0.5 * ||r||^2.
class Factor {
 public:
  virtual ~Factor() = default;

  virtual int dim() const = 0;
  /// Indices of the support states this factor touches (1 or 2, consecutive).
  virtual const std::vector<int>& vars() const = 0;
  /// Whitened residual; when `jac` is non-null, also the whitened Jacobian
  /// blocks w.r.t. each variable in vars() order (dim x 2n each).
  virtual void evaluate(const GPTrajectory& traj, Vec& r,
                        std::vector<Mat>* jac) const = 0;

  double cost(const GPTrajectory& traj) const {
    Vec r;
    evaluate(traj, r, nullptr);
    return 0.5 * r.squaredNorm();
  }
};

using FactorPtr = std::unique_ptr<Factor>;

/// Binary GP prior factor between consecutive support states:
/// r = Phi(dt) x_i - x_{i+1}, covariance Q(dt).
class GpPriorFactor : public Factor {
 public:
  GpPriorFactor(const GPParams& params, int i);
  int dim() const override { return static_cast<int>(phi_w_.rows()); }
  const std::vector<int>& vars() const override { return vars_; }
  void evaluate(const GPTrajectory& traj, Vec& r,
                std::vector<Mat>* jac) const override;

 private:
  std::vector<int> vars_;
  Mat phi_;    // transition
  Mat phi_w_;  // L^-1 Phi
  Mat neg_i_w_;
};

/// Unary anchor on a full support state, covariance sigma_theta * I.
class StatePriorFactor : public Factor {
 public:
  StatePriorFactor(int i, Vec mean, double sigma_theta);
  int dim() const override { return static_cast<int>(mean_.size()); }
  const std::vector<int>& vars() const override { return vars_; }
  void evaluate(const GPTrajectory& traj, Vec& r,
                std::vector<Mat>* jac) const override;

 private:
  std::vector<int> vars_;
  Vec mean_;
  double inv_sqrt_sigma_;
};

/// Parameters of the manipulability likelihood (logarithmic cost).
struct ManipFactorParams {
  double sigma_s = 1e-4;  // isotropic weight Sigma_S
  double c = 0.01;        // cost-shaping constant
  double m_max = 1.0;     // manipulability ceiling

  void validate() const;
};

/// Scalar cost h = log((m_max + c) / (m + c)); zero at m = m_max,
/// strictly decreasing in m.
double manip_cost(const ChainModel& model, const Vec& q,
                  const ManipFactorParams& params);

/// Analytic gradient: entry j = -(m / (m + c)) Tr((dJ/dtheta_j) J^+).
Vec manip_cost_gradient(const ChainModel& model, const Vec& q,
                        const ManipFactorParams& params);

/// Manipulability factor on one support state.
class ManipFactor : public Factor {
 public:
  ManipFactor(const ChainModel& model, int i, ManipFactorParams params);
  int dim() const override { return 1; }
  const std::vector<int>& vars() const override { return vars_; }
  void evaluate(const GPTrajectory& traj, Vec& r,
                std::vector<Mat>* jac) const override;

 private:
  const ChainModel& model_;
  std::vector<int> vars_;
  ManipFactorParams params_;
};

/// Manipulability factor on an interpolated state at tau in (t_i, t_{i+1});
/// binary on the bracketing pair through the Lambda/Psi chain rule.
class InterpManipFactor : public Factor {
 public:
  InterpManipFactor(const ChainModel& model, const GPParams& gp_params,
                    int interval, double tau, ManipFactorParams params);
  int dim() const override { return 1; }
  const std::vector<int>& vars() const override { return vars_; }
  void evaluate(const GPTrajectory& traj, Vec& r,
                std::vector<Mat>* jac) const override;

 private:
  const ChainModel& model_;
  std::vector<int> vars_;
  ManipFactorParams params_;
  double tau_;
  Mat lambda_, psi_;  // fixed per tau
};

struct CollisionFactorParams {
  double sigma_obs = 1e2;
  double eps = 0.3;  // safety margin [m]

  void validate() const;
};

/// Hinge obstacle costs, one entry per collision sphere:
/// max(eps + radius - d(center), 0). Sphere centers outside the SDF are
/// treated as far (cost 0).
Vec collision_cost(const ChainModel& model, const SDFGrid& sdf, const Vec& q,
                   double eps, bool* out_of_bounds = nullptr);

/// Collision factor on one support state.
class CollisionFactor : public Factor {
 public:
  CollisionFactor(const ChainModel& model, const SDFGrid& sdf, int i,
                  CollisionFactorParams params);
  int dim() const override {
    return static_cast<int>(model_.collision_spheres().size());
  }
  const std::vector<int>& vars() const override { return vars_; }
  void evaluate(const GPTrajectory& traj, Vec& r,
                std::vector<Mat>* jac) const override;

 private:
  const ChainModel& model_;
  const SDFGrid& sdf_;
  std::vector<int> vars_;
  CollisionFactorParams params_;
};

/// Collision factor on an interpolated state (binary, Lambda/Psi chain rule).
class InterpCollisionFactor : public Factor {
 public:
  InterpCollisionFactor(const ChainModel& model, const SDFGrid& sdf,
                        const GPParams& gp_params, int interval, double tau,
                        CollisionFactorParams params);
  int dim() const override {
    return static_cast<int>(model_.collision_spheres().size());
  }
  const std::vector<int>& vars() const override { return vars_; }
  void evaluate(const GPTrajectory& traj, Vec& r,
                std::vector<Mat>* jac) const override;

 private:
  const ChainModel& model_;
  const SDFGrid& sdf_;
  std::vector<int> vars_;
  CollisionFactorParams params_;
  double tau_;
  Mat lambda_, psi_;
};

/// End-effector position goal on one support state (position-only, p = 3
/// residual; also usable with planar task_dim = 2 models, 2 residual rows).
class GoalPositionFactor : public Factor {
 public:
  GoalPositionFactor(const ChainModel& model, int i, Vec3 goal, double sigma);
  int dim() const override { return model_.task_dim() == 2 ? 2 : 3; }
  const std::vector<int>& vars() const override { return vars_; }
  void evaluate(const GPTrajectory& traj, Vec& r,
                std::vector<Mat>* jac) const override;

 private:
  const ChainModel& model_;
  std::vector<int> vars_;
  Vec3 goal_;
  double inv_sqrt_sigma_;
};

// Shared helpers used by both support and interpolated variants.
namespace detail {
void collision_residual(const ChainModel& model, const SDFGrid& sdf,
                        const Vec& q, const CollisionFactorParams& params,
                        Vec& r, Mat* dcost_dq);
}  // namespace detail

}  // namespace gpmanip

#endif  // GPMANIP_FACTORS_HPP_
