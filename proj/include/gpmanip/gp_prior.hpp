#ifndef GPMANIP_GP_PRIOR_HPP_
#define GPMANIP_GP_PRIOR_HPP_

#include <functional>
#include <string>
#include <vector>

#include "gpmanip/types.hpp"

namespace gpmanip {

/// Hyperparameters of the constant-velocity (white-noise-on-acceleration)
/// LTV-SDE trajectory prior. Support times are uniform: t_i = i * T / N.
struct GPParams {
  Mat Qc;              // n x n SPD power-spectral density
  double total_time;   // T [s]
  int num_support;     // N + 1, >= 2

  static GPParams isotropic(int n, double qc_scale, double total_time,
                            int num_support);

  int dof() const { return static_cast<int>(Qc.rows()); }
  int num_intervals() const { return num_support - 1; }
  double dt() const { return total_time / num_intervals(); }
  double support_time(int i) const { return i * dt(); }
  void validate() const;
};

/// State transition Phi(dt) and process covariance Q(dt) of the
/// constant-velocity model on the stacked state x = (theta, theta_dot):
///   Phi = [[I, dt I], [0, I]],
///   Q   = [[dt^3/3 Qc, dt^2/2 Qc], [dt^2/2 Qc, dt Qc]].
struct Transition {
  Mat Phi;
  Mat Q;
};

Transition transition(const GPParams& params, double dt);

/// Result of GP interpolation at time tau in [t_i, t_{i+1}]:
/// x(tau) = mu(tau) + Lambda (x_i - mu_i) + Psi (x_{i+1} - mu_{i+1}).
struct InterpResult {
  Vec x;        // interpolated stacked state (2n)
  Mat lambda;   // 2n x 2n
  Mat psi;      // 2n x 2n
  int interval; // i such that t_i <= tau <= t_{i+1}
};

/// Continuous-time trajectory: N+1 stacked support states (theta, theta_dot)
/// at uniform times, plus the prior mean (stored as its own support states,
/// which fully determine the constant-velocity mean function).
class GPTrajectory {
 public:
  GPTrajectory(GPParams params, std::vector<Vec> states, std::vector<Vec> mean);

  const GPParams& params() const { return params_; }
  int dof() const { return params_.dof(); }
  int num_support() const { return params_.num_support; }
  double time(int i) const { return params_.support_time(i); }

  const Vec& state(int i) const { return states_[static_cast<size_t>(i)]; }
  Vec& state(int i) { return states_[static_cast<size_t>(i)]; }
  const Vec& mean(int i) const { return mean_[static_cast<size_t>(i)]; }

  Vec theta(int i) const { return state(i).head(dof()); }
  Vec theta_dot(int i) const { return state(i).tail(dof()); }

  /// O(1) interpolation at tau in [0, T]. Exact at support times.
  InterpResult interpolate(double tau) const;

  /// Prior mean evaluated at tau (exact: the mean is constant-velocity).
  Vec mean_at(double tau) const;

  /// Interpolation coefficients for tau within interval i; independent of
  /// the current support-state values.
  static void interp_matrices(const GPParams& params, int interval, double tau,
                              Mat& lambda, Mat& psi);

  /// CSV export `t, q1..qn, dq1..dqn, m` at `samples_per_interval` + support
  /// points per interval; the m column is filled by the caller-provided
  /// evaluator (pass nullptr to write zeros).
  void write_csv(const std::string& path, int samples_per_interval,
                 const std::function<double(const Vec&)>& manip_eval) const;

 private:
  GPParams params_;
  std::vector<Vec> states_;
  std::vector<Vec> mean_;
};

/// Straight-line joint-space initialization; doubles as the prior mean.
GPTrajectory make_constant_velocity_prior(const Vec& start, const Vec& goal,
                                          const GPParams& params);

}  // namespace gpmanip

#endif  // GPMANIP_GP_PRIOR_HPP_
