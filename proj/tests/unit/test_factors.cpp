#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include <doctest.h>

#include "gpmanip/factors.hpp"
#include "gpmanip/gp_prior.hpp"
#include "gpmanip/kinematics.hpp"
#include "test_helpers.hpp"

using namespace gpmanip;
using gpmanip::test::planar_2r;
using gpmanip::test::planar_3r;
using gpmanip::test::random_config;
using gpmanip::test::ur10;

namespace {

constexpr double kPi = 3.14159265358979323846;

GPTrajectory random_trajectory(const GPParams& params, uint64_t seed,
                               double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, scale);
  const int n = params.dof();
  Vec start(n), goal(n);
  for (int i = 0; i < n; ++i) {
    start[i] = dist(rng);
    goal[i] = dist(rng);
  }
  GPTrajectory traj = make_constant_velocity_prior(start, goal, params);
  for (int i = 0; i < params.num_support; ++i) {
    for (int k = 0; k < 2 * n; ++k) traj.state(i)[k] += 0.3 * dist(rng);
  }
  return traj;
}

// Central-difference check of a factor's Jacobian blocks.
void check_factor_jacobian(const Factor& factor, GPTrajectory traj,
                           double step = 1e-6, double tol = 1e-5) {
  Vec r0;
  std::vector<Mat> jac;
  factor.evaluate(traj, r0, &jac);
  REQUIRE(jac.size() == factor.vars().size());

  const int two_n = 2 * traj.dof();
  for (size_t v = 0; v < factor.vars().size(); ++v) {
    REQUIRE(jac[v].rows() == factor.dim());
    REQUIRE(jac[v].cols() == two_n);
    const int idx = factor.vars()[v];
    Mat fd(factor.dim(), two_n);
    for (int k = 0; k < two_n; ++k) {
      const double saved = traj.state(idx)[k];
      Vec rp, rm;
      traj.state(idx)[k] = saved + step;
      factor.evaluate(traj, rp, nullptr);
      traj.state(idx)[k] = saved - step;
      factor.evaluate(traj, rm, nullptr);
      traj.state(idx)[k] = saved;
      fd.col(k) = (rp - rm) / (2.0 * step);
    }
    const double denom = std::max(fd.norm(), 1e-6);
    CHECK((jac[v] - fd).norm() / denom < tol);
  }
}

// Dense lifted GP prior cost oracle: stack all deviations from the mean and
// evaluate 0.5 d^T K^-1 d with the block-tridiagonal precision assembled
// from first principles (K^-1 = A^T Q_blk^-1 A restricted to the factored
// part, i.e. sum of per-interval transition terms).
double lifted_prior_cost(const GPTrajectory& traj) {
  const GPParams& params = traj.params();
  const int n = params.dof();
  const int N = params.num_intervals();
  const Transition tr = transition(params, params.dt());
  const Mat Qinv = tr.Q.inverse();
  double cost = 0.0;
  for (int i = 0; i < N; ++i) {
    const Vec di = traj.state(i) - traj.mean(i);
    const Vec dj = traj.state(i + 1) - traj.mean(i + 1);
    const Vec e = tr.Phi * di - dj;
    cost += 0.5 * e.dot(Qinv * e);
  }
  (void)n;
  return cost;
}

}  // namespace

TEST_CASE("GP prior factor") {
  const GPParams params = GPParams::isotropic(3, 1e3, 5.0, 6);
  GPTrajectory traj = random_trajectory(params, 7);

  SUBCASE("zero residual on the mean trajectory") {
    GPTrajectory on_mean = make_constant_velocity_prior(
        Vec::Zero(3), Vec::Ones(3), params);
    for (int i = 0; i < params.num_intervals(); ++i) {
      const GpPriorFactor f(params, i);
      CHECK(f.cost(on_mean) == doctest::Approx(0.0).epsilon(1e-12));
    }
  }

  SUBCASE("total cost matches the dense lifted oracle") {
    double total = 0.0;
    for (int i = 0; i < params.num_intervals(); ++i) {
      total += GpPriorFactor(params, i).cost(traj);
    }
    const double ref = lifted_prior_cost(traj);
    CHECK(total == doctest::Approx(ref).epsilon(1e-9));
  }

  SUBCASE("whitening consistency: cost = 0.5 e^T Q^-1 e per factor") {
    const Transition tr = transition(params, params.dt());
    const Mat Qinv = tr.Q.inverse();
    for (int i = 0; i < params.num_intervals(); ++i) {
      const Vec e = tr.Phi * (traj.state(i) - traj.mean(i)) -
                    (traj.state(i + 1) - traj.mean(i + 1));
      CHECK(GpPriorFactor(params, i).cost(traj) ==
            doctest::Approx(0.5 * e.dot(Qinv * e)).epsilon(1e-9));
    }
  }

  SUBCASE("Jacobian matches finite differences") {
    for (int i = 0; i < params.num_intervals(); ++i) {
      check_factor_jacobian(GpPriorFactor(params, i), traj);
    }
  }

  SUBCASE("vars are the consecutive pair") {
    const GpPriorFactor f(params, 2);
    REQUIRE(f.vars().size() == 2);
    CHECK(f.vars()[0] == 2);
    CHECK(f.vars()[1] == 3);
  }
}

TEST_CASE("state prior factor") {
  const GPParams params = GPParams::isotropic(2, 1.0, 2.0, 3);
  GPTrajectory traj = random_trajectory(params, 11);

  const Vec mean = traj.state(1) + Vec::Constant(4, 0.2);
  const double sigma = 1e-3;
  const StatePriorFactor f(1, mean, sigma);

  // Cost = 0.5 ||x - mean||^2 / sigma.
  const double expected =
      0.5 * (traj.state(1) - mean).squaredNorm() / sigma;
  CHECK(f.cost(traj) == doctest::Approx(expected).epsilon(1e-12));
  check_factor_jacobian(f, traj);
}

TEST_CASE("manipulability cost shape") {
  const ChainModel model = planar_2r();
  ManipFactorParams params;
  params.sigma_s = 1e-4;
  params.m_max = 1.05;
  params.c = 0.01 * params.m_max;

  SUBCASE("zero at the ceiling, positive below, decreasing in m") {
    Vec q(2);
    q << 0.0, kPi / 2;  // m = 1
    const double at_peak = manip_cost(model, q, params);
    CHECK(at_peak > 0.0);  // m_max = 1.05 > 1
    q << 0.0, 0.3;  // much smaller m
    CHECK(manip_cost(model, q, params) > at_peak);

    // Direct functional form.
    const double m = manipulability(model, q).m;
    CHECK(manip_cost(model, q, params) ==
          doctest::Approx(std::log((params.m_max + params.c) / (m + params.c)))
              .epsilon(1e-12));
  }

  SUBCASE("finite at singularities thanks to c > 0") {
    const double at_singular = manip_cost(model, Vec::Zero(2), params);
    CHECK(std::isfinite(at_singular));
    CHECK(at_singular ==
          doctest::Approx(std::log((params.m_max + params.c) / params.c)));
    CHECK(manip_cost_gradient(model, Vec::Zero(2), params).allFinite());
  }

  SUBCASE("gradient matches finite differences") {
    std::mt19937_64 rng(3);
    for (const ChainModel& m : {planar_2r(), planar_3r(), ur10()}) {
      ManipFactorParams p = params;
      p.m_max = estimate_m_max(m, 5000, 3);
      p.c = 0.01 * p.m_max;
      int done = 0;
      while (done < 8) {
        const Vec q = random_config(m, rng);
        if (manipulability(m, q).m < 1e-3 * p.m_max) continue;
        ++done;
        const Vec g = manip_cost_gradient(m, q, p);
        Vec fd(m.dof());
        for (int j = 0; j < m.dof(); ++j) {
          Vec qp = q, qm = q;
          qp[j] += 1e-6;
          qm[j] -= 1e-6;
          fd[j] = (manip_cost(m, qp, p) - manip_cost(m, qm, p)) / 2e-6;
        }
        CHECK((g - fd).norm() / std::max(fd.norm(), 1e-6) < 1e-5);
      }
    }
  }

  SUBCASE("parameter validation") {
    ManipFactorParams bad = params;
    bad.sigma_s = 0.0;
    CHECK_THROWS(bad.validate());
    bad = params;
    bad.c = 0.0;
    CHECK_THROWS(bad.validate());
    bad = params;
    bad.m_max = -1.0;
    CHECK_THROWS(bad.validate());
  }
}

TEST_CASE("manipulability factor on a support state") {
  const ChainModel model = planar_3r();
  const GPParams params = GPParams::isotropic(3, 1e3, 4.0, 5);
  GPTrajectory traj = random_trajectory(params, 13, 0.6);

  ManipFactorParams mp;
  mp.sigma_s = 2e-4;
  mp.m_max = estimate_m_max(model, 5000, 3);
  mp.c = 0.01 * mp.m_max;

  const ManipFactor f(model, 2, mp);
  REQUIRE(f.vars() == std::vector<int>{2});

  // Residual is h / sqrt(sigma_s), so cost = h^2 / (2 sigma_s).
  const double h = manip_cost(model, traj.theta(2), mp);
  CHECK(f.cost(traj) == doctest::Approx(h * h / (2.0 * mp.sigma_s)));

  // Velocity entries never enter: their Jacobian block is exactly zero.
  Vec r;
  std::vector<Mat> jac;
  f.evaluate(traj, r, &jac);
  CHECK(jac[0].rightCols(3).norm() == 0.0);

  check_factor_jacobian(f, traj);
}

TEST_CASE("interpolated manipulability factor") {
  const ChainModel model = planar_3r();
  const GPParams params = GPParams::isotropic(3, 1e3, 4.0, 5);
  GPTrajectory traj = random_trajectory(params, 17, 0.6);

  ManipFactorParams mp;
  mp.sigma_s = 1e-4;
  mp.m_max = estimate_m_max(model, 5000, 3);
  mp.c = 0.01 * mp.m_max;

  SUBCASE("cost evaluates the interpolated configuration") {
    const double tau = 1.35;
    const InterpManipFactor f(model, params, 1, tau, mp);
    REQUIRE(f.vars() == std::vector<int>{1, 2});
    const Vec q_tau = traj.interpolate(tau).x.head(3);
    const double h = manip_cost(model, q_tau, mp);
    CHECK(f.cost(traj) == doctest::Approx(h * h / (2.0 * mp.sigma_s)));
  }

  SUBCASE("Jacobian matches finite differences through both states") {
    for (double tau : {0.2, 1.5, 3.9}) {
      const int interval = std::min(static_cast<int>(tau / params.dt()), 3);
      check_factor_jacobian(
          InterpManipFactor(model, params, interval, tau, mp), traj);
    }
  }

  SUBCASE("tau outside the open interval rejected") {
    CHECK_THROWS(InterpManipFactor(model, params, 1, 1.0, mp));
    CHECK_THROWS(InterpManipFactor(model, params, 1, 2.0, mp));
    CHECK_THROWS(InterpManipFactor(model, params, 1, 2.5, mp));
  }
}

TEST_CASE("collision cost and factor") {
  const ChainModel model = ur10();
  REQUIRE(!model.collision_spheres().empty());

  // Flat floor: SDF exactly linear in z over the sampled region.
  const Obstacle floor = BoxObstacle{Vec3(0, 0, -2.0), Vec3(10, 10, 1.8)};
  const SDFGrid sdf =
      build_sdf({floor}, Vec3(-2, -2, -0.5), Vec3(2, 2, 2), 0.05);

  CollisionFactorParams cp;
  cp.sigma_obs = 1e2;
  cp.eps = 0.5;

  SUBCASE("hinge: zero far away, positive in the margin") {
    Vec q = Vec::Zero(6);
    q[1] = -kPi / 2;  // arm pointing up
    const Vec far_cost = collision_cost(model, sdf, q, 0.05);
    CHECK(far_cost.maxCoeff() == 0.0);

    // A huge margin forces every sphere into the hinge region.
    const Vec near_cost = collision_cost(model, sdf, q, 5.0);
    CHECK(near_cost.minCoeff() > 0.0);

    // Each entry is max(eps + radius - d, 0) against the analytic field.
    const FkResult fk = forward_kinematics(model, q);
    for (size_t s = 0; s < model.collision_spheres().size(); ++s) {
      const CollisionSphere& sph = model.collision_spheres()[s];
      const Vec3 center = sphere_center(model, fk, sph);
      const double d = center.z() + 0.2;  // distance to the floor at z=-0.2
      CHECK(near_cost[static_cast<Eigen::Index>(s)] ==
            doctest::Approx(std::max(5.0 + sph.radius - d, 0.0))
                .epsilon(1e-6));
    }
  }

  SUBCASE("out-of-bounds spheres cost zero and raise the flag") {
    const SDFGrid tiny =
        build_sdf({floor}, Vec3(-0.1, -0.1, 1.6), Vec3(0.1, 0.1, 1.9), 0.05);
    Vec q = Vec::Zero(6);
    q[1] = -kPi / 2;
    bool oob = false;
    const Vec cost = collision_cost(model, tiny, q, 5.0);
    collision_cost(model, tiny, q, 5.0, &oob);
    // At least one sphere is outside the tiny grid.
    CHECK(oob);
    CHECK(cost.minCoeff() >= 0.0);
  }

  SUBCASE("factor Jacobian matches finite differences") {
    const GPParams params = GPParams::isotropic(6, 1e3, 4.0, 5);
    Vec start = Vec::Zero(6), goal = Vec::Zero(6);
    start[1] = -1.2;
    goal[1] = -0.4;
    goal[2] = 0.8;
    GPTrajectory traj = make_constant_velocity_prior(start, goal, params);

    check_factor_jacobian(CollisionFactor(model, sdf, 2, cp), traj, 1e-6,
                          1e-4);
    check_factor_jacobian(
        InterpCollisionFactor(model, sdf, params, 1, 1.4, cp), traj, 1e-6,
        1e-4);
  }

  SUBCASE("parameter validation") {
    CollisionFactorParams bad = cp;
    bad.sigma_obs = 0.0;
    CHECK_THROWS(bad.validate());
    bad = cp;
    bad.eps = -0.1;
    CHECK_THROWS(bad.validate());
  }
}

TEST_CASE("goal position factor") {
  SUBCASE("spatial chain") {
    const ChainModel model = ur10();
    const GPParams params = GPParams::isotropic(6, 1e3, 4.0, 5);
    GPTrajectory traj = random_trajectory(params, 23, 0.5);

    const Vec3 goal = fk_position(model, traj.theta(4));
    const GoalPositionFactor at_goal(model, 4, goal, 1e-4);
    CHECK(at_goal.cost(traj) == doctest::Approx(0.0).epsilon(1e-12));

    const GoalPositionFactor f(model, 4, goal + Vec3(0.1, -0.05, 0.2), 1e-4);
    CHECK(f.cost(traj) > 0.0);
    check_factor_jacobian(f, traj);
  }

  SUBCASE("planar chain uses 2 residual rows") {
    const ChainModel model = planar_2r();
    const GPParams params = GPParams::isotropic(2, 1e3, 4.0, 5);
    GPTrajectory traj = random_trajectory(params, 29, 0.4);

    const GoalPositionFactor f(model, 2, Vec3(1.0, 0.8, 0.0), 1e-4);
    CHECK(f.dim() == 2);
    Vec r;
    f.evaluate(traj, r, nullptr);
    const Vec3 pos = fk_position(model, traj.theta(2));
    CHECK(r.size() == 2);
    CHECK(r[0] == doctest::Approx((pos.x() - 1.0) / 1e-2).epsilon(1e-9));
    CHECK(r[1] == doctest::Approx((pos.y() - 0.8) / 1e-2).epsilon(1e-9));
    check_factor_jacobian(f, traj);
  }
}
