#include "safe_arm/checks.hpp"

#include "safe_arm/collision.hpp"
#include "safe_arm/env.hpp"

#include <fmt/format.h>

#include <cmath>

namespace safe_arm::checks {

namespace {

constexpr double kJacobianStep = 1e-5;
constexpr double kJacobianTolerance = 1e-6;
constexpr double kIkTolerance = 1e-3;
constexpr double kIkPassFraction = 0.99;
constexpr double kBoundaryBand = 1e-3;
constexpr int kAxisSamples = 10000;

Vec3 random_unit(Rng& rng) {
  Vec3 v(rng.normal(), rng.normal(), rng.normal());
  while (v.norm() < 1e-6) v = Vec3(rng.normal(), rng.normal(), rng.normal());
  return v.normalized();
}

// Point within `radius` of the solid box, via per-axis clamping.
bool in_rounded_box(const Vec3& p, const Vec3& lo, const Vec3& hi, double radius) {
  double sq = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double c = p[i] < lo[i] ? lo[i] : (p[i] > hi[i] ? hi[i] : p[i]);
    sq += (p[i] - c) * (p[i] - c);
  }
  return sq <= radius * radius;
}

}  // namespace

ArmModel random_arm(Rng& rng, int min_dof, int max_dof) {
  ArmModel arm;
  const int dof = min_dof + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_dof - min_dof + 1)));
  for (int i = 0; i < dof; ++i) {
    JointSpec j;
    j.axis = random_unit(rng);
    j.origin = Vec3(rng.normal(), rng.normal(), rng.normal()) * 0.15;
    j.limit_lo = -rng.uniform(1.0, 3.0);
    j.limit_hi = rng.uniform(1.0, 3.0);
    j.collision_radius = rng.uniform(0.02, 0.08);
    arm.joints.push_back(j);
  }
  arm.tip_offset = Vec3(rng.normal(), rng.normal(), rng.normal()) * 0.1;
  return arm;
}

JointVector random_joints(const ArmModel& model, Rng& rng) {
  JointVector q(static_cast<Eigen::Index>(model.dof()));
  for (std::size_t i = 0; i < model.dof(); ++i)
    q[static_cast<Eigen::Index>(i)] = rng.uniform(model.joints[i].limit_lo, model.joints[i].limit_hi);
  return q;
}

double dense_segment_box_distance(const Vec3& p0, const Vec3& p1, const Vec3& box_min,
                                  const Vec3& box_max, int samples) {
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < samples; ++k) {
    const double t = samples > 1 ? static_cast<double>(k) / (samples - 1) : 0.0;
    const Vec3 p = p0 + t * (p1 - p0);
    double sq = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double gap = std::max({box_min[i] - p[i], 0.0, p[i] - box_max[i]});
      sq += gap * gap;
    }
    best = std::min(best, std::sqrt(sq));
  }
  return best;
}

CheckResult check_jacobian(int instances, std::uint64_t seed) {
  Rng rng(seed);
  const ArmModel panda = default_panda_model();
  double worst = 0.0;
  for (int k = 0; k < instances; ++k) {
    const ArmModel arm = (k % 5 == 0) ? panda : random_arm(rng, 1, 7);
    const JointVector q = random_joints(arm, rng);
    const Eigen::Matrix3Xd jac = tip_jacobian(arm, q);
    for (Eigen::Index i = 0; i < q.size(); ++i) {
      JointVector up = q, down = q;
      up[i] += kJacobianStep;
      down[i] -= kJacobianStep;
      const Vec3 fd = (forward_kinematics(arm, up).tip - forward_kinematics(arm, down).tip) /
                      (2.0 * kJacobianStep);
      worst = std::max(worst, (jac.col(i) - fd).cwiseAbs().maxCoeff());
    }
  }
  return {"tip Jacobian vs finite differences", worst < kJacobianTolerance,
          fmt::format("{} arm/pose draws, worst abs error {:.3e} (limit {:.0e})", instances, worst,
                      kJacobianTolerance)};
}

CheckResult check_ik_round_trip(int trials, std::uint64_t seed) {
  Rng rng(seed);
  const ArmModel arm = default_panda_model();
  const Vec3 shoulder = arm.shoulder();
  const double max_radius = 0.9 * arm.reach();
  int passed = 0;
  double worst = 0.0;
  for (int k = 0; k < trials; ++k) {
    // Reachable target: the tip of a random configuration, kept inside 90%
    // of the reach sphere.
    JointVector q_goal;
    Vec3 target;
    do {
      q_goal = random_joints(arm, rng);
      target = forward_kinematics(arm, q_goal).tip;
    } while ((target - shoulder).norm() > max_radius);
    JointVector q_start = q_goal;
    for (Eigen::Index i = 0; i < q_start.size(); ++i) q_start[i] += rng.uniform(-0.1, 0.1);
    q_start = clamp_joints(arm, q_start);
    const JointVector q = solve_ik_delta(arm, q_start, target);
    const double err = (forward_kinematics(arm, q).tip - target).norm();
    worst = std::max(worst, err);
    if (err < kIkTolerance && within_limits(arm, q)) ++passed;
  }
  const double fraction = static_cast<double>(passed) / trials;
  return {"IK round trip", fraction >= kIkPassFraction,
          fmt::format("{}/{} targets within {:.0e} m (need {:.0f}%), worst error {:.3e} m", passed,
                      trials, kIkTolerance, 100 * kIkPassFraction, worst)};
}

CheckResult check_capsule_collisions(int pairs, std::uint64_t seed) {
  Rng rng(seed);
  int compared = 0, agreed = 0, boundary = 0, hits = 0;
  for (int k = 0; k < pairs; ++k) {
    const Vec3 center(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
    const Vec3 half(rng.uniform(0.02, 0.3), rng.uniform(0.02, 0.3), rng.uniform(0.02, 0.3));
    const Aabb box{center - half, center + half};
    Capsule c;
    c.p0 = center + Vec3(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
    c.p1 = c.p0 + random_unit(rng) * rng.uniform(0.0, 0.6);
    c.radius = rng.uniform(0.01, 0.15);

    const CapsuleContact got = capsule_aabb_collides(c, box);
    if (std::abs(got.clearance) < kBoundaryBand) {
      ++boundary;
      continue;
    }
    bool oracle = false;
    for (int s = 0; s < kAxisSamples && !oracle; ++s) {
      const double t = static_cast<double>(s) / (kAxisSamples - 1);
      oracle = in_rounded_box(c.p0 + t * (c.p1 - c.p0), box.min_corner, box.max_corner, c.radius);
    }
    ++compared;
    hits += oracle ? 1 : 0;
    if (oracle == got.collides) ++agreed;
  }
  return {"capsule/box verdicts vs sampling oracle", agreed == compared,
          fmt::format("{}/{} agree ({} colliding, {} boundary cases skipped)", agreed, compared, hits,
                      boundary)};
}

std::vector<CheckResult> run_simcheck_suite(std::uint64_t seed) {
  return {check_jacobian(100, seed), check_ik_round_trip(1000, seed + 1),
          check_capsule_collisions(1000, seed + 2)};
}

}  // namespace safe_arm::checks
