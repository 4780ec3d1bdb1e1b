#pragma once

// Numerical verification suites behind the `gradcheck` and `simcheck`
// subcommands. Every check compares the library against an oracle that does
// not share its code path: central finite differences, brute-force
// recursions, or dense sampling.

#include "safe_arm/kinematics.hpp"
#include "safe_arm/neural.hpp"
#include "safe_arm/rng.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace safe_arm::checks {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// ||a - b|| / max(||a|| + ||b||, 1e-12)
double relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric);

// Central differences of a scalar function of a flat parameter vector.
Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x, double h);

MlpParams random_mlp(std::span<const int> sizes, Rng& rng);
ArmModel random_arm(Rng& rng, int min_dof, int max_dof);
JointVector random_joints(const ArmModel& model, Rng& rng);

// Brute-force GAE: explicit double sum over future TD residuals.
Eigen::VectorXd brute_force_gae(const std::vector<double>& rewards, const std::vector<double>& values,
                                const std::vector<std::uint8_t>& dones, double bootstrap,
                                double gamma, double lam);

// Dense sampling of the segment; independent of the golden-section search.
double dense_segment_box_distance(const Vec3& p0, const Vec3& p1, const Vec3& box_min,
                                  const Vec3& box_max, int samples);

CheckResult check_mlp_gradients(int instances, std::uint64_t seed);
CheckResult check_log_prob_gradients(int instances, std::uint64_t seed);
CheckResult check_surrogate_gradients(int instances, std::uint64_t seed);
CheckResult check_gae(int instances, std::uint64_t seed);

CheckResult check_jacobian(int instances, std::uint64_t seed);
CheckResult check_ik_round_trip(int trials, std::uint64_t seed);
CheckResult check_capsule_collisions(int pairs, std::uint64_t seed);

std::vector<CheckResult> run_gradcheck_suite(std::uint64_t seed = 2024);
std::vector<CheckResult> run_simcheck_suite(std::uint64_t seed = 2024);

}  // namespace safe_arm::checks
