#pragma once

#include "safe_arm/kinematics.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>

namespace safe_arm::test {

inline ArmModel one_joint_arm() {
  ArmModel arm;
  JointSpec j;
  j.axis = Vec3::UnitZ();
  arm.joints.push_back(j);
  arm.tip_offset = Vec3(1.0, 0.0, 0.0);
  return arm;
}

// Two links of length 1 rotating about z in the xy-plane.
inline ArmModel planar_two_link() {
  ArmModel arm;
  JointSpec a;
  a.axis = Vec3::UnitZ();
  JointSpec b = a;
  b.origin = Vec3(1.0, 0.0, 0.0);
  arm.joints = {a, b};
  arm.tip_offset = Vec3(1.0, 0.0, 0.0);
  return arm;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("safe_arm_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace safe_arm::test
