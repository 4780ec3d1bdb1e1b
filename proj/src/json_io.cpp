#include "safe_arm/json_io.hpp"

#include "safe_arm/errors.hpp"

#include <fmt/format.h>

#include <fstream>

namespace safe_arm {

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const json& j, const char* field) {
  if (!j.is_array() || j.size() != 3) {
    throw ConfigError(fmt::format("field '{}' must be an array of 3 numbers", field));
  }
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number()) {
      throw ConfigError(fmt::format("field '{}' must be an array of 3 numbers", field));
    }
    v[i] = j[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

json arm_model_to_json(const ArmModel& model) {
  json joints = json::array();
  for (const auto& jt : model.joints) {
    joints.push_back({{"axis", vec3_to_json(jt.axis)},
                      {"origin", vec3_to_json(jt.origin)},
                      {"limit_lo", jt.limit_lo},
                      {"limit_hi", jt.limit_hi},
                      {"collision_radius", jt.collision_radius}});
  }
  json out = {{"joints", joints}, {"tip_offset", vec3_to_json(model.tip_offset)}};
  if (!model.base_pose.isApprox(Eigen::Isometry3d::Identity(), 0.0)) {
    out["base_position"] = vec3_to_json(model.base_pose.translation());
  }
  return out;
}

ArmModel arm_model_from_json(const json& j) {
  if (!j.is_object() || !j.contains("joints") || !j["joints"].is_array()) {
    throw ConfigError("arm model must be an object with a 'joints' array");
  }
  ArmModel model;
  try {
    for (const auto& jt : j["joints"]) {
      JointSpec spec;
      spec.axis = vec3_from_json(jt.at("axis"), "axis");
      spec.origin = vec3_from_json(jt.at("origin"), "origin");
      spec.limit_lo = jt.at("limit_lo").get<double>();
      spec.limit_hi = jt.at("limit_hi").get<double>();
      spec.collision_radius = jt.at("collision_radius").get<double>();
      model.joints.push_back(spec);
    }
    model.tip_offset = vec3_from_json(j.at("tip_offset"), "tip_offset");
    if (j.contains("base_position")) {
      model.base_pose.translation() = vec3_from_json(j["base_position"], "base_position");
    }
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("malformed arm model: {}", e.what()));
  }
  try {
    model.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(fmt::format("invalid arm model: {}", e.what()));
  }
  return model;
}

json aabb_to_json(const Aabb& box) {
  return {{"min", vec3_to_json(box.min_corner)}, {"max", vec3_to_json(box.max_corner)}};
}

Aabb aabb_from_json(const json& j, const char* field) {
  if (!j.is_object() || !j.contains("min") || !j.contains("max")) {
    throw ConfigError(fmt::format("field '{}' must be an object with 'min' and 'max'", field));
  }
  Aabb box{vec3_from_json(j["min"], field), vec3_from_json(j["max"], field)};
  if (!box.valid()) throw ConfigError(fmt::format("field '{}': min must be <= max", field));
  return box;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open '{}'", path.string()));
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("cannot parse '{}': {}", path.string(), e.what()));
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
  out << j.dump(2) << '\n';
  if (!out) throw ConfigError(fmt::format("write to '{}' failed", path.string()));
}

}  // namespace safe_arm
