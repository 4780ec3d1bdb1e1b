#pragma once

// JSON mappings for configuration and model types.

#include "json.hpp"

#include "safe_arm/collision.hpp"
#include "safe_arm/kinematics.hpp"

#include <filesystem>

namespace safe_arm {

using nlohmann::json;

json vec3_to_json(const Vec3& v);
Vec3 vec3_from_json(const json& j, const char* field);

json arm_model_to_json(const ArmModel& model);
ArmModel arm_model_from_json(const json& j);

json aabb_to_json(const Aabb& box);
Aabb aabb_from_json(const json& j, const char* field);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);

}  // namespace safe_arm
