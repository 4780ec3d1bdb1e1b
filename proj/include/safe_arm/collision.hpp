#pragma once

#include "safe_arm/kinematics.hpp"

#include <span>
#include <vector>

namespace safe_arm {

struct Capsule {
  Vec3 p0 = Vec3::Zero();
  Vec3 p1 = Vec3::Zero();
  double radius = 0.05;
};

// Solid axis-aligned box.
struct Aabb {
  Vec3 min_corner = Vec3::Zero();
  Vec3 max_corner = Vec3::Zero();

  static Aabb centered(const Vec3& center, const Vec3& size) {
    return {center - 0.5 * size, center + 0.5 * size};
  }
  Vec3 center() const { return 0.5 * (min_corner + max_corner); }
  Vec3 size() const { return max_corner - min_corner; }
  bool contains(const Vec3& p) const {
    return (p.array() >= min_corner.array()).all() && (p.array() <= max_corner.array()).all();
  }
  bool valid() const {
    return min_corner.allFinite() && max_corner.allFinite() &&
           (min_corner.array() <= max_corner.array()).all();
  }
};

struct CapsuleContact {
  bool collides = false;
  double clearance = 0.0;  // distance minus radius; negative when penetrating
};

struct ArmContact {
  bool any_collision = false;
  double min_clearance = 0.0;
};

double point_aabb_distance(const Vec3& p, const Aabb& box);

// Coarse scan of 16 samples along the segment, then golden-section refinement
// around the best sample. Exact 0 when the segment touches the box.
double segment_aabb_distance(const Vec3& p0, const Vec3& p1, const Aabb& box);

// Contact at exactly zero clearance counts as a collision.
CapsuleContact capsule_aabb_collides(const Capsule& capsule, const Aabb& box);

// Capsule i runs from frames[i] to frames[i + 1]; the last capsule ends at
// the tip. `radii` holds one radius per link.
ArmContact arm_obstacle_query(const LinkFrames& frames, std::span<const double> radii,
                              std::span<const Aabb> obstacles);

std::vector<Capsule> arm_capsules(const LinkFrames& frames, std::span<const double> radii);

}  // namespace safe_arm
