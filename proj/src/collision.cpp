#include "safe_arm/collision.hpp"

#include "safe_arm/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace safe_arm {

namespace {

constexpr int kCoarseSamples = 16;
constexpr int kGoldenIterations = 60;
constexpr double kInvPhi = 0.6180339887498949;

}  // namespace

double point_aabb_distance(const Vec3& p, const Aabb& box) {
  const Vec3 below = (box.min_corner - p).cwiseMax(0.0);
  const Vec3 above = (p - box.max_corner).cwiseMax(0.0);
  return (below + above).norm();
}

double segment_aabb_distance(const Vec3& p0, const Vec3& p1, const Aabb& box) {
  require(box.valid(), "invalid box: min_corner must be <= max_corner");
  const Vec3 dir = p1 - p0;
  auto dist_at = [&](double t) { return point_aabb_distance(p0 + t * dir, box); };

  // The distance to a convex set is convex along a segment, so the coarse
  // scan only has to bracket the minimiser.
  int best_k = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kCoarseSamples; ++k) {
    const double d = dist_at(static_cast<double>(k) / (kCoarseSamples - 1));
    if (d < best) {
      best = d;
      best_k = k;
    }
  }
  if (best == 0.0) return 0.0;

  const double step = 1.0 / (kCoarseSamples - 1);
  double a = std::max(0.0, (best_k - 1) * step);
  double b = std::min(1.0, (best_k + 1) * step);
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = dist_at(c);
  double fd = dist_at(d);
  for (int it = 0; it < kGoldenIterations && b - a > 1e-14; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = dist_at(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = dist_at(d);
    }
  }
  return std::min({best, fc, fd, dist_at(a), dist_at(b)});
}

CapsuleContact capsule_aabb_collides(const Capsule& capsule, const Aabb& box) {
  require(capsule.radius > 0.0, "capsule radius must be positive");
  require(capsule.p0.allFinite() && capsule.p1.allFinite(), "capsule endpoints must be finite");
  const double dist = segment_aabb_distance(capsule.p0, capsule.p1, box);
  return {dist <= capsule.radius, dist - capsule.radius};
}

std::vector<Capsule> arm_capsules(const LinkFrames& frames, std::span<const double> radii) {
  require(frames.frames.size() == radii.size() + 1,
          fmt::format("{} radii for {} frames; need one radius per link", radii.size(),
                      frames.frames.size()));
  std::vector<Capsule> capsules;
  capsules.reserve(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    capsules.push_back({frames.frames[i].translation(), frames.frames[i + 1].translation(), radii[i]});
  }
  return capsules;
}

ArmContact arm_obstacle_query(const LinkFrames& frames, std::span<const double> radii,
                              std::span<const Aabb> obstacles) {
  ArmContact out{false, std::numeric_limits<double>::infinity()};
  for (const Capsule& capsule : arm_capsules(frames, radii)) {
    for (const Aabb& box : obstacles) {
      const CapsuleContact c = capsule_aabb_collides(capsule, box);
      out.any_collision = out.any_collision || c.collides;
      out.min_clearance = std::min(out.min_clearance, c.clearance);
    }
  }
  return out;
}

}  // namespace safe_arm
