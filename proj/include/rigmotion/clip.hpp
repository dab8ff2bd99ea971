#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rigmotion/math.hpp"
#include "rigmotion/skeleton.hpp"

namespace rigmotion {

struct RotationKey {
  double time = 0.0;
  Quaternion rotation;
};

struct TranslationKey {
  double time = 0.0;
  Vec3 translation;
};

// Absolute local rotations. When sampled they replace the joint's rest
// rotation.
struct RotationTrack {
  std::string joint_name;
  std::vector<RotationKey> keys;
};

// Offsets added to a joint's rest translation.
struct TranslationTrack {
  std::string joint_name;
  std::vector<TranslationKey> keys;
};

struct Clip {
  std::string name;
  double duration = 0.0;
  std::vector<RotationTrack> rotation_tracks;
  // Root motion; empty when the clip does not move the object.
  std::vector<TranslationKey> root_motion;
  // Per-joint translation extension, off unless a clip supplies it.
  std::vector<TranslationTrack> translation_tracks;

  const RotationTrack* find_track(std::string_view joint) const;
  std::size_t key_count() const;
};

enum class Severity { info, warning, error };

struct ValidationIssue {
  Severity severity;
  std::string code;   // UnknownJoint, OutOfRangeTime, ...
  std::string joint;  // empty for clip-level issues
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  std::set<std::string> tracked_joints;
  // Joints whose animated transform departs from the rest pose at some key.
  std::set<std::string> moving_joints;
  std::vector<std::string> untracked_joints;

  bool ok() const { return error_count() == 0; }
  std::size_t error_count() const;
  std::vector<std::string> error_messages() const;
};

// Rotations count as denormalized when |‖q‖ − 1| exceeds this.
inline constexpr double kRenormTolerance = 1e-6;
// Rotations at or below this norm cannot be renormalized.
inline constexpr double kDegenerateNorm = 0.1;

ValidationReport validate_against(const Clip& clip, const Skeleton& skeleton);

// Renormalizes rotations, sorts keys, collapses duplicate times (last one
// wins) and flips quaternion signs for hemisphere continuity along each
// track. Throws Error("DegenerateRotation") when a rotation norm is < 0.1.
Clip normalize(const Clip& clip);

// Human-readable report, one issue per line.
std::string format_report(const ValidationReport& report);

// Canonical clip JSON:
// {"name":..,"duration":..,"tracks":[{"joint":..,"keys":[[t,x,y,z,w],..]}],"root":[[t,x,y,z],..]}
// plus "translations":[{"joint":..,"keys":[[t,x,y,z],..]}] when present.
std::string serialize_clip_json(const Clip& clip);
// Throws Error("MalformedJson").
Clip parse_clip_json(std::string_view text);

}  // namespace rigmotion
