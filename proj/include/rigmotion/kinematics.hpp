#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rigmotion/clip.hpp"
#include "rigmotion/math.hpp"
#include "rigmotion/skeleton.hpp"

namespace rigmotion {

enum class EdgeMode { clamp, loop };

struct LocalTransform {
  Quaternion rotation;
  Vec3 translation;  // offset added to the joint's rest translation
};

struct WorldTransform {
  Quaternion rotation;
  Vec3 position;
};

// Snapshot of every joint, in skeleton pre-order.
template <typename T>
struct JointMap {
  std::vector<std::pair<std::string, T>> entries;

  const T* find(std::string_view joint) const {
    for (const auto& [name, value] : entries) {
      if (name == joint) return &value;
    }
    return nullptr;
  }
  std::size_t size() const { return entries.size(); }
};

using Pose = JointMap<LocalTransform>;
using WorldPose = JointMap<WorldTransform>;

struct Frame {
  double time = 0.0;
  WorldPose pose;
};

// Interpolates a key list at time t. Before the first key or after the last
// the boundary key holds; at a key time the key itself is returned exactly.
Quaternion sample_rotation(const std::vector<RotationKey>& keys, double t);
Vec3 sample_translation(const std::vector<TranslationKey>& keys, double t);

// Maps t into [0, duration]: clamped, or wrapped modulo the duration.
double map_time(double t, double duration, EdgeMode edge);

// Local pose at time t. Untracked joints keep their rest rotation; the root
// carries the interpolated root motion. Throws Error("InvalidClip") when the
// clip does not validate against the skeleton.
Pose sample(const Clip& clip, const Skeleton& skeleton, double t, EdgeMode edge = EdgeMode::clamp);

// Root-to-leaf composition. Throws Error("MissingJointInPose").
WorldPose forward_kinematics(const Skeleton& skeleton, const Pose& pose);

// Sample times 0, 1/fps, 2/fps, ... and a final sample exactly at the
// duration. Throws Error("InvalidArgument") unless fps > 0.
std::vector<double> series_times(double duration, double fps);

// World poses at series_times(); frames are evaluated in parallel.
std::vector<Frame> sample_series(const Clip& clip, const Skeleton& skeleton, double fps,
                                 EdgeMode edge = EdgeMode::clamp);

// CSV with header t,joint,px,py,pz,rx,ry,rz,rw; six fixed decimals.
std::string frames_to_csv(const std::vector<Frame>& frames);

namespace reference {

// Single-threaded sample_series(), kept as the baseline for tests and benchmarks.
std::vector<Frame> sample_series(const Clip& clip, const Skeleton& skeleton, double fps,
                                 EdgeMode edge = EdgeMode::clamp);

}  // namespace reference
}  // namespace rigmotion
