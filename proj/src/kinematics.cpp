#include "rigmotion/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "rigmotion/errors.hpp"
#include "rigmotion/format.hpp"

namespace rigmotion {
namespace {

template <typename Key>
std::size_t upper_index(const std::vector<Key>& keys, double t) {
  return static_cast<std::size_t>(
      std::upper_bound(keys.begin(), keys.end(), t, [](double v, const Key& k) { return v < k.time; }) -
      keys.begin());
}

// A clip bound to a skeleton's joint indices, validated once.
class BoundClip {
 public:
  BoundClip(const Clip& clip, const Skeleton& skeleton) : clip_(clip), table_(skeleton.table()) {
    const ValidationReport report = validate_against(clip, skeleton);
    if (!report.ok()) {
      const auto errors = report.error_messages();
      throw Error("InvalidClip", "clip '" + clip.name + "' does not fit " + skeleton.object_name() +
                                     ": " + errors.front());
    }
    rotation_.assign(table_.size(), nullptr);
    offset_.assign(table_.size(), nullptr);
    for (const auto& track : clip.rotation_tracks) rotation_[*table_.index_of(track.joint_name)] = &track.keys;
    for (const auto& track : clip.translation_tracks) offset_[*table_.index_of(track.joint_name)] = &track.keys;
  }

  std::size_t size() const { return table_.size(); }
  const JointTable& table() const { return table_; }

  void local_pose(double t, EdgeMode edge, std::span<LocalTransform> out) const {
    const double mapped = map_time(t, clip_.duration, edge);
    for (std::size_t i = 0; i < table_.size(); ++i) {
      out[i].rotation = rotation_[i] ? sample_rotation(*rotation_[i], mapped) : table_.rest_rotation[i];
      out[i].translation = offset_[i] ? sample_translation(*offset_[i], mapped) : Vec3{};
    }
    if (!clip_.root_motion.empty()) {
      out[0].translation = out[0].translation + sample_translation(clip_.root_motion, mapped);
    }
  }

 private:
  const Clip& clip_;
  const JointTable& table_;
  std::vector<const std::vector<RotationKey>*> rotation_;
  std::vector<const std::vector<TranslationKey>*> offset_;
};

// Parents precede children in a JointTable, so one forward sweep suffices.
void compose(const JointTable& table, std::span<const LocalTransform> local,
             std::span<WorldTransform> world) {
  for (std::size_t i = 0; i < table.size(); ++i) {
    const Vec3 offset = table.rest_translation[i] + local[i].translation;
    if (table.parent[i] == JointTable::npos) {
      world[i] = {local[i].rotation, offset};
    } else {
      const WorldTransform& p = world[table.parent[i]];
      world[i] = {normalized(p.rotation * local[i].rotation), p.position + rotate(p.rotation, offset)};
    }
  }
}

Frame evaluate_frame(const BoundClip& bound, double t, EdgeMode edge,
                     std::vector<LocalTransform>& local, std::vector<WorldTransform>& world) {
  bound.local_pose(t, edge, local);
  compose(bound.table(), local, world);
  Frame frame{t, {}};
  frame.pose.entries.reserve(bound.size());
  for (std::size_t i = 0; i < bound.size(); ++i) frame.pose.entries.emplace_back(bound.table().names[i], world[i]);
  return frame;
}

}  // namespace

Quaternion sample_rotation(const std::vector<RotationKey>& keys, double t) {
  const std::size_t hi = upper_index(keys, t);
  if (hi == 0) return keys.front().rotation;
  if (hi == keys.size()) return keys.back().rotation;
  const RotationKey& a = keys[hi - 1];
  const RotationKey& b = keys[hi];
  if (t == a.time) return a.rotation;
  return slerp(a.rotation, b.rotation, (t - a.time) / (b.time - a.time));
}

Vec3 sample_translation(const std::vector<TranslationKey>& keys, double t) {
  const std::size_t hi = upper_index(keys, t);
  if (hi == 0) return keys.front().translation;
  if (hi == keys.size()) return keys.back().translation;
  const TranslationKey& a = keys[hi - 1];
  const TranslationKey& b = keys[hi];
  if (t == a.time) return a.translation;
  return lerp(a.translation, b.translation, (t - a.time) / (b.time - a.time));
}

double map_time(double t, double duration, EdgeMode edge) {
  if (edge == EdgeMode::clamp) return std::clamp(t, 0.0, duration);
  double m = std::fmod(t, duration);
  if (m < 0.0) m += duration;
  return m;
}

Pose sample(const Clip& clip, const Skeleton& skeleton, double t, EdgeMode edge) {
  const BoundClip bound(clip, skeleton);
  std::vector<LocalTransform> local(bound.size());
  bound.local_pose(t, edge, local);
  Pose pose;
  pose.entries.reserve(local.size());
  for (std::size_t i = 0; i < local.size(); ++i) pose.entries.emplace_back(bound.table().names[i], local[i]);
  return pose;
}

WorldPose forward_kinematics(const Skeleton& skeleton, const Pose& pose) {
  const JointTable& table = skeleton.table();
  std::vector<LocalTransform> local(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    // Poses built by sample() share the skeleton's order; fall back to lookup.
    const LocalTransform* found = i < pose.entries.size() && pose.entries[i].first == table.names[i]
                                      ? &pose.entries[i].second
                                      : pose.find(table.names[i]);
    if (!found) throw Error("MissingJointInPose", "pose has no entry for joint '" + table.names[i] + "'");
    local[i] = *found;
  }
  std::vector<WorldTransform> world(table.size());
  compose(table, local, world);
  WorldPose out;
  out.entries.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) out.entries.emplace_back(table.names[i], world[i]);
  return out;
}

std::vector<double> series_times(double duration, double fps) {
  if (!(fps > 0.0) || !std::isfinite(fps)) {
    throw Error("InvalidArgument", "fps must be positive, got " + format_shortest(fps));
  }
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw Error("InvalidArgument", "duration must be positive");
  }
  constexpr double kGridSlack = 1e-9;
  const auto last = static_cast<std::size_t>(std::floor(duration * fps + kGridSlack));
  std::vector<double> times;
  times.reserve(last + 2);
  for (std::size_t k = 0; k <= last; ++k) times.push_back(static_cast<double>(k) / fps);
  if (std::abs(times.back() - duration) <= kGridSlack * std::max(1.0, duration)) {
    times.back() = duration;
  } else {
    times.push_back(duration);
  }
  return times;
}

std::vector<Frame> sample_series(const Clip& clip, const Skeleton& skeleton, double fps, EdgeMode edge) {
  const BoundClip bound(clip, skeleton);
  const std::vector<double> times = series_times(clip.duration, fps);
  std::vector<Frame> frames(times.size());
  const auto n = static_cast<std::ptrdiff_t>(times.size());

#pragma omp parallel
  {
    std::vector<LocalTransform> local(bound.size());
    std::vector<WorldTransform> world(bound.size());
#pragma omp for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
      frames[k] = evaluate_frame(bound, times[k], edge, local, world);
    }
  }
  return frames;
}

namespace reference {

std::vector<Frame> sample_series(const Clip& clip, const Skeleton& skeleton, double fps, EdgeMode edge) {
  const BoundClip bound(clip, skeleton);
  std::vector<LocalTransform> local(bound.size());
  std::vector<WorldTransform> world(bound.size());
  std::vector<Frame> frames;
  for (double t : series_times(clip.duration, fps)) frames.push_back(evaluate_frame(bound, t, edge, local, world));
  return frames;
}

}  // namespace reference

std::string frames_to_csv(const std::vector<Frame>& frames) {
  auto field = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    return quoted + "\"";
  };
  std::string out = "t,joint,px,py,pz,rx,ry,rz,rw\n";
  for (const auto& frame : frames) {
    const std::string t = format_fixed(frame.time, 6);
    for (const auto& [name, w] : frame.pose.entries) {
      out += t + "," + field(name);
      for (double v : {w.position.x, w.position.y, w.position.z, w.rotation.x, w.rotation.y, w.rotation.z,
                       w.rotation.w}) {
        out += "," + format_fixed(v, 6);
      }
      out += "\n";
    }
  }
  return out;
}

}  // namespace rigmotion
