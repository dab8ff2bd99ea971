#include "rigmotion/compress.hpp"

#include <algorithm>
#include <cmath>

#include "rigmotion/errors.hpp"
#include "rigmotion/format.hpp"
#include "rigmotion/kinematics.hpp"

namespace rigmotion {
namespace {

// Top-down split: a segment whose worst interior key deviates by more than
// the tolerance is split at that key. Raising the tolerance only prunes the
// split tree, so kept keys are nested and the error never decreases.
template <typename Key, typename Interp, typename Distance>
std::vector<Key> reduce(const std::vector<Key>& keys, double tolerance, Interp interp, Distance distance) {
  if (keys.size() <= 2) return keys;
  std::vector<bool> keep(keys.size(), false);
  keep.front() = keep.back() = true;
  std::vector<std::pair<std::size_t, std::size_t>> pending{{0, keys.size() - 1}};
  while (!pending.empty()) {
    const auto [lo, hi] = pending.back();
    pending.pop_back();
    double worst = -1.0;
    std::size_t split = lo;
    for (std::size_t j = lo + 1; j < hi; ++j) {
      const double alpha = (keys[j].time - keys[lo].time) / (keys[hi].time - keys[lo].time);
      const double d = distance(interp(keys[lo], keys[hi], alpha), keys[j]);
      if (d > worst) worst = d, split = j;
    }
    if (split == lo || worst <= tolerance) continue;
    keep[split] = true;
    pending.push_back({lo, split});
    pending.push_back({split, hi});
  }
  std::vector<Key> kept;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (keep[i]) kept.push_back(keys[i]);
  }
  return kept;
}

void check_tolerance(double tolerance) {
  if (!(tolerance >= 0.0) || !std::isfinite(tolerance)) {
    throw Error("InvalidArgument", "tolerance must be a finite value >= 0, got " + format_shortest(tolerance));
  }
}

}  // namespace

std::vector<RotationKey> reduce_rotation_keys(const std::vector<RotationKey>& keys, double tolerance) {
  return reduce(
      keys, tolerance,
      [](const RotationKey& a, const RotationKey& b, double alpha) { return slerp(a.rotation, b.rotation, alpha); },
      [](const Quaternion& q, const RotationKey& k) { return geodesic_angle(q, k.rotation); });
}

std::vector<TranslationKey> reduce_translation_keys(const std::vector<TranslationKey>& keys, double tolerance) {
  return reduce(
      keys, tolerance,
      [](const TranslationKey& a, const TranslationKey& b, double alpha) {
        return lerp(a.translation, b.translation, alpha);
      },
      [](const Vec3& v, const TranslationKey& k) { return (v - k.translation).length(); });
}

Clip compress(const Clip& clip, double tolerance) {
  check_tolerance(tolerance);
  Clip out = clip;
  const auto n = static_cast<std::ptrdiff_t>(out.rotation_tracks.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out.rotation_tracks[i].keys = reduce_rotation_keys(clip.rotation_tracks[i].keys, tolerance);
  }
  const auto m = static_cast<std::ptrdiff_t>(out.translation_tracks.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    out.translation_tracks[i].keys = reduce_translation_keys(clip.translation_tracks[i].keys, tolerance);
  }
  out.root_motion = reduce_translation_keys(clip.root_motion, tolerance);
  return out;
}

double reconstruction_error(const Clip& original, const Clip& reduced) {
  double worst = 0.0;
  for (const auto& track : original.rotation_tracks) {
    const RotationTrack* other = reduced.find_track(track.joint_name);
    for (const auto& key : track.keys) {
      const Quaternion q = other && !other->keys.empty() ? sample_rotation(other->keys, key.time)
                                                          : Quaternion::identity();
      worst = std::max(worst, geodesic_angle(q, key.rotation));
    }
  }
  if (!reduced.root_motion.empty()) {
    for (const auto& key : original.root_motion) {
      worst = std::max(worst, (sample_translation(reduced.root_motion, key.time) - key.translation).length());
    }
  }
  for (const auto& track : original.translation_tracks) {
    for (const auto& other : reduced.translation_tracks) {
      if (other.joint_name != track.joint_name || other.keys.empty()) continue;
      for (const auto& key : track.keys) {
        worst = std::max(worst, (sample_translation(other.keys, key.time) - key.translation).length());
      }
    }
  }
  return worst;
}

namespace reference {

Clip compress(const Clip& clip, double tolerance) {
  check_tolerance(tolerance);
  Clip out = clip;
  for (auto& track : out.rotation_tracks) track.keys = reduce_rotation_keys(track.keys, tolerance);
  for (auto& track : out.translation_tracks) track.keys = reduce_translation_keys(track.keys, tolerance);
  out.root_motion = reduce_translation_keys(out.root_motion, tolerance);
  return out;
}

}  // namespace reference
}  // namespace rigmotion
