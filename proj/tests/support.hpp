#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rigmotion/clip.hpp"
#include "rigmotion/math.hpp"
#include "rigmotion/skeleton.hpp"

namespace testsupport {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(RIGMOTION_FIXTURE_DIR) / name;
}

inline std::filesystem::path golden(const std::string& name) {
  return std::filesystem::path(RIGMOTION_GOLDEN_DIR) / name;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing test file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline rigmotion::Skeleton load_skeleton(const std::string& name) {
  return rigmotion::parse_object_json(read_text(fixture(name)));
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("rigmotion-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Uniform random unit quaternion (Shoemake).
inline rigmotion::Quaternion random_rotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double u1 = u(rng), u2 = u(rng), u3 = u(rng);
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  constexpr double kTau = 6.283185307179586;
  return {a * std::sin(kTau * u2), a * std::cos(kTau * u2), b * std::sin(kTau * u3), b * std::cos(kTau * u3)};
}

inline rigmotion::Vec3 random_vec(std::mt19937_64& rng, double extent) {
  std::uniform_real_distribution<double> u(-extent, extent);
  return {u(rng), u(rng), u(rng)};
}

// Random tree with joints j0..j{n-1}; each joint's parent is an earlier joint.
inline rigmotion::Skeleton random_skeleton(std::mt19937_64& rng, int joints) {
  std::vector<rigmotion::Joint> nodes(joints);
  std::vector<int> parent(joints, -1);
  for (int i = 0; i < joints; ++i) {
    nodes[i].name = "j" + std::to_string(i);
    nodes[i].rest_translation = random_vec(rng, 1.0);
    nodes[i].rest_rotation = random_rotation(rng);
    if (i > 0) parent[i] = std::uniform_int_distribution<int>(0, i - 1)(rng);
  }
  // Attach children deepest-index first so every subtree is complete when moved.
  for (int i = joints - 1; i > 0; --i) {
    auto& siblings = nodes[parent[i]].children;
    siblings.insert(siblings.begin(), std::move(nodes[i]));
  }
  return rigmotion::Skeleton::make("Random", std::move(nodes[0]));
}

// Random valid clip over the skeleton's joints: strictly increasing times in
// [0, duration], unit rotations, root motion when no joint is tracked.
inline rigmotion::Clip random_clip(std::mt19937_64& rng, const rigmotion::Skeleton& skeleton, int max_keys) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  rigmotion::Clip clip;
  clip.name = "Random Clip";
  clip.duration = 0.5 + 4.5 * u(rng);
  const auto names = rigmotion::joint_names(skeleton);
  auto times = [&](int n) {
    std::vector<double> ts(n);
    for (auto& t : ts) t = clip.duration * u(rng);
    ts.front() = 0.0;
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    return ts;
  };
  for (const auto& name : names) {
    if (u(rng) < 0.3) continue;
    rigmotion::RotationTrack track{name, {}};
    for (double t : times(std::uniform_int_distribution<int>(1, max_keys)(rng))) {
      track.keys.push_back({t, random_rotation(rng)});
    }
    clip.rotation_tracks.push_back(std::move(track));
  }
  if (u(rng) < 0.5 || clip.rotation_tracks.empty()) {
    for (double t : times(std::uniform_int_distribution<int>(1, max_keys)(rng))) {
      clip.root_motion.push_back({t, random_vec(rng, 2.0)});
    }
  }
  return clip;
}

}  // namespace testsupport
