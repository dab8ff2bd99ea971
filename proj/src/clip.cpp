#include "rigmotion/clip.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "rigmotion/errors.hpp"
#include "rigmotion/format.hpp"

namespace rigmotion {
namespace {

// Rest-pose deviation below this is not counted as motion.
constexpr double kMotionEpsilon = 1e-6;

template <typename Key>
void check_times(const std::vector<Key>& keys, double duration, const std::string& joint,
                 ValidationReport& report) {
  auto add = [&](const std::string& code, const std::string& msg) {
    report.issues.push_back({Severity::error, code, joint, msg});
  };
  const std::string where = joint.empty() ? std::string("root motion") : "track '" + joint + "'";
  bool monotone_reported = false;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const double t = keys[i].time;
    if (!std::isfinite(t)) {
      add("NonFiniteValue", where + ": non-finite key time");
      continue;
    }
    if (t < 0.0 || t > duration) {
      add("OutOfRangeTime", where + ": key time " + format_shortest(t) + " outside [0, " +
                                format_shortest(duration) + "]");
    }
    if (i > 0 && !monotone_reported && !(t > keys[i - 1].time)) {
      add("NonMonotoneTime", where + ": key times not strictly increasing at " + format_shortest(t));
      monotone_reported = true;
    }
  }
}

template <typename Key>
std::vector<Key> sorted_unique(std::vector<Key> keys) {
  std::stable_sort(keys.begin(), keys.end(),
                   [](const Key& a, const Key& b) { return a.time < b.time; });
  std::vector<Key> out;
  out.reserve(keys.size());
  for (auto& k : keys) {
    if (!out.empty() && out.back().time == k.time) {
      out.back() = k;
    } else {
      out.push_back(k);
    }
  }
  return out;
}

}  // namespace

const RotationTrack* Clip::find_track(std::string_view joint) const {
  for (const auto& t : rotation_tracks) {
    if (t.joint_name == joint) return &t;
  }
  return nullptr;
}

std::size_t Clip::key_count() const {
  std::size_t n = root_motion.size();
  for (const auto& t : rotation_tracks) n += t.keys.size();
  for (const auto& t : translation_tracks) n += t.keys.size();
  return n;
}

std::size_t ValidationReport::error_count() const {
  return static_cast<std::size_t>(std::count_if(
      issues.begin(), issues.end(), [](const ValidationIssue& i) { return i.severity == Severity::error; }));
}

std::vector<std::string> ValidationReport::error_messages() const {
  std::vector<std::string> out;
  for (const auto& i : issues) {
    if (i.severity == Severity::error) out.push_back(i.code + ": " + i.message);
  }
  return out;
}

ValidationReport validate_against(const Clip& clip, const Skeleton& skeleton) {
  ValidationReport report;
  const JointTable& table = skeleton.table();
  auto error = [&](const std::string& code, const std::string& joint, const std::string& msg) {
    report.issues.push_back({Severity::error, code, joint, msg});
  };

  if (!std::isfinite(clip.duration) || clip.duration <= 0.0) {
    error("InvalidDuration", "", "duration must be positive, got " + format_shortest(clip.duration));
  }
  if (clip.rotation_tracks.empty() && clip.root_motion.empty() && clip.translation_tracks.empty()) {
    error("EmptyClip", "", "clip has no tracks");
  }

  std::unordered_set<std::string> seen;
  for (const auto& track : clip.rotation_tracks) {
    const std::string& joint = track.joint_name;
    if (!seen.insert(joint).second) {
      error("DuplicateTrack", joint, "more than one rotation track for '" + joint + "'");
      continue;
    }
    const auto index = table.index_of(joint);
    if (!index) error("UnknownJoint", joint, "joint '" + joint + "' is not in " + skeleton.object_name());
    if (track.keys.empty()) {
      error("EmptyTrack", joint, "track '" + joint + "' has no keys");
      continue;
    }
    report.tracked_joints.insert(joint);
    check_times(track.keys, clip.duration, joint, report);

    bool moving = false;
    for (std::size_t i = 0; i < track.keys.size(); ++i) {
      const Quaternion& q = track.keys[i].rotation;
      if (!q.finite()) {
        error("NonFiniteValue", joint, "track '" + joint + "': non-finite rotation");
        continue;
      }
      const double n = q.norm();
      if (std::abs(n - 1.0) > kRenormTolerance) {
        error("DenormalizedRotation", joint,
              "track '" + joint + "': rotation norm " + format_shortest(n) + " at t=" +
                  format_shortest(track.keys[i].time));
        continue;
      }
      if (i > 0 && dot(track.keys[i - 1].rotation, q) < 0.0) {
        report.issues.push_back({Severity::warning, "HemisphereFlip", joint,
                                 "track '" + joint + "': rotation changes hemisphere at t=" +
                                     format_shortest(track.keys[i].time) +
                                     "; check the intended direction"});
      }
      if (index && geodesic_angle(q, table.rest_rotation[*index]) > kMotionEpsilon) moving = true;
    }
    if (!moving && track.keys.size() > 1) {
      for (const auto& k : track.keys) {
        if (k.rotation.finite() && geodesic_angle(k.rotation, track.keys.front().rotation) > kMotionEpsilon) {
          moving = true;
        }
      }
    }
    if (moving) report.moving_joints.insert(joint);
  }

  if (!clip.root_motion.empty()) {
    check_times(clip.root_motion, clip.duration, "", report);
    for (const auto& k : clip.root_motion) {
      if (!k.translation.finite()) {
        error("NonFiniteValue", "", "root motion: non-finite translation");
      } else if (k.translation.length() > kMotionEpsilon) {
        report.moving_joints.insert(table.names.front());
      }
    }
  }

  std::unordered_set<std::string> seen_offsets;
  for (const auto& track : clip.translation_tracks) {
    const std::string& joint = track.joint_name;
    if (!seen_offsets.insert(joint).second) {
      error("DuplicateTrack", joint, "more than one translation track for '" + joint + "'");
      continue;
    }
    if (!table.index_of(joint)) {
      error("UnknownJoint", joint, "joint '" + joint + "' is not in " + skeleton.object_name());
    }
    if (track.keys.empty()) {
      error("EmptyTrack", joint, "translation track '" + joint + "' has no keys");
      continue;
    }
    check_times(track.keys, clip.duration, joint, report);
    for (const auto& k : track.keys) {
      if (!k.translation.finite()) {
        error("NonFiniteValue", joint, "translation track '" + joint + "': non-finite value");
      } else if (k.translation.length() > kMotionEpsilon) {
        report.moving_joints.insert(joint);
      }
    }
  }

  for (const auto& name : table.names) {
    if (!seen.count(name)) {
      report.untracked_joints.push_back(name);
      report.issues.push_back(
          {Severity::info, "UntrackedJoint", name, "joint '" + name + "' holds its rest rotation"});
    }
  }
  return report;
}

Clip normalize(const Clip& clip) {
  Clip out = clip;
  for (auto& track : out.rotation_tracks) {
    for (auto& key : track.keys) {
      if (!key.rotation.finite() || key.rotation.norm() < kDegenerateNorm) {
        throw Error("DegenerateRotation", "track '" + track.joint_name + "': rotation at t=" +
                                              format_shortest(key.time) + " cannot be normalized");
      }
      key.rotation = normalized(key.rotation);
    }
    track.keys = sorted_unique(std::move(track.keys));
    for (std::size_t i = 1; i < track.keys.size(); ++i) {
      if (dot(track.keys[i - 1].rotation, track.keys[i].rotation) < 0.0) {
        track.keys[i].rotation = -track.keys[i].rotation;
      }
    }
  }
  out.root_motion = sorted_unique(std::move(out.root_motion));
  for (auto& track : out.translation_tracks) track.keys = sorted_unique(std::move(track.keys));
  return out;
}

std::string format_report(const ValidationReport& report) {
  std::string out;
  for (const auto& issue : report.issues) {
    switch (issue.severity) {
      case Severity::error: out += "error   "; break;
      case Severity::warning: out += "warning "; break;
      case Severity::info: out += "info    "; break;
    }
    out += issue.code + ": " + issue.message + "\n";
  }
  out += "moving joints:";
  for (const auto& j : report.moving_joints) out += " " + j;
  out += "\n";
  out += std::to_string(report.error_count()) + " error(s)\n";
  return out;
}

namespace {

void append_numbers(std::string& out, std::initializer_list<double> values) {
  out += '[';
  bool first = true;
  for (double v : values) {
    if (!first) out += ',';
    first = false;
    out += round_decimals(v, 6);
  }
  out += ']';
}

template <typename Key>
void append_translation_keys(std::string& out, const std::vector<Key>& keys) {
  out += '[';
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (i > 0) out += ',';
    const Vec3& v = keys[i].translation;
    append_numbers(out, {keys[i].time, v.x, v.y, v.z});
  }
  out += ']';
}

[[noreturn]] void malformed(const std::string& what) { throw Error("MalformedJson", what); }

std::vector<double> numbers(const nlohmann::json& row, std::size_t arity, const char* what) {
  if (!row.is_array() || row.size() != arity) {
    malformed(std::string(what) + " keys need " + std::to_string(arity) + " numbers");
  }
  std::vector<double> out;
  for (const auto& v : row) {
    if (!v.is_number()) malformed(std::string(what) + " keys must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<TranslationKey> read_translation_keys(const nlohmann::json& rows, const char* what) {
  if (!rows.is_array()) malformed(std::string(what) + " must be an array");
  std::vector<TranslationKey> keys;
  for (const auto& row : rows) {
    const auto n = numbers(row, 4, what);
    keys.push_back({n[0], {n[1], n[2], n[3]}});
  }
  return keys;
}

std::string joint_of(const nlohmann::json& track) {
  if (!track.is_object() || !track.contains("joint") || !track["joint"].is_string()) {
    malformed("track needs a string \"joint\"");
  }
  return track["joint"].get<std::string>();
}

}  // namespace

std::string serialize_clip_json(const Clip& clip) {
  std::string out = "{\"name\":" + json_quote(clip.name) + ",\"duration\":" + round_decimals(clip.duration, 6);
  out += ",\"tracks\":[";
  for (std::size_t i = 0; i < clip.rotation_tracks.size(); ++i) {
    const auto& track = clip.rotation_tracks[i];
    if (i > 0) out += ',';
    out += "{\"joint\":" + json_quote(track.joint_name) + ",\"keys\":[";
    for (std::size_t k = 0; k < track.keys.size(); ++k) {
      if (k > 0) out += ',';
      const auto& key = track.keys[k];
      const Quaternion& q = key.rotation;
      append_numbers(out, {key.time, q.x, q.y, q.z, q.w});
    }
    out += "]}";
  }
  out += "],\"root\":";
  append_translation_keys(out, clip.root_motion);
  if (!clip.translation_tracks.empty()) {
    out += ",\"translations\":[";
    for (std::size_t i = 0; i < clip.translation_tracks.size(); ++i) {
      if (i > 0) out += ',';
      const auto& track = clip.translation_tracks[i];
      out += "{\"joint\":" + json_quote(track.joint_name) + ",\"keys\":";
      append_translation_keys(out, track.keys);
      out += '}';
    }
    out += ']';
  }
  out += '}';
  return out;
}

Clip parse_clip_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    malformed(e.what());
  }
  if (!doc.is_object()) malformed("clip JSON must be an object");
  Clip clip;
  if (!doc.contains("name") || !doc["name"].is_string()) malformed("clip needs a string \"name\"");
  if (!doc.contains("duration") || !doc["duration"].is_number()) malformed("clip needs a numeric \"duration\"");
  clip.name = doc["name"].get<std::string>();
  clip.duration = doc["duration"].get<double>();
  if (doc.contains("tracks")) {
    if (!doc["tracks"].is_array()) malformed("\"tracks\" must be an array");
    for (const auto& t : doc["tracks"]) {
      RotationTrack track{joint_of(t), {}};
      if (!t.contains("keys") || !t["keys"].is_array()) malformed("track needs a \"keys\" array");
      for (const auto& row : t["keys"]) {
        const auto n = numbers(row, 5, "rotation");
        track.keys.push_back({n[0], {n[1], n[2], n[3], n[4]}});
      }
      clip.rotation_tracks.push_back(std::move(track));
    }
  }
  if (doc.contains("root")) clip.root_motion = read_translation_keys(doc["root"], "root");
  if (doc.contains("translations")) {
    if (!doc["translations"].is_array()) malformed("\"translations\" must be an array");
    for (const auto& t : doc["translations"]) {
      if (!t.contains("keys")) malformed("translation track needs \"keys\"");
      clip.translation_tracks.push_back({joint_of(t), read_translation_keys(t["keys"], "translation")});
    }
  }
  return clip;
}

}  // namespace rigmotion
