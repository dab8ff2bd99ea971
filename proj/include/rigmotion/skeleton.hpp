#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rigmotion/math.hpp"

namespace rigmotion {

struct Joint {
  std::string name;
  Vec3 rest_translation;  // local offset from the parent
  Quaternion rest_rotation = Quaternion::identity();
  std::vector<Joint> children;
};

// Flattened, pre-order view of a joint tree. parent[i] < i for every
// non-root joint; parent[0] is npos.
struct JointTable {
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::vector<std::string> names;
  std::vector<std::size_t> parent;
  std::vector<Vec3> rest_translation;
  std::vector<Quaternion> rest_rotation;

  std::size_t size() const { return names.size(); }
  std::optional<std::size_t> index_of(std::string_view name) const;
};

// A rigged object: a named, rooted tree of uniquely named joints. Values are
// immutable after construction through parse_object_json or make().
class Skeleton {
 public:
  // Validates and normalizes a hand-built tree. Throws the same errors as
  // parse_object_json.
  static Skeleton make(std::string object_name, Joint root);

  const std::string& object_name() const { return object_name_; }
  const Joint& root() const { return root_; }
  const JointTable& table() const { return table_; }
  std::size_t joint_count() const { return table_.size(); }

  const Joint* find(std::string_view name) const;

 private:
  Skeleton() = default;

  std::string object_name_;
  Joint root_;
  JointTable table_;
};

// Accepts three layouts:
//   {"name": ..., "rest_translation": [x,y,z], "rest_rotation": [x,y,z,w], "children": [...]}
//   {"object": ..., "root": <joint>}
//   {"object": ..., "joints": [{"name": ..., "parent": <name|null>, ...}, ...]}
// Throws Error with code MalformedJson, DuplicateJointName, NotATree or
// DegenerateRotation.
Skeleton parse_object_json(std::string_view text);

// Canonical single-line form: {"object":...,"root":{...}} with joint keys in
// the order name, rest_translation, rest_rotation, children and numbers
// rounded to at most six decimals.
std::string serialize_object_json(const Skeleton& skeleton);

// Pre-order depth-first joint names.
std::vector<std::string> joint_names(const Skeleton& skeleton);

// Structural equality with a numeric tolerance on every field.
bool approx_equal(const Skeleton& a, const Skeleton& b, double tolerance);

}  // namespace rigmotion
