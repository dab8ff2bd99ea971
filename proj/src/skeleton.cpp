#include "rigmotion/skeleton.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "rigmotion/errors.hpp"
#include "rigmotion/format.hpp"

namespace rigmotion {

using nlohmann::json;

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error("MalformedJson", what); }

Quaternion checked_rotation(const Quaternion& q, const std::string& joint) {
  if (!q.finite()) throw Error("DegenerateRotation", "joint '" + joint + "': non-finite rest rotation");
  const double n = q.norm();
  if (n < 0.5 || n > 1.5) {
    throw Error("DegenerateRotation", "joint '" + joint + "': rest rotation norm " +
                                          format_shortest(n) + " outside [0.5, 1.5]");
  }
  return normalized(q);
}

Vec3 read_vec3(const json& j, const std::string& joint) {
  if (!j.is_array() || j.size() != 3) malformed("joint '" + joint + "': rest_translation must be [x,y,z]");
  for (const auto& v : j) {
    if (!v.is_number()) malformed("joint '" + joint + "': rest_translation must hold numbers");
  }
  const Vec3 v{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  if (!v.finite()) malformed("joint '" + joint + "': non-finite rest_translation");
  return v;
}

Quaternion read_quat(const json& j, const std::string& joint) {
  if (!j.is_array() || j.size() != 4) malformed("joint '" + joint + "': rest_rotation must be [x,y,z,w]");
  for (const auto& v : j) {
    if (!v.is_number()) malformed("joint '" + joint + "': rest_rotation must hold numbers");
  }
  return Quaternion{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

// Fields shared by the nested and flat layouts; children are filled by the caller.
Joint read_joint_fields(const json& j) {
  if (!j.is_object()) malformed("joint entry must be an object");
  const auto name_it = j.find("name");
  if (name_it == j.end() || !name_it->is_string()) malformed("joint entry needs a string \"name\"");
  Joint joint;
  joint.name = name_it->get<std::string>();
  if (joint.name.empty()) malformed("joint name must be nonempty");
  if (const auto it = j.find("rest_translation"); it != j.end() && !it->is_null()) {
    joint.rest_translation = read_vec3(*it, joint.name);
  }
  if (const auto it = j.find("rest_rotation"); it != j.end() && !it->is_null()) {
    joint.rest_rotation = read_quat(*it, joint.name);
  }
  return joint;
}

class NestedReader {
 public:
  Joint read(const json& j) {
    Joint joint = read_joint_fields(j);
    if (const auto prev = seen_.find(joint.name); prev != seen_.end()) {
      // The same node listed twice is a DAG, not a tree; two different nodes
      // sharing a name is a naming clash.
      if (*prev->second == j) {
        throw Error("NotATree", "joint '" + joint.name + "' appears under more than one parent");
      }
      throw Error("DuplicateJointName", "duplicate joint name '" + joint.name + "'");
    }
    seen_.emplace(joint.name, &j);
    if (const auto it = j.find("children"); it != j.end() && !it->is_null()) {
      if (!it->is_array()) malformed("joint '" + joint.name + "': children must be an array");
      for (const auto& child : *it) joint.children.push_back(read(child));
    }
    return joint;
  }

 private:
  std::unordered_map<std::string, const json*> seen_;
};

Joint read_flat(const json& joints) {
  if (!joints.is_array()) malformed("\"joints\" must be an array");
  if (joints.empty()) throw Error("NotATree", "skeleton has no joints");

  std::vector<Joint> nodes;
  std::vector<std::optional<std::string>> parents;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& entry : joints) {
    Joint joint = read_joint_fields(entry);
    std::optional<std::string> parent;
    if (const auto it = entry.find("parent"); it != entry.end() && !it->is_null()) {
      if (!it->is_string()) malformed("joint '" + joint.name + "': parent must be a string or null");
      parent = it->get<std::string>();
    }
    if (!index.emplace(joint.name, nodes.size()).second) {
      throw Error("DuplicateJointName", "duplicate joint name '" + joint.name + "'");
    }
    nodes.push_back(std::move(joint));
    parents.push_back(std::move(parent));
  }

  std::optional<std::size_t> root;
  std::vector<std::vector<std::size_t>> children(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!parents[i]) {
      if (root) throw Error("NotATree", "more than one root joint ('" + nodes[*root].name + "', '" +
                                            nodes[i].name + "')");
      root = i;
      continue;
    }
    const auto it = index.find(*parents[i]);
    if (it == index.end()) {
      throw Error("NotATree", "joint '" + nodes[i].name + "' has unknown parent '" + *parents[i] + "'");
    }
    children[it->second].push_back(i);
  }
  if (!root) throw Error("NotATree", "no root joint (cycle through every joint)");

  std::vector<bool> reached(nodes.size(), false);
  std::function<Joint(std::size_t)> build = [&](std::size_t i) {
    reached[i] = true;
    Joint joint = nodes[i];
    for (std::size_t c : children[i]) joint.children.push_back(build(c));
    return joint;
  };
  Joint tree = build(*root);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!reached[i]) throw Error("NotATree", "joint '" + nodes[i].name + "' is on a cycle");
  }
  return tree;
}

void normalize_rest(Joint& joint) {
  joint.rest_rotation = checked_rotation(joint.rest_rotation, joint.name);
  if (!joint.rest_translation.finite()) {
    malformed("joint '" + joint.name + "': non-finite rest_translation");
  }
  for (auto& child : joint.children) normalize_rest(child);
}

void flatten(const Joint& joint, std::size_t parent, JointTable& table) {
  const std::size_t self = table.names.size();
  table.names.push_back(joint.name);
  table.parent.push_back(parent);
  table.rest_translation.push_back(joint.rest_translation);
  table.rest_rotation.push_back(joint.rest_rotation);
  for (const auto& child : joint.children) flatten(child, self, table);
}

const Joint* find_in(const Joint& joint, std::string_view name) {
  if (joint.name == name) return &joint;
  for (const auto& child : joint.children) {
    if (const Joint* hit = find_in(child, name)) return hit;
  }
  return nullptr;
}

void write_number_array(std::string& out, std::initializer_list<double> values) {
  out += '[';
  bool first = true;
  for (double v : values) {
    if (!first) out += ',';
    first = false;
    out += round_decimals(v, 6);
  }
  out += ']';
}

void write_joint(std::string& out, const Joint& joint) {
  out += "{\"name\":";
  out += json_quote(joint.name);
  out += ",\"rest_translation\":";
  const Vec3& t = joint.rest_translation;
  write_number_array(out, {t.x, t.y, t.z});
  out += ",\"rest_rotation\":";
  const Quaternion& q = joint.rest_rotation;
  write_number_array(out, {q.x, q.y, q.z, q.w});
  out += ",\"children\":[";
  for (std::size_t i = 0; i < joint.children.size(); ++i) {
    if (i > 0) out += ',';
    write_joint(out, joint.children[i]);
  }
  out += "]}";
}

bool joints_close(const Joint& a, const Joint& b, double tol) {
  auto close = [tol](double x, double y) { return std::abs(x - y) <= tol; };
  if (a.name != b.name || a.children.size() != b.children.size()) return false;
  const Vec3 &ta = a.rest_translation, &tb = b.rest_translation;
  const Quaternion &qa = a.rest_rotation, &qb = b.rest_rotation;
  if (!close(ta.x, tb.x) || !close(ta.y, tb.y) || !close(ta.z, tb.z)) return false;
  if (!close(qa.x, qb.x) || !close(qa.y, qb.y) || !close(qa.z, qb.z) || !close(qa.w, qb.w)) return false;
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (!joints_close(a.children[i], b.children[i], tol)) return false;
  }
  return true;
}

}  // namespace

std::optional<std::size_t> JointTable::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  return std::nullopt;
}

Skeleton Skeleton::make(std::string object_name, Joint root) {
  std::unordered_set<std::string> names;
  std::function<void(const Joint&)> check = [&](const Joint& j) {
    if (j.name.empty()) malformed("joint name must be nonempty");
    if (!names.insert(j.name).second) {
      throw Error("DuplicateJointName", "duplicate joint name '" + j.name + "'");
    }
    for (const auto& c : j.children) check(c);
  };
  check(root);
  normalize_rest(root);

  Skeleton s;
  s.object_name_ = std::move(object_name);
  s.root_ = std::move(root);
  flatten(s.root_, JointTable::npos, s.table_);
  return s;
}

const Joint* Skeleton::find(std::string_view name) const { return find_in(root_, name); }

Skeleton parse_object_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    malformed(e.what());
  }
  if (!doc.is_object()) malformed("object JSON must be a JSON object");

  std::string object_name;
  if (const auto it = doc.find("object"); it != doc.end()) {
    if (!it->is_string()) malformed("\"object\" must be a string");
    object_name = it->get<std::string>();
  }

  Joint root;
  if (const auto it = doc.find("joints"); it != doc.end()) {
    root = read_flat(*it);
  } else if (const auto it = doc.find("root"); it != doc.end()) {
    root = NestedReader{}.read(*it);
  } else {
    root = NestedReader{}.read(doc);
  }
  if (object_name.empty()) object_name = root.name;
  return Skeleton::make(std::move(object_name), std::move(root));
}

std::string serialize_object_json(const Skeleton& skeleton) {
  std::string out = "{\"object\":";
  out += json_quote(skeleton.object_name());
  out += ",\"root\":";
  write_joint(out, skeleton.root());
  out += '}';
  return out;
}

std::vector<std::string> joint_names(const Skeleton& skeleton) { return skeleton.table().names; }

bool approx_equal(const Skeleton& a, const Skeleton& b, double tolerance) {
  return a.object_name() == b.object_name() && joints_close(a.root(), b.root(), tolerance);
}

}  // namespace rigmotion
