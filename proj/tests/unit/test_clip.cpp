#include <doctest.h>

#include <algorithm>
#include <random>

#include "rigmotion/animstring.hpp"
#include "rigmotion/clip.hpp"
#include "rigmotion/errors.hpp"
#include "rigmotion/kinematics.hpp"
#include "support.hpp"

using namespace rigmotion;

namespace {

std::size_t count_code(const ValidationReport& r, const std::string& code) {
  return static_cast<std::size_t>(
      std::count_if(r.issues.begin(), r.issues.end(), [&](const ValidationIssue& i) { return i.code == code; }));
}

Clip one_track(const std::string& joint, std::vector<RotationKey> keys, double duration = 2.0) {
  Clip c;
  c.name = "T";
  c.duration = duration;
  c.rotation_tracks.push_back({joint, std::move(keys)});
  return c;
}

}  // namespace

TEST_SUITE("clip") {
  TEST_CASE("unknown joint is one error") {
    const Skeleton whale = testsupport::load_skeleton("whale.object.json");
    const ValidationReport r = validate_against(one_track("Tail", {{0, {0, 0, 0, 1}}}), whale);
    CHECK(count_code(r, "UnknownJoint") == 1);
    CHECK(r.error_count() == 1);
    CHECK_FALSE(r.ok());
  }

  TEST_CASE("key past the duration is out of range") {
    const Skeleton whale = testsupport::load_skeleton("whale.object.json");
    const ValidationReport r = validate_against(one_track("Head", {{0, {0, 0, 0, 1}}, {2.5, {0, 0, 0, 1}}}), whale);
    CHECK(count_code(r, "OutOfRangeTime") == 1);
  }

  TEST_CASE("swim fixture validates cleanly") {
    const Skeleton whale = testsupport::load_skeleton("whale.object.json");
    const Clip swim = to_clip(parse_animstring(testsupport::read_text(testsupport::fixture("whale_swim.anim.txt"))));
    const ValidationReport r = validate_against(swim, whale);
    CHECK(r.ok());
    CHECK(r.error_count() == 0);
  }

  TEST_CASE("report flags the remaining problem kinds") {
    const Skeleton whale = testsupport::load_skeleton("whale.object.json");
    Clip c = one_track("Head", {{1.0, {0, 0, 0, 1}}, {0.5, {0, 0, 0, 2}}});
    c.rotation_tracks.push_back({"Spine", {}});
    c.rotation_tracks.push_back({"Head", {{0, {0, 0, 0, 1}}}});
    const ValidationReport r = validate_against(c, whale);
    CHECK(count_code(r, "NonMonotoneTime") == 1);
    CHECK(count_code(r, "DenormalizedRotation") == 1);
    CHECK(count_code(r, "EmptyTrack") == 1);
    CHECK(count_code(r, "DuplicateTrack") == 1);
    CHECK(count_code(r, "UntrackedJoint") == 3);

    Clip bad = one_track("Head", {{0, {0, 0, 0, 1}}}, 0.0);
    CHECK(count_code(validate_against(bad, whale), "InvalidDuration") == 1);
    Clip empty;
    empty.duration = 1.0;
    CHECK(count_code(validate_against(empty, whale), "EmptyClip") == 1);
    bad = one_track("Head", {{0, {0, 0, NAN, 1}}});
    CHECK(count_code(validate_against(bad, whale), "NonFiniteValue") == 1);
  }

  TEST_CASE("zero errors implies every track names a skeleton joint") {
    std::mt19937_64 rng(8);
    const Skeleton whale = testsupport::load_skeleton("whale.object.json");
    for (int i = 0; i < 100; ++i) {
      Clip c = testsupport::random_clip(rng, whale, 6);
      if (rng() % 2) c.rotation_tracks.push_back({"Ghost", {{0, {0, 0, 0, 1}}}});
      const ValidationReport r = validate_against(c, whale);
      if (!r.ok()) continue;
      for (const auto& t : c.rotation_tracks) CHECK(whale.find(t.joint_name) != nullptr);
    }
  }

  TEST_CASE("motion-bearing joints") {
    const Skeleton whale = testsupport::load_skeleton("whale.object.json");
    const Clip tilt =
        to_clip(parse_animstring(testsupport::read_text(testsupport::fixture("whale_head_tilt.anim.txt"))));
    const ValidationReport r = validate_against(tilt, whale);
    CHECK(r.ok());
    CHECK(r.moving_joints == std::set<std::string>{"Head"});
    CHECK(r.tracked_joints.count("Spine") == 1);
  }

  TEST_CASE("normalize renormalizes, sorts and keeps the last duplicate") {
    Clip c = one_track("Head", {{1.0, {0, 0, 0, 2.0}}, {0.5, {0, 0, 0, 1}}, {1.0, {0, 1, 0, 0}}});
    const Clip n = normalize(c);
    const auto& keys = n.rotation_tracks[0].keys;
    REQUIRE(keys.size() == 2);
    CHECK(keys[0].time == 0.5);
    CHECK(keys[1].time == 1.0);
    CHECK(keys[1].rotation.y == 1.0);

    const Clip scaled = normalize(one_track("Head", {{0, {0, 0, 0, 2.0}}}));
    CHECK(scaled.rotation_tracks[0].keys[0].rotation.w == 1.0);
  }

  TEST_CASE("normalize rejects near-zero rotations") {
    CHECK_THROWS_AS(normalize(one_track("Head", {{0, {0, 0, 0, 0.05}}})), Error);
  }

  TEST_CASE("sign continuity keeps the represented motion") {
    const Skeleton whale = testsupport::load_skeleton("whale.object.json");
    const Quaternion q = Quaternion::from_axis_angle({0, 1, 0}, 0.5);
    const Clip c = one_track("Spine", {{0, q}, {1, -q}, {2, q}});
    const Clip n = normalize(c);
    const auto& keys = n.rotation_tracks[0].keys;
    CHECK(dot(keys[0].rotation, keys[1].rotation) >= 0.0);
    CHECK(dot(keys[1].rotation, keys[2].rotation) >= 0.0);
    for (double t : {0.0, 1.0, 2.0}) {
      const WorldPose a = forward_kinematics(whale, sample(c, whale, t));
      const WorldPose b = forward_kinematics(whale, sample(n, whale, t));
      for (std::size_t j = 0; j < a.size(); ++j) {
        const Vec3 d = a.entries[j].second.position - b.entries[j].second.position;
        CHECK(d.length() < 1e-12);
      }
    }
  }

  TEST_CASE("normalize is idempotent and preserves key rotations") {
    std::mt19937_64 rng(9);
    const Skeleton s = testsupport::random_skeleton(rng, 6);
    for (int i = 0; i < 100; ++i) {
      Clip c = testsupport::random_clip(rng, s, 10);
      for (auto& t : c.rotation_tracks) {
        for (auto& k : t.keys) {
          const double f = 0.5 + static_cast<double>(rng() % 100) / 100.0;
          k.rotation = Quaternion{k.rotation.x * f, k.rotation.y * f, k.rotation.z * f, k.rotation.w * f};
        }
      }
      const Clip once = normalize(c);
      const Clip twice = normalize(once);
      CHECK(serialize_clip_json(once) == serialize_clip_json(twice));
      for (std::size_t t = 0; t < c.rotation_tracks.size(); ++t) {
        for (std::size_t k = 0; k < c.rotation_tracks[t].keys.size(); ++k) {
          const Quaternion a = normalized(c.rotation_tracks[t].keys[k].rotation);
          CHECK(std::abs(dot(a, once.rotation_tracks[t].keys[k].rotation)) >= 1 - 1e-6);
        }
      }
    }
  }

  TEST_CASE("clip JSON round trip") {
    const Clip swim = to_clip(parse_animstring(testsupport::read_text(testsupport::fixture("whale_swim.anim.txt"))));
    const std::string json = serialize_clip_json(swim);
    CHECK(serialize_clip_json(parse_clip_json(json)) == json);
    CHECK(json.rfind(R"({"name":"Swim","duration":2,"tracks":[{"joint":"Spine","keys":[[0,)", 0) == 0);

    Clip ext = swim;
    ext.translation_tracks.push_back({"Head", {{0, {0, 0.1, 0}}, {1, {0, 0, 0}}}});
    const Clip back = parse_clip_json(serialize_clip_json(ext));
    REQUIRE(back.translation_tracks.size() == 1);
    CHECK(back.translation_tracks[0].keys[0].translation.y == 0.1);
  }

  TEST_CASE("malformed clip JSON") {
    CHECK_THROWS_AS(parse_clip_json("{"), Error);
    CHECK_THROWS_AS(parse_clip_json(R"({"name":"x","duration":1,"tracks":[{"joint":"a","keys":[[0,1,2]]}]})"), Error);
  }

  TEST_CASE("report text") {
    const Skeleton whale = testsupport::load_skeleton("whale.object.json");
    const std::string text = format_report(validate_against(one_track("Tail", {{0, {0, 0, 0, 1}}}), whale));
    CHECK(text.find("UnknownJoint") != std::string::npos);
    CHECK(text.find("1 error(s)") != std::string::npos);
  }
}
