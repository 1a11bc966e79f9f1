// Copyright 2026 The freeflyer Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "support.hpp"

using namespace freeflyer;
using fftest::fixture;

namespace {

nlohmann::json valid_model_doc() {
  return model_to_json(table1_model());
}

std::filesystem::path write_temp(const nlohmann::json& doc, const std::string& name) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << doc.dump(2);
  return path;
}

}  // namespace

TEST_CASE("reference model matches the published parameters") {
  const RobotModel model = table1_model();
  CHECK(model.total_mass() == Catch::Approx(331.0).margin(1e-12));
  CHECK(model.arm_count() == 2);
  CHECK(model.arm_dof(0) == 3);
  CHECK(model.arm_dof(1) == 3);
  CHECK(model.dof() == 6);
  CHECK(model.base.mass == 300.0);
  CHECK((model.base.inertia - 50.0 * Mat3::Identity()).norm() == 0.0);
  CHECK(model.mission_arm() == 0);
  CHECK(model.balance_arm() == 1);

  // Link masses and lengths per arm.
  for (int i = 0; i < 2; ++i) {
    CHECK(model.arms[i].segments[0].link.mass == 5.0);
    CHECK(model.arms[i].segments[1].link.mass == 5.0);
    CHECK(model.arms[i].segments[2].link.mass == 5.5);
    for (int j = 0; j < 3; ++j) CHECK(model.arms[i].segments[j].link.length == 0.5);
  }

  // Cylinder inertias about the centroid, radius 0.04 m, axis along local x.
  const double r = 0.04, L = 0.5;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) {
      const double m = model.arms[i].segments[j].link.mass;
      const Mat3& inertia = model.arms[i].segments[j].link.inertia;
      CHECK(inertia(0, 0) == Catch::Approx(0.5 * m * r * r).epsilon(1e-14));
      CHECK(inertia(1, 1) == Catch::Approx(m * (L * L / 12.0 + r * r / 4.0)).epsilon(1e-14));
      CHECK(inertia(2, 2) == inertia(1, 1));
    }

  CHECK_NOTHROW(model.validate());
}

TEST_CASE("bundled model file equals the programmatic model") {
  const RobotModel loaded = load_model(fixture("table1.model"));
  const RobotModel built = table1_model();
  CHECK(loaded.base.mass == built.base.mass);
  CHECK((loaded.base.inertia - built.base.inertia).norm() == 0.0);
  REQUIRE(loaded.arm_count() == built.arm_count());
  for (int i = 0; i < built.arm_count(); ++i) {
    REQUIRE(loaded.arm_dof(i) == built.arm_dof(i));
    CHECK(loaded.arms[i].role == built.arms[i].role);
    for (int j = 0; j < built.arm_dof(i); ++j) {
      const ArmSegment& a = loaded.arms[i].segments[j];
      const ArmSegment& b = built.arms[i].segments[j];
      CHECK((a.joint.axis - b.joint.axis).norm() == 0.0);
      CHECK((a.joint.mount_offset - b.joint.mount_offset).norm() == 0.0);
      CHECK(a.link.mass == b.link.mass);
      CHECK(a.link.length == b.link.length);
      CHECK((a.link.com_offset - b.link.com_offset).norm() == 0.0);
      CHECK((a.link.inertia - b.link.inertia).norm() == 0.0);
    }
  }
}

TEST_CASE("write/load round-trip is bit exact") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const RobotModel model = (trial == 0) ? table1_model() : fftest::random_model(rng);
    const auto path =
        std::filesystem::temp_directory_path() / ("roundtrip" + std::to_string(trial) + ".model");
    write_model(model, path);
    const RobotModel back = load_model(path);
    CHECK(back.base.mass == model.base.mass);
    CHECK((back.base.inertia - model.base.inertia).cwiseAbs().maxCoeff() == 0.0);
    for (int i = 0; i < model.arm_count(); ++i)
      for (int j = 0; j < model.arm_dof(i); ++j) {
        const ArmSegment& a = back.arms[i].segments[j];
        const ArmSegment& b = model.arms[i].segments[j];
        CHECK((a.joint.axis - b.joint.axis).cwiseAbs().maxCoeff() == 0.0);
        CHECK((a.joint.mount_offset - b.joint.mount_offset).cwiseAbs().maxCoeff() == 0.0);
        CHECK(a.link.mass == b.link.mass);
        CHECK(a.link.length == b.link.length);
        CHECK((a.link.com_offset - b.link.com_offset).cwiseAbs().maxCoeff() == 0.0);
        CHECK((a.link.inertia - b.link.inertia).cwiseAbs().maxCoeff() == 0.0);
      }
    std::filesystem::remove(path);
  }
}

TEST_CASE("zero link mass is rejected with the field named") {
  auto doc = valid_model_doc();
  doc["arms"][0]["links"][1]["mass"] = 0.0;
  const auto path = write_temp(doc, "zero_mass.model");
  try {
    load_model(path);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "arms[0].links[1].mass");
  }
  std::filesystem::remove(path);
}

TEST_CASE("inertia violating the triangle inequality is rejected") {
  auto doc = valid_model_doc();
  doc["arms"][0]["links"][0]["inertia"] = {10.0, 1.0, 1.0};
  const auto path = write_temp(doc, "bad_inertia.model");
  try {
    load_model(path);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "arms[0].links[0].inertia");
    CHECK(std::string(e.what()).find("triangle") != std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST_CASE("degenerate but physical inertias pass (thin rod boundary)") {
  Mat3 rod = Vec3(0.0, 1.0, 1.0).asDiagonal();
  CHECK_NOTHROW(detail::check_inertia(rod, "rod"));
}

TEST_CASE("non-unit joint axis is rejected") {
  auto doc = valid_model_doc();
  doc["arms"][1]["joints"][2]["axis"] = {0.7071, 0.7071, 0.0};
  const auto path = write_temp(doc, "bad_axis.model");
  CHECK_THROWS_AS(load_model(path), ValidationError);
  std::filesystem::remove(path);
}

TEST_CASE("role bookkeeping is enforced") {
  auto doc = valid_model_doc();
  doc["arms"][0]["role"] = "balance";  // two balance arms, no mission
  const auto path = write_temp(doc, "no_mission.model");
  CHECK_THROWS_AS(load_model(path), ValidationError);
  std::filesystem::remove(path);

  auto doc2 = valid_model_doc();
  doc2["arms"][1]["role"] = "mission";  // two mission arms
  const auto path2 = write_temp(doc2, "two_missions.model");
  CHECK_THROWS_AS(load_model(path2), ValidationError);
  std::filesystem::remove(path2);
}

TEST_CASE("mount table must agree with joint-1 offsets") {
  auto doc = valid_model_doc();
  doc["base"]["mounts"][0] = {0.0, 0.25, 0.0};
  const auto path = write_temp(doc, "bad_mount.model");
  CHECK_THROWS_AS(load_model(path), ValidationError);
  std::filesystem::remove(path);
}

TEST_CASE("malformed JSON raises ParseError with the file named") {
  const auto path = std::filesystem::temp_directory_path() / "broken.model";
  std::ofstream(path) << "{ base: nope";
  try {
    load_model(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("broken.model") != std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST_CASE("missing keys raise ParseError naming the path") {
  auto doc = valid_model_doc();
  doc["arms"][0]["links"][0].erase("inertia");
  const auto path = write_temp(doc, "missing_key.model");
  try {
    load_model(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("arms[0].links[0]") != std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST_CASE("full 3x3 inertia form is accepted") {
  auto doc = valid_model_doc();
  doc["base"]["inertia"] = {{50.0, 0.0, 0.0}, {0.0, 50.0, 0.0}, {0.0, 0.0, 50.0}};
  const auto path = write_temp(doc, "full_inertia.model");
  const RobotModel model = load_model(path);
  CHECK((model.base.inertia - 50.0 * Mat3::Identity()).norm() == 0.0);
  std::filesystem::remove(path);
}

TEST_CASE("scenario loader validates and stamps hashes") {
  const Scenario scn = load_scenario(fixture("table1_balance.scenario"));
  CHECK(scn.dt == 0.001);
  CHECK(scn.t_end == 10.0);
  CHECK(scn.balance_enabled);
  CHECK(scn.mission_duration == 5.0);
  CHECK(scn.mission_target.size() == 3);
  CHECK(scn.gains.kp.size() == 6);
  CHECK_FALSE(scn.model_hash.empty());
  CHECK_FALSE(scn.scenario_hash.empty());
  CHECK_NOTHROW(scn.validate());
}

TEST_CASE("scenario invariants are enforced") {
  Scenario scn = load_scenario(fixture("table1_balance.scenario"));
  SECTION("dt must be positive") {
    scn.dt = 0.0;
    CHECK_THROWS_AS(scn.validate(), ValidationError);
  }
  SECTION("t_end must cover the maneuver") {
    scn.t_end = scn.mission_duration - 1.0;
    CHECK_THROWS_AS(scn.validate(), ValidationError);
  }
  SECTION("gains must be non-negative") {
    scn.gains.kp[2] = -1.0;
    CHECK_THROWS_AS(scn.validate(), ValidationError);
  }
  SECTION("target must match the mission arm") {
    scn.mission_target = VecX::Zero(5);
    CHECK_THROWS_AS(scn.validate(), ValidationError);
  }
}
