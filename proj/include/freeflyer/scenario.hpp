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

#pragma once

#include <string>
#include <vector>

#include "freeflyer/model.hpp"
#include "freeflyer/state.hpp"
#include "freeflyer/trajectory.hpp"

namespace freeflyer {

/// Everything one experiment needs: the robot, where it starts, the mission
/// maneuver, controller gains, and integrator settings.
struct Scenario {
  RobotModel model;
  SystemState initial_state;

  VecX mission_target;             // rad, mission-arm joints
  std::vector<VecX> mission_vias;  // optional waypoints
  double mission_duration = 0.0;   // s

  PDGains gains;  // over the full joint vector

  double dt = 1e-3;     // s
  double t_end = 0.0;   // s
  bool balance_enabled = true;

  // Provenance stamps filled by the loader (hash of the canonical documents).
  std::string model_hash;
  std::string scenario_hash;

  void validate() const {
    model.validate();
    initial_state.validate_against(model);
    if (!(dt > 0.0)) throw ValidationError("sim.dt", "must be > 0");
    if (!(mission_duration > 0.0)) throw ValidationError("mission.duration", "must be > 0");
    if (!(t_end >= mission_duration))
      throw ValidationError("sim.t_end", "must be >= mission.duration");
    gains.validate(model.dof());
    const int mission = model.mission_arm();
    if (mission_target.size() != model.arm_dof(mission))
      throw ValidationError("mission.target", "must match the mission-arm joint count");
    for (std::size_t i = 0; i < mission_vias.size(); ++i)
      if (mission_vias[i].size() != model.arm_dof(mission))
        throw ValidationError("mission.via[" + std::to_string(i) + "]",
                              "must match the mission-arm joint count");
    if (balance_enabled) {
      const int balance = model.balance_arm();
      if (balance < 0)
        throw ValidationError("sim.balance", "model has no balance arm");
      if (model.arm_dof(balance) < 3)
        throw ValidationError("sim.balance", "balance arm needs at least 3 joints");
    }
  }
};

}  // namespace freeflyer
