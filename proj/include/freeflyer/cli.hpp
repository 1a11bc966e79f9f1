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

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "freeflyer/io.hpp"
#include "freeflyer/simulation.hpp"

namespace freeflyer {

// Exit codes: 0 success, 1 validation/usage error, 2 runtime failure.

namespace cli_detail {

inline void apply_overrides(Scenario& scn, std::optional<double> dt,
                            std::optional<double> t_end, bool no_balance) {
  if (dt) scn.dt = *dt;
  if (t_end) scn.t_end = *t_end;
  if (no_balance) scn.balance_enabled = false;
}

inline void print_matrix(std::ostream& os, const std::string& name, const MatX& m) {
  const Eigen::IOFormat fmt(6, 0, ", ", "\n", "  [", "]");
  os << name << " (" << m.rows() << "x" << m.cols() << "):\n" << m.format(fmt) << "\n";
}

inline int run_simulate(const std::string& scenario_path, const std::string& out_dir,
                        std::optional<double> dt, std::optional<double> t_end,
                        bool no_balance) {
  Scenario scn = load_scenario(scenario_path);
  apply_overrides(scn, dt, t_end, no_balance);
  scn.validate();

  const auto [log, summary] = run_scenario(scn);

  const JointTrajectory mission_traj = plan_ptp_via(
      scn.initial_state.joint_angles.segment(scn.model.arm_offset(scn.model.mission_arm()),
                                             scn.model.arm_dof(scn.model.mission_arm())),
      scn.mission_vias, scn.mission_target, scn.mission_duration, scn.dt);
  const AttitudePrediction pred =
      predict_base_motion(scn.model, scn.initial_state, mission_traj);

  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  emit_csv(log, dir / "log.csv");
  write_text_file(summary_csv_string(summary, log), dir / "summary.csv");
  write_text_file(prediction_csv_string(pred), dir / "prediction.csv");

  std::cout << "wrote " << (dir / "log.csv").string() << " (" << log.rows()
            << " rows), summary.csv, prediction.csv\n";
  std::cout << "max |rpy deviation| [rad]: " << summary.max_rpy_deviation.transpose()
            << "\n";
  std::cout << "max |P| = " << summary.max_linear_momentum
            << " kg m/s, max |L| = " << summary.max_angular_momentum << " kg m^2/s\n";
  std::cout << "balance effectiveness ratio = " << summary.balance_ratio << "\n";
  return 0;
}

inline int run_predict(const std::string& scenario_path, const std::string& out_dir,
                       std::optional<double> dt) {
  Scenario scn = load_scenario(scenario_path);
  if (dt) scn.dt = *dt;
  scn.validate();
  const int mission = scn.model.mission_arm();
  const JointTrajectory traj = plan_ptp_via(
      scn.initial_state.joint_angles.segment(scn.model.arm_offset(mission),
                                             scn.model.arm_dof(mission)),
      scn.mission_vias, scn.mission_target, scn.mission_duration, scn.dt);
  const AttitudePrediction pred = predict_base_motion(scn.model, scn.initial_state, traj);
  const std::string csv = prediction_csv_string(pred);
  if (out_dir.empty()) {
    std::cout << csv;
  } else {
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    write_text_file(csv, dir / "prediction.csv");
    std::cout << "wrote " << (dir / "prediction.csv").string() << " ("
              << pred.times.size() << " rows)\n";
  }
  return 0;
}

inline int run_coupling(const std::string& model_path, const std::string& state_path) {
  const RobotModel model = load_model(model_path);
  const SystemState state = load_state(state_path, model);
  const KinematicsCache cache = forward_kinematics(model, state);
  const MomentumMatrices mm = momentum_matrices(model, state, cache);

  print_matrix(std::cout, "H0", mm.H0);
  print_matrix(std::cout, "Hm", mm.Hm);
  for (int arm = 0; arm < model.arm_count(); ++arm) {
    const CouplingFactors cf = coupling_factors(model, state, cache, mm, arm);
    std::cout << "arm " << arm + 1 << " (" << to_string(model.arms[arm].role) << "):\n";
    print_matrix(std::cout, "  M", cf.M);
    print_matrix(std::cout, "  N", cf.N);
    std::cout << "  cond(M) = " << cf.condition_number << ", damping = " << cf.damping
              << "\n";
  }
  return 0;
}

inline int run_validate(const std::string& path) {
  const json doc = io_detail::parse_file(path);
  if (doc.contains("base") && doc.contains("arms")) {
    model_from_json(doc);
    std::cout << path << ": valid model\n";
  } else if (doc.contains("model") && doc.contains("sim")) {
    load_scenario(path);
    std::cout << path << ": valid scenario\n";
  } else {
    throw ParseError(path + ": neither a model (base/arms) nor a scenario (model/sim)");
  }
  return 0;
}

}  // namespace cli_detail

inline int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Dynamics and balance control for free-floating multi-arm space robots"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = ".", model_path, state_path, validate_path;
  std::optional<double> dt_override, t_end_override;
  bool no_balance = false;

  auto* simulate = app.add_subcommand(
      "simulate", "Run a scenario; writes log.csv, summary.csv, prediction.csv");
  simulate->add_option("scenario", scenario_path, "scenario file")->required();
  simulate->add_option("--out", out_dir, "output directory (default .)");
  simulate->add_flag("--no-balance", no_balance, "disable the balance arm");
  simulate->add_option("--dt", dt_override, "override integrator step [s]");
  simulate->add_option("--t-end", t_end_override, "override run length [s]");

  auto* predict = app.add_subcommand(
      "predict", "Base attitude induced by the mission maneuver alone");
  std::string predict_out;
  predict->add_option("scenario", scenario_path, "scenario file")->required();
  predict->add_option("--out", predict_out, "output directory (default: print to stdout)");
  predict->add_option("--dt", dt_override, "override sample step [s]");

  auto* coupling = app.add_subcommand(
      "coupling", "Print H0, Hm and per-arm coupling factors M, N at a state");
  coupling->add_option("model", model_path, "model file")->required();
  coupling->add_option("state", state_path, "state file")->required();

  auto* validate = app.add_subcommand("validate", "Validate a model or scenario file");
  validate->add_option("file", validate_path, "model or scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (simulate->parsed())
      return cli_detail::run_simulate(scenario_path, out_dir, dt_override, t_end_override,
                                      no_balance);
    if (predict->parsed())
      return cli_detail::run_predict(scenario_path, predict_out, dt_override);
    if (coupling->parsed()) return cli_detail::run_coupling(model_path, state_path);
    if (validate->parsed()) return cli_detail::run_validate(validate_path);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

inline int cli_main(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const std::string& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace freeflyer
