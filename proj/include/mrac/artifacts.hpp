// Copyright 2026 The mrac-scale Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

/// \file artifacts.hpp
/// CSV and JSON writers for simulation runs and scalability checks.
///
/// Numbers are written in shortest round-trip form so a reader recovers the
/// exact doubles held in memory.

#include <json.hpp>

#include <ostream>
#include <string>
#include <vector>

#include "mrac/closed_loop_sim.hpp"
#include "mrac/format.hpp"
#include "mrac/scalability.hpp"
#include "mrac/scenario_io.hpp"

namespace mrac {

namespace artifact_detail {

inline void indexed(std::vector<std::string>& cols, const std::string& stem, Eigen::Index count) {
  for (Eigen::Index i = 1; i <= count; ++i) cols.push_back(stem + std::to_string(i));
}

/// Column-major vec() naming: W_hat_<row>_<col>.
inline void matrix_cols(std::vector<std::string>& cols, const std::string& stem,
                        Eigen::Index rows, Eigen::Index ncols) {
  for (Eigen::Index j = 1; j <= ncols; ++j) {
    for (Eigen::Index i = 1; i <= rows; ++i) {
      cols.push_back(stem + "_" + std::to_string(i) + "_" + std::to_string(j));
    }
  }
}

inline void put(std::ostream& os, const Matrix& m) {
  for (Eigen::Index k = 0; k < m.size(); ++k) os << ',' << format_double(m.data()[k]);
}

}  // namespace artifact_detail

inline std::vector<std::string> trajectory_columns(const CompiledScenario& scn) {
  using namespace artifact_detail;
  const ScenarioConfig& cfg = scn.config;
  const bool governor = std::holds_alternative<CommandGovernor>(cfg.architecture);
  std::vector<std::string> cols{"t"};
  indexed(cols, "x", cfg.n());
  indexed(cols, "x_r", cfg.n());
  indexed(cols, "e", cfg.n());
  indexed(cols, "u", cfg.m());
  indexed(cols, "u_ad", cfg.m());
  indexed(cols, "c", cfg.l());
  matrix_cols(cols, "W_hat", cfg.regressor_dim(), cfg.m());
  if (needs_filter_state(cfg.law)) matrix_cols(cols, "W_f", cfg.regressor_dim(), cfg.m());
  if (governor) {
    indexed(cols, "xi", cfg.n());
    indexed(cols, "x_rD", cfg.n());
    indexed(cols, "c_g", cfg.m());
  }
  return cols;
}

/// One header line plus one row per recorded step.
inline void write_trajectory_csv(std::ostream& os, const CompiledScenario& scn,
                                 const Trajectory& traj) {
  using artifact_detail::put;
  const auto cols = trajectory_columns(scn);
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const ClosedLoopState& s = traj.states[k];
    os << format_double(traj.times[k]);
    put(os, s.x);
    put(os, s.x_r);
    put(os, traj.e[k]);
    put(os, traj.u[k]);
    put(os, traj.u_ad[k]);
    put(os, traj.c_total[k]);
    put(os, s.w_hat);
    if (s.w_hat_f) put(os, *s.w_hat_f);
    if (s.xi) {
      put(os, *s.xi);
      put(os, *s.x_r_desired);
      put(os, traj.c_governor[k]);
    }
    os << '\n';
  }
}

inline nlohmann::json run_report(const CompiledScenario& scn, const Trajectory& traj,
                                 const std::vector<Violation>& warnings) {
  double max_e = 0.0, max_u = 0.0, max_uad = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    max_e = std::max(max_e, max_abs(traj.e[k]));
    max_u = std::max(max_u, max_abs(traj.u[k]));
    max_uad = std::max(max_uad, max_abs(traj.u_ad[k]));
  }
  nlohmann::json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["command"] = "run";
  j["status"] = "ok";
  j["scenario"] = scn.config.name;
  j["law"] = std::string(law_name(scn.config.law));
  j["architecture"] = std::string(architecture_name(scn.config.architecture));
  j["dt"] = scn.config.sim.dt;
  j["duration"] = scn.config.sim.duration;
  j["rows"] = traj.size();
  j["summary"] = {{"max_abs_tracking_error", max_e},
                  {"final_abs_tracking_error", traj.size() ? max_abs(traj.e.back()) : 0.0},
                  {"max_abs_u", max_u},
                  {"max_abs_u_ad", max_uad}};
  j["warnings"] = nlohmann::json::array();
  for (const auto& w : warnings) j["warnings"].push_back("[" + w.module + "] " + w.message);
  j["config"] = serialize_scenario(scn.config);
  return j;
}

inline void write_scalability_csv(std::ostream& os, const ScalabilityReport& report) {
  os << "alpha,state_deviation,weight_deviation,input_deviation,reference_deviation,"
        "command_deviation,pass,failure\n";
  for (const auto& e : report.entries) {
    os << format_double(e.alpha) << ',' << format_double(e.state_deviation) << ','
       << format_double(e.weight_deviation) << ',' << format_double(e.input_deviation) << ','
       << format_double(e.reference_deviation) << ',' << format_double(e.command_deviation)
       << ',' << (e.pass ? "true" : "false") << ',';
    if (!e.failure.empty()) {
      std::string quoted = e.failure;
      for (std::size_t p = 0; (p = quoted.find('"', p)) != std::string::npos; p += 2) {
        quoted.insert(p, 1, '"');
      }
      os << '"' << quoted << '"';
    }
    os << '\n';
  }
}

inline nlohmann::json scalability_report_json(const ScalabilityReport& report,
                                              const ScenarioConfig& nominal) {
  nlohmann::json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["command"] = "check-scalability";
  j["scenario"] = report.scenario;
  j["law"] = report.law;
  j["architecture"] = report.architecture;
  j["tolerance"] = report.tolerance;
  j["pass"] = report.pass();
  j["entries"] = nlohmann::json::array();
  for (const auto& e : report.entries) {
    nlohmann::json row = {{"alpha", e.alpha},
                          {"state_deviation", e.state_deviation},
                          {"weight_deviation", e.weight_deviation},
                          {"input_deviation", e.input_deviation},
                          {"reference_deviation", e.reference_deviation},
                          {"command_deviation", e.command_deviation},
                          {"pass", e.pass}};
    if (!e.failure.empty()) row["failure"] = e.failure;
    j["entries"].push_back(row);
  }
  j["config"] = serialize_scenario(nominal);
  return j;
}

}  // namespace mrac
