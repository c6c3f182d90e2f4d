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

// mrac-scale: run adaptive control scenarios and check learning-rate scaling.
//
// Exit codes: 0 ok/pass, 1 validation or check failure, 2 diverged,
// 3 I/O error, 4 usage error.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "mrac/artifacts.hpp"
#include "mrac/mrac.hpp"
#include "mrac/scenario_io.hpp"

namespace {

enum Exit : int { kOk = 0, kFail = 1, kDiverged = 2, kIo = 3, kUsage = 4 };

namespace fs = std::filesystem;

unsigned workers_from_env() {
  if (const char* env = std::getenv("MRAC_WORKERS")) {
    try {
      const int w = std::stoi(env);
      if (w > 0) return static_cast<unsigned>(w);
    } catch (const std::exception&) {
    }
    std::cerr << "ignoring invalid MRAC_WORKERS='" << env << "'\n";
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Loads and parses; on failure prints the reason and sets `code`.
std::optional<mrac::ScenarioConfig> load(const std::string& path, int& code) {
  try {
    return mrac::load_scenario(path);
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << '\n';
    code = kIo;
  } catch (const mrac::Error& e) {
    std::cerr << path << ": " << e.what() << '\n';
    code = kFail;
  }
  return std::nullopt;
}

bool ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    std::cerr << "error: cannot create output directory '" << dir << "': " << ec.message() << '\n';
    return false;
  }
  return true;
}

bool write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  out.close();
  if (!out) {
    std::cerr << "error: cannot write '" << path.string() << "'\n";
    return false;
  }
  return true;
}

int cmd_validate(const std::string& path) {
  int code = kOk;
  const auto cfg = load(path, code);
  if (!cfg) return code;
  const auto violations = mrac::validate_scenario(*cfg);
  std::cout << mrac::format_violations(violations);
  if (mrac::has_errors(violations)) {
    std::cout << path << ": invalid\n";
    return kFail;
  }
  std::cout << path << ": ok (" << mrac::law_name(cfg->law) << ", "
            << mrac::architecture_name(cfg->architecture) << ")\n";
  return kOk;
}

int cmd_run(const std::string& path, const std::string& out_dir) {
  int code = kOk;
  const auto cfg = load(path, code);
  if (!cfg) return code;
  const auto violations = mrac::validate_scenario(*cfg);
  if (mrac::has_errors(violations)) {
    std::cerr << mrac::format_violations(violations);
    return kFail;
  }
  std::vector<mrac::Violation> warnings;
  for (const auto& v : violations) {
    std::cerr << "warning [" << v.module << "] " << v.message << '\n';
    warnings.push_back(v);
  }
  if (!ensure_dir(out_dir)) return kIo;

  const mrac::CompiledScenario scn = mrac::compile(*cfg);
  mrac::Trajectory traj;
  try {
    traj = mrac::integrate(scn);
  } catch (const mrac::Error& e) {
    if (e.code() != mrac::ErrorCode::kDiverged) throw;
    std::cerr << e.what() << '\n';
    nlohmann::json j = {{"tool", mrac::kToolName},
                        {"version", mrac::kToolVersion},
                        {"command", "run"},
                        {"status", "diverged"},
                        {"reason", e.what()},
                        {"scenario", cfg->name},
                        {"config", mrac::serialize_scenario(*cfg)}};
    if (!write_file(fs::path(out_dir) / "report.json", j.dump(2) + "\n")) return kIo;
    return kDiverged;
  }

  std::ostringstream csv;
  mrac::write_trajectory_csv(csv, scn, traj);
  if (!write_file(fs::path(out_dir) / "trajectory.csv", csv.str())) return kIo;
  const auto report = mrac::run_report(scn, traj, warnings);
  if (!write_file(fs::path(out_dir) / "report.json", report.dump(2) + "\n")) return kIo;
  std::cout << "wrote " << traj.size() << " rows to " << (fs::path(out_dir) / "trajectory.csv")
            << '\n';
  return kOk;
}

int cmd_check(const std::string& path, const std::vector<double>& alphas, double tolerance,
              const std::string& out_dir) {
  int code = kOk;
  const auto cfg = load(path, code);
  if (!cfg) return code;
  for (const double a : alphas) {
    try {
      mrac::check_alpha(*cfg, a);
    } catch (const mrac::Error& e) {
      std::cerr << "usage error: " << e.what() << '\n';
      return kUsage;
    }
  }
  if (!(tolerance > 0.0)) {
    std::cerr << "usage error: --tolerance must be positive\n";
    return kUsage;
  }
  const auto violations = mrac::validate_scenario(*cfg);
  if (mrac::has_errors(violations)) {
    std::cerr << mrac::format_violations(violations);
    return kFail;
  }
  if (!ensure_dir(out_dir)) return kIo;

  mrac::ScalabilityOptions options;
  options.workers = workers_from_env();
  mrac::ScalabilityReport report;
  try {
    report = mrac::run_scalability_check(*cfg, alphas, tolerance, options);
  } catch (const mrac::Error& e) {
    if (e.code() != mrac::ErrorCode::kDiverged) throw;
    std::cerr << "nominal run " << e.what() << '\n';
    return kDiverged;
  }

  std::ostringstream csv;
  mrac::write_scalability_csv(csv, report);
  if (!write_file(fs::path(out_dir) / "scalability.csv", csv.str())) return kIo;
  const auto json = mrac::scalability_report_json(report, *cfg);
  if (!write_file(fs::path(out_dir) / "scalability_report.json", json.dump(2) + "\n")) {
    return kIo;
  }

  std::cout << report.scenario << " (" << report.law << ", " << report.architecture
            << "), tolerance " << report.tolerance << '\n';
  std::cout << std::setw(8) << "alpha" << std::setw(14) << "state" << std::setw(14) << "weight"
            << std::setw(14) << "input" << "  result\n";
  for (const auto& e : report.entries) {
    std::cout << std::setw(8) << e.alpha << std::scientific << std::setprecision(3)
              << std::setw(14) << e.state_deviation << std::setw(14) << e.weight_deviation
              << std::setw(14) << e.input_deviation << std::defaultfloat << std::setprecision(6)
              << "  " << (e.pass ? "PASS" : "FAIL");
    if (!e.failure.empty()) std::cout << " (" << e.failure << ")";
    std::cout << '\n';
  }
  std::cout << (report.pass() ? "PASS" : "FAIL") << '\n';
  return report.pass() ? kOk : kFail;
}

int cmd_list_architectures() {
  std::cout << "adaptive laws:\n"
               "  standard      Gamma omega e^T P B\n"
               "  sigma         ... - sigma W_hat\n"
               "  emod          ... - sigma_e |e| W_hat        (scaling requires alpha > 0)\n"
               "  freq_limited  ... - sigma (W_hat - W_f), W_f' = Gamma_f (W_hat - W_f)\n"
               "architectures:\n"
               "  plain         x_r' = A_r x_r + B_r c\n"
               "  clrm          x_r' = A_r x_r + B_r c + L e    (standard law)\n"
               "  governor      c = c_D + c_g from xi' = -lambda xi + lambda e (standard law, l == m)\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model reference adaptive control simulator and scalability checker"};
  app.set_version_flag("--version", std::string(mrac::kToolName) + " " + mrac::kToolVersion);
  app.require_subcommand(1);

  std::string file;
  std::string out_dir = "out";
  std::vector<double> alphas;
  double tolerance = mrac::kDefaultScalabilityTolerance;

  auto* validate = app.add_subcommand("validate", "Check a scenario file against every invariant");
  validate->add_option("file", file, "Scenario YAML file")->required();

  auto* run = app.add_subcommand("run", "Simulate a scenario and write trajectory.csv/report.json");
  run->add_option("file", file, "Scenario YAML file")->required();
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();

  auto* check = app.add_subcommand("check-scalability",
                                   "Compare alpha-scaled runs against the nominal run");
  check->add_option("file", file, "Scenario YAML file")->required();
  check->add_option("--alpha", alphas, "Scaling factors")->required()->expected(1, -1);
  check->add_option("--tolerance", tolerance, "Relative deviation tolerance")
      ->capture_default_str();
  check->add_option("--out", out_dir, "Output directory")->capture_default_str();

  auto* list = app.add_subcommand("list-architectures", "List adaptive laws and architectures");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(file);
    if (run->parsed()) return cmd_run(file, out_dir);
    if (check->parsed()) return cmd_check(file, alphas, tolerance, out_dir);
    if (list->parsed()) return cmd_list_architectures();
  } catch (const mrac::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFail;
  }
  return kUsage;
}
