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

/// \file scenario_io.hpp
/// YAML scenario files: parsing with line-numbered diagnostics and a
/// serializer whose output parses back to an identical ScenarioConfig.
///
/// Layout (matrices are row-major nested sequences):
///
///   name: benchmark-standard
///   plant:        {A, B, Lambda, allow_full_lambda?}
///   uncertainty:  {W_x, W_c, w_kappa, kappa}
///   reference:    {A_r, B_r, x_r0, L?}          # L only with architecture clrm
///   gains:        {Q: identity | matrix, K_x?, K_c?}
///   law:          {type: standard|sigma|emod|freq_limited, gamma, sigma?, sigma_e?,
///                  gamma_f?, gamma_f_max?}      # gamma/gamma_f: scalar or matrix
///   architecture: {type: plain|clrm|governor, lambda?}
///   command:      [{type: step|ramp|sine, ...}, ...]
///   sim:          {dt, duration, divergence_bound?}
///   initial:      {x0, W_hat0: zero | matrix, W_hat_f0?}

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include "mrac/format.hpp"
#include "mrac/scenario.hpp"

namespace mrac {

namespace yaml_detail {

[[noreturn]] inline void fail(const YAML::Node& node, const std::string& field,
                              const std::string& msg) {
  std::string where;
  if (node.IsDefined() && node.Mark().line >= 0) {
    where = "line " + std::to_string(node.Mark().line + 1) + ", ";
  }
  throw Error(ErrorCode::kParse, where + "field '" + field + "': " + msg);
}

inline void check_keys(const YAML::Node& map, const std::string& field,
                       std::initializer_list<std::string_view> allowed) {
  if (!map.IsMap()) fail(map, field, "expected a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    bool ok = false;
    for (const auto a : allowed) ok = ok || key == a;
    if (!ok) fail(kv.first, field + "." + key, "unknown key");
  }
}

inline YAML::Node require(const YAML::Node& map, const std::string& parent, const char* key) {
  const YAML::Node n = map[key];
  if (!n.IsDefined() || n.IsNull()) {
    fail(map, parent.empty() ? std::string(key) : parent + "." + key, "missing required field");
  }
  return n;
}

inline double to_double(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) fail(node, field, "expected a number");
  std::string text = node.Scalar();
  if (!text.empty() && text.front() == '+') text.erase(0, 1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    fail(node, field, "'" + node.Scalar() + "' is not a number");
  }
  return v;
}

inline bool to_bool(const YAML::Node& node, const std::string& field) {
  try {
    return node.as<bool>();
  } catch (const YAML::Exception&) {
    fail(node, field, "expected true or false");
  }
}

inline std::string to_string(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) fail(node, field, "expected a string");
  return node.Scalar();
}

inline Matrix to_matrix(const YAML::Node& node, const std::string& field) {
  if (!node.IsSequence() || node.size() == 0) fail(node, field, "expected a nested sequence");
  const auto rows = static_cast<Eigen::Index>(node.size());
  Eigen::Index cols = -1;
  Matrix m;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const YAML::Node row = node[static_cast<std::size_t>(i)];
    if (!row.IsSequence() || row.size() == 0) {
      fail(row, field, "row " + std::to_string(i) + " is not a non-empty sequence");
    }
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      m.resize(rows, cols);
    } else if (static_cast<Eigen::Index>(row.size()) != cols) {
      fail(row, field, "row " + std::to_string(i) + " has " + std::to_string(row.size()) +
                           " entries, expected " + std::to_string(cols));
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = to_double(row[static_cast<std::size_t>(j)], field);
    }
  }
  return m;
}

inline Vector to_vector(const YAML::Node& node, const std::string& field) {
  if (!node.IsSequence() || node.size() == 0) fail(node, field, "expected a sequence");
  Vector v(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = to_double(node[i], field);
  }
  return v;
}

/// Scalar s expands to s * I(dim); "identity" to I(dim); otherwise a matrix.
inline Matrix to_square_gain(const YAML::Node& node, const std::string& field, Eigen::Index dim) {
  if (node.IsScalar()) {
    if (node.Scalar() == "identity") return Matrix::Identity(dim, dim);
    return to_double(node, field) * Matrix::Identity(dim, dim);
  }
  return to_matrix(node, field);
}

inline CommandPrimitive to_primitive(const YAML::Node& node, const std::string& field) {
  if (!node.IsMap()) fail(node, field, "expected a mapping");
  const std::string type = to_string(require(node, field, "type"), field + ".type");
  if (type == "step") {
    check_keys(node, field, {"type", "t_on", "level"});
    return StepCommand{to_double(require(node, field, "t_on"), field + ".t_on"),
                       to_vector(require(node, field, "level"), field + ".level")};
  }
  if (type == "ramp") {
    check_keys(node, field, {"type", "t0", "t1", "from", "to"});
    return RampCommand{to_double(require(node, field, "t0"), field + ".t0"),
                       to_double(require(node, field, "t1"), field + ".t1"),
                       to_vector(require(node, field, "from"), field + ".from"),
                       to_vector(require(node, field, "to"), field + ".to")};
  }
  if (type == "sine") {
    check_keys(node, field, {"type", "amplitude", "frequency", "phase"});
    SineCommand s;
    s.amplitude = to_vector(require(node, field, "amplitude"), field + ".amplitude");
    s.frequency = to_double(require(node, field, "frequency"), field + ".frequency");
    if (node["phase"]) s.phase = to_double(node["phase"], field + ".phase");
    return s;
  }
  fail(node["type"], field + ".type", "unknown command type '" + type + "'");
}

}  // namespace yaml_detail

inline ScenarioConfig scenario_from_yaml(const YAML::Node& root) {
  using namespace yaml_detail;
  check_keys(root, "<root>", {"name", "plant", "uncertainty", "reference", "gains", "law",
                              "architecture", "command", "sim", "initial"});
  ScenarioConfig s;
  s.name = root["name"] ? to_string(root["name"], "name") : std::string("scenario");

  const YAML::Node plant = require(root, "", "plant");
  check_keys(plant, "plant", {"A", "B", "Lambda", "allow_full_lambda"});
  s.plant.a = to_matrix(require(plant, "plant", "A"), "plant.A");
  s.plant.b = to_matrix(require(plant, "plant", "B"), "plant.B");
  s.plant.lambda_true = to_matrix(require(plant, "plant", "Lambda"), "plant.Lambda");
  if (plant["allow_full_lambda"]) {
    s.plant.allow_full_lambda = to_bool(plant["allow_full_lambda"], "plant.allow_full_lambda");
  }

  const YAML::Node unc = require(root, "", "uncertainty");
  check_keys(unc, "uncertainty", {"W_x", "W_c", "w_kappa", "kappa"});
  s.uncertainty.w_x = to_matrix(require(unc, "uncertainty", "W_x"), "uncertainty.W_x");
  s.uncertainty.w_c = to_matrix(require(unc, "uncertainty", "W_c"), "uncertainty.W_c");
  s.uncertainty.w_kappa = to_vector(require(unc, "uncertainty", "w_kappa"), "uncertainty.w_kappa");
  if (unc["kappa"]) s.uncertainty.kappa = to_double(unc["kappa"], "uncertainty.kappa");

  const YAML::Node ref = require(root, "", "reference");
  check_keys(ref, "reference", {"A_r", "B_r", "x_r0", "L"});
  s.reference.a_r = to_matrix(require(ref, "reference", "A_r"), "reference.A_r");
  s.reference.b_r = to_matrix(require(ref, "reference", "B_r"), "reference.B_r");
  s.reference.x_r0 = to_vector(require(ref, "reference", "x_r0"), "reference.x_r0");

  const Eigen::Index n = s.plant.a.rows();
  const Eigen::Index l = s.reference.b_r.cols();
  const Eigen::Index r = n + l + 1;

  const YAML::Node gains = require(root, "", "gains");
  check_keys(gains, "gains", {"Q", "K_x", "K_c"});
  s.q = to_square_gain(require(gains, "gains", "Q"), "gains.Q", n);
  if (gains["K_x"] || gains["K_c"]) {
    s.gains_override = NominalGains{to_matrix(require(gains, "gains", "K_x"), "gains.K_x"),
                                    to_matrix(require(gains, "gains", "K_c"), "gains.K_c")};
  }

  const YAML::Node law = require(root, "", "law");
  const std::string law_type = to_string(require(law, "law", "type"), "law.type");
  const Matrix gamma = to_square_gain(require(law, "law", "gamma"), "law.gamma", r);
  if (law_type == "standard") {
    check_keys(law, "law", {"type", "gamma"});
    s.law = StandardMrac{gamma};
  } else if (law_type == "sigma") {
    check_keys(law, "law", {"type", "gamma", "sigma"});
    s.law = SigmaMod{gamma, to_double(require(law, "law", "sigma"), "law.sigma")};
  } else if (law_type == "emod") {
    check_keys(law, "law", {"type", "gamma", "sigma_e"});
    s.law = EMod{gamma, to_double(require(law, "law", "sigma_e"), "law.sigma_e")};
  } else if (law_type == "freq_limited") {
    check_keys(law, "law", {"type", "gamma", "sigma", "gamma_f", "gamma_f_max"});
    s.law = FreqLimited{gamma, to_double(require(law, "law", "sigma"), "law.sigma"),
                        to_square_gain(require(law, "law", "gamma_f"), "law.gamma_f", r),
                        to_double(require(law, "law", "gamma_f_max"), "law.gamma_f_max")};
  } else {
    fail(law["type"], "law.type", "unknown law '" + law_type + "'");
  }

  const YAML::Node arch = require(root, "", "architecture");
  check_keys(arch, "architecture", {"type", "lambda"});
  const std::string arch_type = to_string(require(arch, "architecture", "type"), "architecture.type");
  if (arch_type == "plain") {
    s.architecture = PlainReference{};
  } else if (arch_type == "clrm") {
    s.architecture = ClosedLoopReference{to_matrix(require(ref, "reference", "L"), "reference.L")};
  } else if (arch_type == "governor") {
    s.architecture =
        CommandGovernor{to_double(require(arch, "architecture", "lambda"), "architecture.lambda")};
  } else {
    fail(arch["type"], "architecture.type", "unknown architecture '" + arch_type + "'");
  }
  if (arch_type != "clrm" && ref["L"]) {
    fail(ref["L"], "reference.L", "only valid with architecture type clrm");
  }
  if (arch_type != "governor" && arch["lambda"]) {
    fail(arch["lambda"], "architecture.lambda", "only valid with architecture type governor");
  }

  const YAML::Node sim = require(root, "", "sim");
  check_keys(sim, "sim", {"dt", "duration", "divergence_bound"});
  s.sim.dt = to_double(require(sim, "sim", "dt"), "sim.dt");
  s.sim.duration = to_double(require(sim, "sim", "duration"), "sim.duration");
  if (sim["divergence_bound"]) {
    s.sim.divergence_bound = to_double(sim["divergence_bound"], "sim.divergence_bound");
  }

  const YAML::Node cmd = require(root, "", "command");
  if (!cmd.IsSequence()) fail(cmd, "command", "expected a sequence of primitives");
  for (std::size_t i = 0; i < cmd.size(); ++i) {
    s.command.primitives.push_back(to_primitive(cmd[i], "command[" + std::to_string(i) + "]"));
  }
  s.command.duration = s.sim.duration;

  const YAML::Node init = require(root, "", "initial");
  check_keys(init, "initial", {"x0", "W_hat0", "W_hat_f0"});
  s.initial.x0 = to_vector(require(init, "initial", "x0"), "initial.x0");
  const YAML::Node w0 = require(init, "initial", "W_hat0");
  s.initial.w_hat0 = (w0.IsScalar() && w0.Scalar() == "zero")
                         ? Matrix(Matrix::Zero(r, s.plant.b.cols()))
                         : to_matrix(w0, "initial.W_hat0");
  if (init["W_hat_f0"]) s.initial.w_hat_f0 = to_matrix(init["W_hat_f0"], "initial.W_hat_f0");
  return s;
}

inline ScenarioConfig parse_scenario(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorCode::kParse, "line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  return scenario_from_yaml(root);
}

/// Thrown as std::ios_base::failure when the file cannot be read.
inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open scenario file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

namespace yaml_detail {

inline void emit(YAML::Emitter& out, double v) { out << format_double(v); }

inline void emit_vector(YAML::Emitter& out, const Eigen::Ref<const Vector>& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (Eigen::Index i = 0; i < v.size(); ++i) emit(out, v(i));
  out << YAML::EndSeq;
}

inline void emit_matrix(YAML::Emitter& out, const Matrix& m) {
  out << YAML::Flow << YAML::BeginSeq;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << YAML::Flow << YAML::BeginSeq;
    for (Eigen::Index j = 0; j < m.cols(); ++j) emit(out, m(i, j));
    out << YAML::EndSeq;
  }
  out << YAML::EndSeq;
}

}  // namespace yaml_detail

inline std::string serialize_scenario(const ScenarioConfig& s) {
  using namespace yaml_detail;
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << s.name;

  out << YAML::Key << "plant" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "A" << YAML::Value;
  emit_matrix(out, s.plant.a);
  out << YAML::Key << "B" << YAML::Value;
  emit_matrix(out, s.plant.b);
  out << YAML::Key << "Lambda" << YAML::Value;
  emit_matrix(out, s.plant.lambda_true);
  if (s.plant.allow_full_lambda) out << YAML::Key << "allow_full_lambda" << YAML::Value << true;
  out << YAML::EndMap;

  out << YAML::Key << "uncertainty" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "W_x" << YAML::Value;
  emit_matrix(out, s.uncertainty.w_x);
  out << YAML::Key << "W_c" << YAML::Value;
  emit_matrix(out, s.uncertainty.w_c);
  out << YAML::Key << "w_kappa" << YAML::Value;
  emit_vector(out, s.uncertainty.w_kappa.col(0));
  out << YAML::Key << "kappa" << YAML::Value;
  emit(out, s.uncertainty.kappa);
  out << YAML::EndMap;

  out << YAML::Key << "reference" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "A_r" << YAML::Value;
  emit_matrix(out, s.reference.a_r);
  out << YAML::Key << "B_r" << YAML::Value;
  emit_matrix(out, s.reference.b_r);
  out << YAML::Key << "x_r0" << YAML::Value;
  emit_vector(out, s.reference.x_r0);
  if (const auto* clrm = std::get_if<ClosedLoopReference>(&s.architecture)) {
    out << YAML::Key << "L" << YAML::Value;
    emit_matrix(out, clrm->l_feedback);
  }
  out << YAML::EndMap;

  out << YAML::Key << "gains" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "Q" << YAML::Value;
  emit_matrix(out, s.q);
  if (s.gains_override) {
    out << YAML::Key << "K_x" << YAML::Value;
    emit_matrix(out, s.gains_override->k_x);
    out << YAML::Key << "K_c" << YAML::Value;
    emit_matrix(out, s.gains_override->k_c);
  }
  out << YAML::EndMap;

  out << YAML::Key << "law" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "type" << YAML::Value << std::string(law_name(s.law));
  out << YAML::Key << "gamma" << YAML::Value;
  emit_matrix(out, learning_rate(s.law));
  std::visit(
      [&](const auto& law) {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, SigmaMod>) {
          out << YAML::Key << "sigma" << YAML::Value;
          emit(out, law.sigma);
        } else if constexpr (std::is_same_v<T, EMod>) {
          out << YAML::Key << "sigma_e" << YAML::Value;
          emit(out, law.sigma_e);
        } else if constexpr (std::is_same_v<T, FreqLimited>) {
          out << YAML::Key << "sigma" << YAML::Value;
          emit(out, law.sigma);
          out << YAML::Key << "gamma_f" << YAML::Value;
          emit_matrix(out, law.gamma_f);
          out << YAML::Key << "gamma_f_max" << YAML::Value;
          emit(out, law.gamma_f_max);
        }
      },
      s.law);
  out << YAML::EndMap;

  out << YAML::Key << "architecture" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "type" << YAML::Value << std::string(architecture_name(s.architecture));
  if (const auto* gov = std::get_if<CommandGovernor>(&s.architecture)) {
    out << YAML::Key << "lambda" << YAML::Value;
    emit(out, gov->lambda_gov);
  }
  out << YAML::EndMap;

  out << YAML::Key << "command" << YAML::Value << YAML::BeginSeq;
  for (const auto& p : s.command.primitives) {
    out << YAML::Flow << YAML::BeginMap;
    std::visit(
        [&](const auto& c) {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, StepCommand>) {
            out << YAML::Key << "type" << YAML::Value << "step";
            out << YAML::Key << "t_on" << YAML::Value;
            emit(out, c.t_on);
            out << YAML::Key << "level" << YAML::Value;
            emit_vector(out, c.level);
          } else if constexpr (std::is_same_v<T, RampCommand>) {
            out << YAML::Key << "type" << YAML::Value << "ramp";
            out << YAML::Key << "t0" << YAML::Value;
            emit(out, c.t0);
            out << YAML::Key << "t1" << YAML::Value;
            emit(out, c.t1);
            out << YAML::Key << "from" << YAML::Value;
            emit_vector(out, c.from);
            out << YAML::Key << "to" << YAML::Value;
            emit_vector(out, c.to);
          } else {
            out << YAML::Key << "type" << YAML::Value << "sine";
            out << YAML::Key << "amplitude" << YAML::Value;
            emit_vector(out, c.amplitude);
            out << YAML::Key << "frequency" << YAML::Value;
            emit(out, c.frequency);
            out << YAML::Key << "phase" << YAML::Value;
            emit(out, c.phase);
          }
        },
        p);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "sim" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dt" << YAML::Value;
  emit(out, s.sim.dt);
  out << YAML::Key << "duration" << YAML::Value;
  emit(out, s.sim.duration);
  out << YAML::Key << "divergence_bound" << YAML::Value;
  emit(out, s.sim.divergence_bound);
  out << YAML::EndMap;

  out << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "x0" << YAML::Value;
  emit_vector(out, s.initial.x0);
  out << YAML::Key << "W_hat0" << YAML::Value;
  emit_matrix(out, s.initial.w_hat0);
  if (s.initial.w_hat_f0) {
    out << YAML::Key << "W_hat_f0" << YAML::Value;
    emit_matrix(out, *s.initial.w_hat_f0);
  }
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace mrac
