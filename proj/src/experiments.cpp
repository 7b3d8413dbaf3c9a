// Copyright 2026 The rsoc Authors
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

#include "rsoc/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <boost/math/distributions/binomial.hpp>
#include <openssl/evp.h>
#include <openssl/opensslv.h>
#include <yaml-cpp/yaml.h>

#include "rsoc/analysis.hpp"
#include "rsoc/errors.hpp"
#include "rsoc/parallel.hpp"

#ifndef RSOC_VERSION
#define RSOC_VERSION "unknown"
#endif
#ifndef RSOC_YAML_CPP_VERSION
#define RSOC_YAML_CPP_VERSION "unknown"
#endif

namespace rsoc {

ConfigError::ConfigError(const std::string& message, int line, int column)
    : std::runtime_error(message), line_(line), column_(column) {}

namespace {

namespace fs = std::filesystem;

// Shortest text that reads back to the same double.
std::string Num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string YamlNum(double v) {
  if (std::isnan(v)) return ".nan";
  if (std::isinf(v)) return v > 0 ? ".inf" : "-.inf";
  return Num(v);
}

// ---------------------------------------------------------------------------
// Parsing

// Where dimension-checked entries sit in the source document.
using Marks = std::map<std::string, YAML::Mark>;

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void Fail(const YAML::Mark& mark, const std::string& msg) const {
    if (mark.is_null()) throw ConfigError(source_ + ": " + msg);
    throw ConfigError(source_ + ":" + std::to_string(mark.line + 1) + ":" +
                          std::to_string(mark.column + 1) + ": " + msg,
                      mark.line + 1, mark.column + 1);
  }
  [[noreturn]] void Fail(const YAML::Node& node, const std::string& msg) const {
    Fail(node.Mark(), msg);
  }

  void Map(const YAML::Node& node, const std::string& path,
           std::initializer_list<const char*> keys) const {
    if (!node.IsMap()) Fail(node, path + " must be a mapping");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& kv : node) {
      const std::string key = kv.first.as<std::string>();
      if (!allowed.count(key)) Fail(kv.first, "unknown key " + path + "." + key);
    }
  }

  template <typename T>
  T Scalar(const YAML::Node& node, const std::string& path) const {
    if (!node.IsScalar()) Fail(node, path + " must be a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      Fail(node, path + ": cannot read '" + node.Scalar() + "'");
    }
  }

  template <typename T>
  void Opt(const YAML::Node& map, const char* key, const std::string& path,
           T* out) const {
    if (const YAML::Node n = map[key]) *out = Scalar<T>(n, path + "." + key);
  }

  VectorXd Vector(const YAML::Node& node, const std::string& path) const {
    if (!node.IsSequence()) Fail(node, path + " must be a list of numbers");
    VectorXd v(node.size());
    for (std::size_t i = 0; i < node.size(); ++i) {
      v[i] = Scalar<double>(node[i], path);
    }
    return v;
  }

  MatrixXd Matrix(const YAML::Node& node, const std::string& path) const {
    if (!node.IsSequence() || node.size() == 0) {
      Fail(node, path + " must be a non-empty list of rows");
    }
    const VectorXd first = Vector(node[0], path);
    MatrixXd m(node.size(), first.size());
    for (std::size_t r = 0; r < node.size(); ++r) {
      const VectorXd row = Vector(node[r], path);
      if (row.size() != first.size()) Fail(node[r], path + ": ragged rows");
      m.row(r) = row.transpose();
    }
    return m;
  }

  void OptVector(const YAML::Node& map, const char* key,
                 const std::string& path, VectorXd* out, Marks* marks) const {
    if (const YAML::Node n = map[key]) {
      *out = Vector(n, path + "." + key);
      (*marks)[path + "." + key] = n.Mark();
    }
  }

  void OptMatrix(const YAML::Node& map, const char* key,
                 const std::string& path, MatrixXd* out, Marks* marks) const {
    if (const YAML::Node n = map[key]) {
      *out = Matrix(n, path + "." + key);
      (*marks)[path + "." + key] = n.Mark();
    }
  }

 private:
  std::string source_;
};

void ParseModel(const Reader& rd, const YAML::Node& node, ModelConfig* m,
                Marks* marks) {
  rd.Map(node, "model", {"type", "dt", "A", "B", "C", "params"});
  rd.Opt(node, "type", "model", &m->type);
  (*marks)["model.type"] = node["type"] ? node["type"].Mark() : node.Mark();
  rd.Opt(node, "dt", "model", &m->dt);
  (*marks)["model.dt"] = node["dt"] ? node["dt"].Mark() : node.Mark();
  rd.OptMatrix(node, "A", "model", &m->A, marks);
  rd.OptMatrix(node, "B", "model", &m->B, marks);
  rd.OptMatrix(node, "C", "model", &m->C, marks);
  const YAML::Node p = node["params"];
  if (!p) return;
  (*marks)["model.params"] = p.Mark();
  if (m->type == "pendulum") {
    rd.Map(p, "model.params",
           {"mass", "length", "gravity", "damping", "torque_limit"});
    rd.Opt(p, "mass", "model.params", &m->pendulum.mass);
    rd.Opt(p, "length", "model.params", &m->pendulum.length);
    rd.Opt(p, "gravity", "model.params", &m->pendulum.gravity);
    rd.Opt(p, "damping", "model.params", &m->pendulum.damping);
    rd.Opt(p, "torque_limit", "model.params", &m->pendulum.torque_limit);
  } else if (m->type == "monoped") {
    rd.Map(p, "model.params",
           {"base_mass", "thigh_length", "shank_length", "knee_mass",
            "foot_mass", "gravity", "contact_stabilization"});
    MonopedParams& mp = m->monoped;
    rd.Opt(p, "base_mass", "model.params", &mp.base_mass);
    rd.Opt(p, "thigh_length", "model.params", &mp.thigh_length);
    rd.Opt(p, "shank_length", "model.params", &mp.shank_length);
    rd.Opt(p, "knee_mass", "model.params", &mp.knee_mass);
    rd.Opt(p, "foot_mass", "model.params", &mp.foot_mass);
    rd.Opt(p, "gravity", "model.params", &mp.gravity);
    rd.Opt(p, "contact_stabilization", "model.params",
           &mp.contact_stabilization);
  } else {
    rd.Fail(p, "model.params is not used by model type '" + m->type + "'");
  }
}

void ParseTask(const Reader& rd, const YAML::Node& node, TaskConfig* t,
               Marks* marks) {
  rd.Map(node, "task",
         {"type", "horizon", "x0", "target", "schedule", "landing"});
  rd.Opt(node, "type", "task", &t->type);
  (*marks)["task"] = node.Mark();
  rd.Opt(node, "horizon", "task", &t->horizon);
  rd.OptVector(node, "x0", "task", &t->x0, marks);
  rd.OptVector(node, "target", "task", &t->target, marks);
  if (const YAML::Node s = node["schedule"]) {
    (*marks)["task.schedule"] = s.Mark();
    if (!s.IsSequence()) rd.Fail(s, "task.schedule must be a list of phases");
    for (const YAML::Node& ph : s) {
      rd.Map(ph, "task.schedule[]", {"contacts", "steps"});
      if (!ph["contacts"] || !ph["steps"]) {
        rd.Fail(ph, "task.schedule phases need contacts and steps");
      }
      ContactSet contacts;
      if (!ph["contacts"].IsSequence()) {
        rd.Fail(ph["contacts"], "task.schedule contacts must be a list");
      }
      for (const YAML::Node& c : ph["contacts"]) {
        contacts.push_back(rd.Scalar<int>(c, "task.schedule.contacts"));
      }
      t->schedule.emplace_back(contacts,
                               rd.Scalar<int>(ph["steps"], "task.schedule.steps"));
    }
  }
  if (const YAML::Node l = node["landing"]) {
    (*marks)["task.landing"] = l.Mark();
    rd.Map(l, "task.landing",
           {"stand_height", "flight_time", "stance_time", "settle_time",
            "knee_sign", "seed_kp", "seed_kd"});
    LandingSpec& ls = t->landing;
    rd.Opt(l, "stand_height", "task.landing", &ls.stand_height);
    rd.Opt(l, "flight_time", "task.landing", &ls.flight_time);
    rd.Opt(l, "stance_time", "task.landing", &ls.stance_time);
    rd.Opt(l, "settle_time", "task.landing", &ls.settle_time);
    rd.Opt(l, "knee_sign", "task.landing", &ls.knee_sign);
    rd.Opt(l, "seed_kp", "task.landing", &ls.seed_kp);
    rd.Opt(l, "seed_kd", "task.landing", &ls.seed_kd);
  }
}

void ParseSolver(const Reader& rd, const YAML::Node& node, SolverSettings* s,
                 Marks* marks) {
  rd.Map(node, "solver", {"modes", "sigma", "max_iterations", "tolerance"});
  (*marks)["solver"] = node.Mark();
  if (const YAML::Node modes = node["modes"]) {
    if (!modes.IsSequence() || modes.size() == 0) {
      rd.Fail(modes, "solver.modes must be a non-empty list");
    }
    s->modes.clear();
    for (const YAML::Node& m : modes) {
      const std::string name = rd.Scalar<std::string>(m, "solver.modes");
      try {
        s->modes.push_back(ParseSolverMode(name));
      } catch (const ContractViolation&) {
        rd.Fail(m, "unknown solver '" + name + "' (ddp, risk, risk-meas)");
      }
      if (std::count(s->modes.begin(), s->modes.end(), s->modes.back()) > 1) {
        rd.Fail(m, "solver '" + name + "' listed twice");
      }
    }
  }
  rd.Opt(node, "sigma", "solver", &s->sigma);
  rd.Opt(node, "max_iterations", "solver", &s->max_iterations);
  rd.Opt(node, "tolerance", "solver", &s->tolerance);
}

void ParseNoise(const Reader& rd, const YAML::Node& node, NoiseConfig* n,
                Marks* marks) {
  rd.Map(node, "noise",
         {"omega", "gamma_fs", "gamma_c", "landing_fraction",
          "project_nullspace", "sensor"});
  (*marks)["noise"] = node.Mark();
  rd.OptVector(node, "omega", "noise", &n->omega, marks);
  rd.OptVector(node, "gamma_fs", "noise", &n->gamma_fs, marks);
  rd.OptVector(node, "gamma_c", "noise", &n->gamma_c, marks);
  rd.OptVector(node, "sensor", "noise", &n->sensor, marks);
  rd.Opt(node, "landing_fraction", "noise", &n->landing_fraction);
  rd.Opt(node, "project_nullspace", "noise", &n->project_nullspace);
}

void ParseSim(const Reader& rd, const YAML::Node& node, SimConfig* s,
              Marks* marks) {
  rd.Map(node, "sim",
         {"dt", "stiffness", "damping", "friction", "control_period",
          "sensor_noise"});
  (*marks)["sim"] = node.Mark();
  rd.Opt(node, "dt", "sim", &s->dt);
  rd.Opt(node, "stiffness", "sim", &s->stiffness);
  rd.Opt(node, "damping", "sim", &s->damping);
  rd.Opt(node, "friction", "sim", &s->friction);
  rd.Opt(node, "control_period", "sim", &s->control_period);
  rd.Opt(node, "sensor_noise", "sim", &s->sensor_noise);
}

void ParseTerrain(const Reader& rd, const YAML::Node& node, TerrainConfig* t,
                  Marks* marks) {
  rd.Map(node, "terrain", {"blocks", "sampler"});
  if (const YAML::Node blocks = node["blocks"]) {
    (*marks)["terrain.blocks"] = blocks.Mark();
    if (!blocks.IsSequence()) rd.Fail(blocks, "terrain.blocks must be a list");
    for (const YAML::Node& b : blocks) {
      rd.Map(b, "terrain.blocks[]", {"x_start", "x_end", "height"});
      Block block;
      rd.Opt(b, "x_start", "terrain.blocks[]", &block.x_start);
      rd.Opt(b, "x_end", "terrain.blocks[]", &block.x_end);
      rd.Opt(b, "height", "terrain.blocks[]", &block.height);
      t->blocks.push_back(block);
    }
  }
  if (const YAML::Node s = node["sampler"]) {
    (*marks)["terrain.sampler"] = s.Mark();
    rd.Map(s, "terrain.sampler", {"max_heights", "block_width"});
    if (const YAML::Node h = s["max_heights"]) {
      const VectorXd v = rd.Vector(h, "terrain.sampler.max_heights");
      t->max_heights.assign(v.data(), v.data() + v.size());
    }
    rd.Opt(s, "block_width", "terrain.sampler", &t->block_width);
  }
}

// ---------------------------------------------------------------------------
// Validation

struct Dims {
  int n = 0;  // tangent
  int m = 0;  // control
  int w = 0;  // process noise
  int feet = 0;
};

class Checker {
 public:
  Checker(const Marks& marks, std::string source)
      : marks_(marks), rd_(std::move(source)) {}

  [[noreturn]] void Fail(const std::string& where, const std::string& msg) const {
    // Fall back to the enclosing section when the entry itself is absent.
    std::string key = where;
    for (;;) {
      const auto it = marks_.find(key);
      if (it != marks_.end()) rd_.Fail(it->second, msg);
      const auto dot = key.rfind('.');
      if (dot == std::string::npos) break;
      key = key.substr(0, dot);
    }
    rd_.Fail(YAML::Mark::null_mark(), msg);
  }

  void Size(const std::string& where, const VectorXd& v, int expected,
            const char* what) const {
    if (v.size() != expected) {
      Fail(where, where + " has " + std::to_string(v.size()) +
                      " entries, expected " + std::to_string(expected) + " (" +
                      what + ")");
    }
  }

  void NonNegative(const std::string& where, const VectorXd& v) const {
    if (!v.allFinite() || (v.array() < 0.0).any()) {
      Fail(where, where + " entries must be finite and >= 0");
    }
  }

 private:
  const Marks& marks_;
  Reader rd_;
};

Dims ModelDims(const ModelConfig& m, const Checker& ck) {
  if (!(m.dt > 0.0) || !std::isfinite(m.dt)) ck.Fail("model.dt", "model.dt must be > 0");
  Dims d;
  if (m.type == "linear") {
    if (m.A.size() == 0 || m.B.size() == 0) {
      ck.Fail("model", "linear model needs A and B");
    }
    if (m.A.rows() != m.A.cols()) {
      ck.Fail("model.A", "model.A must be square, got " +
                             std::to_string(m.A.rows()) + "x" +
                             std::to_string(m.A.cols()));
    }
    d.n = static_cast<int>(m.A.rows());
    if (m.B.rows() != d.n) {
      ck.Fail("model.B", "model.B has " + std::to_string(m.B.rows()) +
                             " rows, expected " + std::to_string(d.n) +
                             " (state dimension)");
    }
    d.m = static_cast<int>(m.B.cols());
    d.w = d.n;
    if (m.C.size() != 0) {
      if (m.C.rows() != d.n) {
        ck.Fail("model.C", "model.C has " + std::to_string(m.C.rows()) +
                               " rows, expected " + std::to_string(d.n) +
                               " (state dimension)");
      }
      d.w = static_cast<int>(m.C.cols());
    }
  } else if (m.type == "pendulum") {
    if (m.A.size() || m.B.size() || m.C.size()) {
      ck.Fail("model.A", "A, B, C only apply to the linear model");
    }
    d = {2, 1, 2, 0};
  } else if (m.type == "monoped") {
    if (m.A.size() || m.B.size() || m.C.size()) {
      ck.Fail("model.A", "A, B, C only apply to the linear model");
    }
    d = {8, 2, 8, 1};
  } else {
    ck.Fail("model.type", "unknown model type '" + m.type +
                              "' (linear, pendulum, monoped)");
  }
  return d;
}

std::unique_ptr<Model> MakeModel(const ModelConfig& m) {
  if (m.type == "linear") {
    return std::make_unique<LinearModel>(m.A, m.B, m.dt, m.C);
  }
  if (m.type == "pendulum") return std::make_unique<Pendulum>(m.pendulum, m.dt);
  return MakeMonoped(m.monoped, m.dt);
}

void ValidateConfig(const ExperimentConfig& c, const Checker& ck) {
  const Dims d = ModelDims(c.model, ck);
  std::unique_ptr<Model> model;
  try {
    model = MakeModel(c.model);
  } catch (const std::exception& e) {
    ck.Fail("model.params", std::string("model: ") + e.what());
  }

  const TaskConfig& t = c.task;
  if (t.type == "hold" || t.type == "line") {
    if (t.horizon < 1) ck.Fail("task", "task.horizon must be >= 1");
    ck.Size("task.x0", t.x0, d.n, "state dimension");
    ck.Size("task.target", t.target, d.n, "state dimension");
    if (!t.x0.allFinite() || !t.target.allFinite()) {
      ck.Fail("task", "task states must be finite");
    }
    if (!t.schedule.empty()) {
      int total = 0;
      for (const auto& [contacts, steps] : t.schedule) {
        for (int f : contacts) {
          if (f < 0 || f >= d.feet) {
            ck.Fail("task.schedule", "task.schedule: foot " + std::to_string(f) +
                                         " does not exist (model has " +
                                         std::to_string(d.feet) + ")");
          }
        }
        if (steps < 1) ck.Fail("task.schedule", "task.schedule: steps must be >= 1");
        total += steps;
      }
      if (total != t.horizon) {
        ck.Fail("task.schedule", "task.schedule covers " + std::to_string(total) +
                                     " steps, horizon is " +
                                     std::to_string(t.horizon));
      }
    }
  } else if (t.type == "landing") {
    const auto* chain = dynamic_cast<const ChainModel*>(model.get());
    if (c.model.type != "monoped" || chain == nullptr) {
      ck.Fail("task", "the landing task needs the monoped model");
    }
    if (t.x0.size() || t.target.size() || !t.schedule.empty()) {
      ck.Fail("task", "the landing task derives x0, target and schedule itself");
    }
    try {
      t.landing.Validate(*chain);
    } catch (const ContractViolation& e) {
      ck.Fail("task.landing", std::string("task.landing: ") + e.what());
    }
  } else {
    ck.Fail("task", "unknown task type '" + t.type + "' (hold, line, landing)");
  }

  ck.Size("cost.Q", c.cost.Q, d.n, "state dimension");
  ck.NonNegative("cost.Q", c.cost.Q);
  ck.Size("cost.R", c.cost.R, d.m, "control dimension");
  if (!c.cost.R.allFinite() || !(c.cost.R.array() > 0.0).all()) {
    ck.Fail("cost.R", "cost.R entries must be > 0");
  }
  if (c.cost.Q_terminal.size()) {
    ck.Size("cost.Q_terminal", c.cost.Q_terminal, d.n, "state dimension");
    ck.NonNegative("cost.Q_terminal", c.cost.Q_terminal);
  }
  if (!(c.cost.switch_multiplier > 0.0)) {
    ck.Fail("cost", "cost.switch_multiplier must be > 0");
  }

  const SolverSettings& s = c.solver;
  if (s.modes.empty()) ck.Fail("solver", "solver.modes is empty");
  if (!std::isfinite(s.sigma)) ck.Fail("solver", "solver.sigma must be finite");
  if (s.max_iterations < 1 || !(s.tolerance > 0.0)) {
    ck.Fail("solver", "solver needs max_iterations >= 1 and tolerance > 0");
  }

  const NoiseConfig& n = c.noise;
  if (n.omega.size()) {
    ck.Size("noise.omega", n.omega, d.w, "process noise dimension");
    ck.NonNegative("noise.omega", n.omega);
  }
  if (n.gamma_fs.size()) {
    ck.Size("noise.gamma_fs", n.gamma_fs, d.n, "measurement dimension");
    ck.NonNegative("noise.gamma_fs", n.gamma_fs);
  }
  if (n.gamma_c.size()) {
    ck.Size("noise.gamma_c", n.gamma_c, 4, "per-foot position and velocity");
    ck.NonNegative("noise.gamma_c", n.gamma_c);
  }
  if (n.sensor.size()) {
    ck.Size("noise.sensor", n.sensor, d.n, "measurement dimension");
    ck.NonNegative("noise.sensor", n.sensor);
  }
  if (!(n.landing_fraction >= 0.0 && n.landing_fraction <= 1.0)) {
    ck.Fail("noise", "noise.landing_fraction must lie in [0, 1]");
  }
  const bool meas = std::count(s.modes.begin(), s.modes.end(),
                               SolverMode::kRiskMeasurement) > 0;
  if (meas && (n.gamma_fs.size() == 0 || !(n.gamma_fs.array() > 0.0).all())) {
    ck.Fail("noise.gamma_fs", "risk-meas needs noise.gamma_fs with entries > 0");
  }
  if (c.sim.sensor_noise && n.sensor.size() == 0 && n.gamma_fs.size() == 0) {
    ck.Fail("sim", "sim.sensor_noise needs noise.sensor or noise.gamma_fs");
  }

  SimConfig sim = c.sim;
  sim.sensor_noise = false;
  try {
    sim.Validate();
  } catch (const ContractViolation& e) {
    ck.Fail("sim", e.what());
  }
  const double ticks = c.model.dt / c.sim.control_period;
  if (std::abs(ticks - std::round(ticks)) > 1e-9) {
    ck.Fail("sim", "sim.control_period must divide model.dt");
  }

  try {
    Terrain terrain(c.terrain.blocks);
  } catch (const ContractViolation& e) {
    ck.Fail("terrain.blocks", e.what());
  }
  for (double h : c.terrain.max_heights) {
    if (!(h >= 0.0) || !std::isfinite(h)) {
      ck.Fail("terrain.sampler", "terrain.sampler.max_heights must be >= 0");
    }
  }
  if (!(c.terrain.block_width > 0.0)) {
    ck.Fail("terrain.sampler", "terrain.sampler.block_width must be > 0");
  }

  if (!(c.success.position_tolerance >= 0.0) ||
      !(c.success.velocity_tolerance >= 0.0)) {
    ck.Fail("success", "success tolerances must be >= 0");
  }
  if (c.batch.runs < 1) ck.Fail("batch", "batch.runs must be >= 1");
  if (c.output.empty()) ck.Fail("output", "output must not be empty");
}

// ---------------------------------------------------------------------------
// Emission

void EmitVector(YAML::Emitter& e, const VectorXd& v) {
  e << YAML::Flow << YAML::BeginSeq;
  for (int i = 0; i < v.size(); ++i) e << YamlNum(v[i]);
  e << YAML::EndSeq;
}

void EmitMatrix(YAML::Emitter& e, const MatrixXd& m) {
  e << YAML::BeginSeq;
  for (int r = 0; r < m.rows(); ++r) EmitVector(e, m.row(r).transpose());
  e << YAML::EndSeq;
}

template <typename T>
void KV(YAML::Emitter& e, const char* key, const T& value) {
  e << YAML::Key << key << YAML::Value << value;
}

void KD(YAML::Emitter& e, const char* key, double value) {
  e << YAML::Key << key << YAML::Value << YamlNum(value);
}

void KVec(YAML::Emitter& e, const char* key, const VectorXd& v) {
  e << YAML::Key << key << YAML::Value;
  EmitVector(e, v);
}

// ---------------------------------------------------------------------------
// Running

std::string Hex(const unsigned char* data, unsigned int size) {
  std::ostringstream out;
  out << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < size; ++i) out << std::setw(2) << int(data[i]);
  return out.str();
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Writes files under the output directory and remembers them for the
// manifest.
class OutputDir {
 public:
  explicit OutputDir(fs::path root) : root_(std::move(root)) {
    RemovePrevious();
    fs::create_directories(root_);
  }

  template <typename Fn>
  void Write(const std::string& rel, Fn&& fill) {
    const fs::path path = root_ / rel;
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    fill(out);
    out.close();
    if (!out) throw std::runtime_error("failed writing " + path.string());
    files_.push_back(rel);
  }

  const fs::path& root() const { return root_; }
  const std::vector<std::string>& files() const { return files_; }

 private:
  // Only files a previous manifest claims are removed.
  void RemovePrevious() {
    const fs::path manifest = root_ / "manifest.yaml";
    if (!fs::exists(manifest)) return;
    try {
      const YAML::Node doc = YAML::LoadFile(manifest.string());
      for (const YAML::Node& f : doc["files"]) {
        const fs::path rel = f["path"].as<std::string>();
        if (rel.is_absolute() || rel.string().find("..") != std::string::npos) {
          continue;
        }
        fs::remove(root_ / rel);
      }
    } catch (const YAML::Exception&) {
      return;
    }
    fs::remove(manifest);
  }

  fs::path root_;
  std::vector<std::string> files_;
};

void WriteManifest(OutputDir& dir, const ExperimentConfig& config,
                   const std::string& command) {
  YAML::Emitter e;
  e << YAML::BeginMap;
  KV(e, "command", command);
  KV(e, "name", config.name);
  KV(e, "config_sha256", Sha256Hex(SaveConfig(config)));
  KV(e, "seed", config.batch.seed);
  KV(e, "runs", config.batch.runs);
  e << YAML::Key << "versions" << YAML::Value << YAML::BeginMap;
  KV(e, "rsoc", std::string(RSOC_VERSION));
  KV(e, "eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                     std::to_string(EIGEN_MAJOR_VERSION) + "." +
                     std::to_string(EIGEN_MINOR_VERSION));
  KV(e, "yaml-cpp", std::string(RSOC_YAML_CPP_VERSION));
  KV(e, "openssl", std::string(OPENSSL_VERSION_TEXT));
  KV(e, "compiler", std::string(__VERSION__));
  e << YAML::EndMap;
  e << YAML::Key << "files" << YAML::Value << YAML::BeginSeq;
  for (const std::string& rel : dir.files()) {
    e << YAML::BeginMap;
    KV(e, "path", rel);
    KV(e, "sha256", Sha256Hex(ReadFile(dir.root() / rel)));
    e << YAML::EndMap;
  }
  e << YAML::EndSeq << YAML::EndMap;
  std::ofstream out(dir.root() / "manifest.yaml", std::ios::binary);
  out << e.c_str() << "\n";
  if (!out) throw std::runtime_error("failed writing manifest.yaml");
}

struct Setup {
  ExperimentConfig config;
  Scenario scenario;
  std::vector<SolverRun> runs;
};

// Solves every configured mode. Solves are independent and run
// concurrently; each one is sequential inside.
Setup Prepare(const ExperimentConfig& raw, const RunOptions& options) {
  Setup s;
  s.config = ApplyOverrides(raw, options);
  s.config.Validate();
  SetNumThreads(options.jobs);
  s.scenario = BuildScenario(s.config);
  const int count = static_cast<int>(s.config.solver.modes.size());
  s.runs.resize(count);
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1) num_threads(NumThreads())
  for (int i = 0; i < count; ++i) {
    try {
      s.runs[i] = RunSolver(s.scenario, s.config, s.config.solver.modes[i]);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return s;
}

// Simulator settings with the sensor noise drawn from the noise section.
SimConfig RolloutSim(const ExperimentConfig& c) {
  SimConfig sim = c.sim;
  if (sim.sensor_noise) {
    const VectorXd& d = c.noise.sensor.size() ? c.noise.sensor : c.noise.gamma_fs;
    sim.sensor_cov = d.asDiagonal();
    if (c.noise.omega.size()) sim.process_cov = c.noise.omega.asDiagonal();
  }
  return sim;
}

bool Usable(const SolverRun& run, int horizon) {
  return static_cast<int>(run.result.policy.steps.size()) == horizon &&
         static_cast<int>(run.result.nominal.x.size()) == horizon + 1;
}

RunSummary FailedRow(const SolverRun& run, std::uint64_t seed,
                     double max_height, const Terrain& terrain,
                     const std::string& status) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  RunSummary row;
  row.solver = SolverModeName(run.mode);
  row.seed = seed;
  row.max_height = max_height;
  row.terrain_hash = TerrainHash(terrain);
  row.peak_force = row.terminal_position_error = row.terminal_velocity_error =
      row.peak_kp_norm = row.peak_kd_norm = nan;
  row.iterations = static_cast<int>(run.result.log.size());
  row.status = status;
  return row;
}

// Rollouts for `jobs`; one failing rollout does not sink the others.
std::vector<std::optional<Trace>> RolloutAll(const Model& model,
                                             const SimConfig& sim,
                                             const std::vector<RolloutJob>& jobs) {
  std::vector<std::optional<Trace>> out(jobs.size());
  try {
    std::vector<Trace> traces = RolloutBatch(model, sim, jobs);
    for (std::size_t i = 0; i < jobs.size(); ++i) out[i] = std::move(traces[i]);
    return out;
  } catch (const std::exception&) {
  }
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    try {
      out[i] = Rollout(model, sim, jobs[i].terrain, *jobs[i].plan, jobs[i].seed);
    } catch (const std::exception&) {
      out[i].reset();
    }
  }
  return out;
}

void WriteTiming(OutputDir& dir, const std::vector<SolverRun>& runs) {
  dir.Write("timing.csv", [&](std::ostream& out) {
    out << "solver,solve_wall_time_s\n";
    for (const SolverRun& r : runs) {
      out << SolverModeName(r.mode) << ',' << Num(r.wall_time) << '\n';
    }
  });
}

void WriteSolverLogs(OutputDir& dir, const Setup& s) {
  for (const SolverRun& r : s.runs) {
    const std::string name = SolverModeName(r.mode);
    dir.Write("metrics/" + name + "_iterations.csv",
              [&](std::ostream& out) { WriteIterationLog(out, r.result.log); });
    if (!Usable(r, s.scenario.problem.schedule.horizon())) continue;
    const GainSchedule g =
        GainNorms(r.result.policy, s.scenario.model->space());
    dir.Write("metrics/" + name + "_gains.csv", [&](std::ostream& out) {
      out << "step,time,kp_norm,kd_norm,kp_kd_ratio\n";
      for (std::size_t t = 0; t < g.kp_norm.size(); ++t) {
        out << t << ',' << Num(t * r.plan.dt) << ',' << Num(g.kp_norm[t]) << ','
            << Num(g.kd_norm[t]) << ',' << Num(g.ratio[t]) << '\n';
      }
    });
  }
}

}  // namespace

// ---------------------------------------------------------------------------

void ExperimentConfig::Validate() const {
  ValidateConfig(*this, Checker(Marks{}, "config"));
}

ExperimentConfig ParseConfig(const std::string& text, const std::string& source) {
  const Reader rd(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    rd.Fail(e.mark, e.msg);
  }
  ExperimentConfig c;
  Marks marks;
  if (!root.IsMap()) rd.Fail(root, "config must be a mapping");
  rd.Map(root, "config",
         {"name", "model", "task", "cost", "solver", "noise", "sim", "terrain",
          "success", "batch", "output"});
  rd.Opt(root, "name", "config", &c.name);
  if (root["model"]) ParseModel(rd, root["model"], &c.model, &marks);
  if (root["task"]) ParseTask(rd, root["task"], &c.task, &marks);
  if (const YAML::Node n = root["cost"]) {
    rd.Map(n, "cost", {"Q", "R", "Q_terminal", "switch_multiplier"});
    marks["cost"] = n.Mark();
    rd.OptVector(n, "Q", "cost", &c.cost.Q, &marks);
    rd.OptVector(n, "R", "cost", &c.cost.R, &marks);
    rd.OptVector(n, "Q_terminal", "cost", &c.cost.Q_terminal, &marks);
    rd.Opt(n, "switch_multiplier", "cost", &c.cost.switch_multiplier);
  }
  if (root["solver"]) ParseSolver(rd, root["solver"], &c.solver, &marks);
  if (root["noise"]) ParseNoise(rd, root["noise"], &c.noise, &marks);
  if (root["sim"]) ParseSim(rd, root["sim"], &c.sim, &marks);
  if (root["terrain"]) ParseTerrain(rd, root["terrain"], &c.terrain, &marks);
  if (const YAML::Node n = root["success"]) {
    rd.Map(n, "success",
           {"position_tolerance", "velocity_tolerance", "fall_height"});
    marks["success"] = n.Mark();
    rd.Opt(n, "position_tolerance", "success", &c.success.position_tolerance);
    rd.Opt(n, "velocity_tolerance", "success", &c.success.velocity_tolerance);
    rd.Opt(n, "fall_height", "success", &c.success.fall_height);
  }
  if (const YAML::Node n = root["batch"]) {
    rd.Map(n, "batch", {"runs", "seed"});
    marks["batch"] = n.Mark();
    rd.Opt(n, "runs", "batch", &c.batch.runs);
    rd.Opt(n, "seed", "batch", &c.batch.seed);
  }
  if (const YAML::Node n = root["output"]) {
    marks["output"] = n.Mark();
    c.output = rd.Scalar<std::string>(n, "output");
  }
  ValidateConfig(c, Checker(marks, source));
  return c;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open");
  std::ostringstream text;
  text << in.rdbuf();
  return ParseConfig(text.str(), path);
}

std::string SaveConfig(const ExperimentConfig& c) {
  YAML::Emitter e;
  e << YAML::BeginMap;
  KV(e, "name", c.name);

  e << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  KV(e, "type", c.model.type);
  KD(e, "dt", c.model.dt);
  if (c.model.type == "linear") {
    e << YAML::Key << "A" << YAML::Value;
    EmitMatrix(e, c.model.A);
    e << YAML::Key << "B" << YAML::Value;
    EmitMatrix(e, c.model.B);
    if (c.model.C.size()) {
      e << YAML::Key << "C" << YAML::Value;
      EmitMatrix(e, c.model.C);
    }
  } else if (c.model.type == "pendulum") {
    const PendulumParams& p = c.model.pendulum;
    e << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
    KD(e, "mass", p.mass);
    KD(e, "length", p.length);
    KD(e, "gravity", p.gravity);
    KD(e, "damping", p.damping);
    KD(e, "torque_limit", p.torque_limit);
    e << YAML::EndMap;
  } else if (c.model.type == "monoped") {
    const MonopedParams& p = c.model.monoped;
    e << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
    KD(e, "base_mass", p.base_mass);
    KD(e, "thigh_length", p.thigh_length);
    KD(e, "shank_length", p.shank_length);
    KD(e, "knee_mass", p.knee_mass);
    KD(e, "foot_mass", p.foot_mass);
    KD(e, "gravity", p.gravity);
    KD(e, "contact_stabilization", p.contact_stabilization);
    e << YAML::EndMap;
  }
  e << YAML::EndMap;

  e << YAML::Key << "task" << YAML::Value << YAML::BeginMap;
  KV(e, "type", c.task.type);
  if (c.task.type == "landing") {
    const LandingSpec& l = c.task.landing;
    e << YAML::Key << "landing" << YAML::Value << YAML::BeginMap;
    KD(e, "stand_height", l.stand_height);
    KD(e, "flight_time", l.flight_time);
    KD(e, "stance_time", l.stance_time);
    KD(e, "settle_time", l.settle_time);
    KD(e, "knee_sign", l.knee_sign);
    KD(e, "seed_kp", l.seed_kp);
    KD(e, "seed_kd", l.seed_kd);
    e << YAML::EndMap;
  } else {
    KV(e, "horizon", c.task.horizon);
    KVec(e, "x0", c.task.x0);
    KVec(e, "target", c.task.target);
    if (!c.task.schedule.empty()) {
      e << YAML::Key << "schedule" << YAML::Value << YAML::BeginSeq;
      for (const auto& [contacts, steps] : c.task.schedule) {
        e << YAML::Flow << YAML::BeginMap;
        e << YAML::Key << "contacts" << YAML::Value << YAML::Flow
          << YAML::BeginSeq;
        for (int f : contacts) e << f;
        e << YAML::EndSeq;
        KV(e, "steps", steps);
        e << YAML::EndMap;
      }
      e << YAML::EndSeq;
    }
  }
  e << YAML::EndMap;

  e << YAML::Key << "cost" << YAML::Value << YAML::BeginMap;
  KVec(e, "Q", c.cost.Q);
  KVec(e, "R", c.cost.R);
  if (c.cost.Q_terminal.size()) KVec(e, "Q_terminal", c.cost.Q_terminal);
  KD(e, "switch_multiplier", c.cost.switch_multiplier);
  e << YAML::EndMap;

  e << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "modes" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (SolverMode m : c.solver.modes) e << SolverModeName(m);
  e << YAML::EndSeq;
  KD(e, "sigma", c.solver.sigma);
  KV(e, "max_iterations", c.solver.max_iterations);
  KD(e, "tolerance", c.solver.tolerance);
  e << YAML::EndMap;

  e << YAML::Key << "noise" << YAML::Value << YAML::BeginMap;
  if (c.noise.omega.size()) KVec(e, "omega", c.noise.omega);
  if (c.noise.gamma_fs.size()) KVec(e, "gamma_fs", c.noise.gamma_fs);
  if (c.noise.gamma_c.size()) KVec(e, "gamma_c", c.noise.gamma_c);
  if (c.noise.sensor.size()) KVec(e, "sensor", c.noise.sensor);
  KD(e, "landing_fraction", c.noise.landing_fraction);
  KV(e, "project_nullspace", c.noise.project_nullspace);
  e << YAML::EndMap;

  e << YAML::Key << "sim" << YAML::Value << YAML::BeginMap;
  KD(e, "dt", c.sim.dt);
  KD(e, "stiffness", c.sim.stiffness);
  KD(e, "damping", c.sim.damping);
  KD(e, "friction", c.sim.friction);
  KD(e, "control_period", c.sim.control_period);
  KV(e, "sensor_noise", c.sim.sensor_noise);
  e << YAML::EndMap;

  e << YAML::Key << "terrain" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "blocks" << YAML::Value << YAML::BeginSeq;
  for (const Block& b : c.terrain.blocks) {
    e << YAML::Flow << YAML::BeginMap;
    KD(e, "x_start", b.x_start);
    KD(e, "x_end", b.x_end);
    KD(e, "height", b.height);
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;
  e << YAML::Key << "sampler" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "max_heights" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (double h : c.terrain.max_heights) e << YamlNum(h);
  e << YAML::EndSeq;
  KD(e, "block_width", c.terrain.block_width);
  e << YAML::EndMap << YAML::EndMap;

  e << YAML::Key << "success" << YAML::Value << YAML::BeginMap;
  KD(e, "position_tolerance", c.success.position_tolerance);
  KD(e, "velocity_tolerance", c.success.velocity_tolerance);
  KD(e, "fall_height", c.success.fall_height);
  e << YAML::EndMap;

  e << YAML::Key << "batch" << YAML::Value << YAML::BeginMap;
  KV(e, "runs", c.batch.runs);
  KV(e, "seed", c.batch.seed);
  e << YAML::EndMap;

  KV(e, "output", c.output);
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

std::string Sha256Hex(const std::string& text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int size = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &size, EVP_sha256(),
                 nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  return Hex(digest, size);
}

Scenario BuildScenario(const ExperimentConfig& c) {
  Scenario s;
  s.model = MakeModel(c.model);
  const Model& model = *s.model;
  const int n = model.state_dim();
  if (c.task.type == "landing") {
    s.reference =
        LandingReference(dynamic_cast<const ChainModel&>(model), c.task.landing);
  } else {
    s.reference = c.task.type == "line"
                      ? LineReference(model, c.task.x0, c.task.target, c.task.horizon)
                      : HoldReference(model, c.task.x0, c.task.target, c.task.horizon);
    if (!c.task.schedule.empty()) {
      s.reference.schedule = PhaseSchedule(model.num_feet(), c.task.schedule);
    }
  }
  const Reference& ref = s.reference;
  s.target = ref.x.back();

  std::vector<std::pair<int, double>> touchdowns;
  std::vector<int> switches;
  for (int f = 0; f < model.num_feet(); ++f) {
    for (int t : ref.schedule.Touchdowns(f)) {
      touchdowns.emplace_back(t, model.Foot(ref.x[t], f).position.x());
      switches.push_back(t);
    }
  }
  std::sort(touchdowns.begin(), touchdowns.end());
  for (const auto& td : touchdowns) s.touchdown_x.push_back(td.second);
  std::sort(switches.begin(), switches.end());
  switches.erase(std::unique(switches.begin(), switches.end()), switches.end());

  const MatrixXd Q = c.cost.Q.asDiagonal();
  const MatrixXd Qt = c.cost.Q_terminal.size()
                          ? MatrixXd(c.cost.Q_terminal.asDiagonal())
                          : Q;
  Problem& p = s.problem;
  p.model = s.model.get();
  p.schedule = ref.schedule;
  p.cost = CostSpec::Tracking(model.space(), Q, c.cost.R.asDiagonal(), Qt, ref.x,
                              ref.u, switches, c.cost.switch_multiplier);
  const NoiseConfig& nc = c.noise;
  p.noise.omega = nc.omega.size()
                      ? MatrixXd(nc.omega.asDiagonal())
                      : MatrixXd::Zero(model.noise_dim(), model.noise_dim());
  p.noise.gamma_fs = nc.gamma_fs.size() ? MatrixXd(nc.gamma_fs.asDiagonal())
                                        : MatrixXd::Zero(n, n);
  p.noise.gamma_c = nc.gamma_c.size() ? MatrixXd(nc.gamma_c.asDiagonal())
                                      : MatrixXd::Zero(4, 4);
  p.noise.landing_fraction = nc.landing_fraction;
  p.noise.project_nullspace = nc.project_nullspace;
  p.x0 = ref.x0;
  p.u_seed = ref.u;
  p.x_seed = ref.x;
  p.K_seed = ref.K_seed;
  return s;
}

SolverRun RunSolver(const Scenario& scenario, const ExperimentConfig& config,
                    SolverMode mode) {
  SolverConfig sc;
  sc.mode = mode;
  sc.sigma = mode == SolverMode::kNeutral ? 0.0 : config.solver.sigma;
  sc.max_iterations = config.solver.max_iterations;
  sc.tolerance = config.solver.tolerance;
  SolverRun run;
  run.mode = mode;
  const auto start = std::chrono::steady_clock::now();
  run.result = Solve(scenario.problem, sc);
  run.wall_time = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  run.plan = ClosedLoopPlan{run.result.nominal, run.result.policy,
                            scenario.problem.schedule, scenario.model->dt()};
  return run;
}

RunSummary Summarize(const Scenario& scenario, const ExperimentConfig& config,
                     const SolverRun& run, const Trace& trace,
                     std::uint64_t seed, double max_height,
                     const Terrain& terrain) {
  const Model& model = *scenario.model;
  RunSummary row;
  row.solver = SolverModeName(run.mode);
  row.seed = seed;
  row.max_height = max_height;
  row.terrain_hash = TerrainHash(terrain);
  row.success = Success(trace, model.base(), scenario.target, model.space(),
                        config.success);
  row.diverged = trace.diverged;
  const MetricTable m = Metrics(trace, model.space(), run.plan);
  row.peak_force = m.peak_force;
  const Tangent err = model.space().Difference(trace.x.back(), scenario.target);
  double pos = 0.0, vel = 0.0;
  for (int i : model.base().position) pos += err[i] * err[i];
  for (int i : model.base().velocity) vel += err[i] * err[i];
  row.terminal_position_error = std::sqrt(pos);
  row.terminal_velocity_error = std::sqrt(vel);
  row.peak_kp_norm = *std::max_element(trace.kp_norm.begin(), trace.kp_norm.end());
  row.peak_kd_norm = *std::max_element(trace.kd_norm.begin(), trace.kd_norm.end());
  row.iterations = static_cast<int>(run.result.log.size());
  row.status = SolveStatusName(run.result.status);
  return row;
}

void WriteSummaryCsv(std::ostream& out, const std::vector<RunSummary>& rows) {
  out << "solver,seed,max_height,terrain_hash,success,diverged,peak_force,"
         "terminal_position_error,terminal_velocity_error,peak_kp_norm,"
         "peak_kd_norm,iterations,status\n";
  for (const RunSummary& r : rows) {
    out << r.solver << ',' << r.seed << ',' << Num(r.max_height) << ','
        << r.terrain_hash << ',' << (r.success ? "true" : "false") << ','
        << (r.diverged ? "true" : "false") << ',' << Num(r.peak_force) << ','
        << Num(r.terminal_position_error) << ','
        << Num(r.terminal_velocity_error) << ',' << Num(r.peak_kp_norm) << ','
        << Num(r.peak_kd_norm) << ',' << r.iterations << ',' << r.status
        << '\n';
  }
}

std::uint64_t RunSeed(std::uint64_t master, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master),
                    static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(index)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (std::uint64_t(out[0]) << 32) | out[1];
}

Terrain SampleTerrain(const std::vector<double>& touchdown_x, double width,
                      double max_height, std::uint64_t seed) {
  // Own stream, separate from the sensor noise drawn from the same seed.
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32), 0x74657272u};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> height(0.0, max_height);
  std::vector<Block> blocks;
  for (double x : touchdown_x) {
    const double h = max_height > 0.0 ? height(rng) : 0.0;
    blocks.push_back(Block{x - 0.5 * width, x + 0.5 * width, h});
  }
  return Terrain(std::move(blocks));
}

std::string TerrainHash(const Terrain& terrain) {
  return Sha256Hex(terrain.Fingerprint()).substr(0, 16);
}

double SignTestPValue(int wins, int losses) {
  if (wins < 0 || losses < 0) {
    throw ContractViolation("SignTestPValue: counts must be >= 0");
  }
  if (wins == 0) return 1.0;
  const boost::math::binomial_distribution<double> b(wins + losses, 0.5);
  return boost::math::cdf(boost::math::complement(b, wins - 1));
}

ExperimentConfig ApplyOverrides(ExperimentConfig config,
                                const RunOptions& options) {
  if (options.out_dir) config.output = *options.out_dir;
  if (options.seed) config.batch.seed = *options.seed;
  if (options.solver) config.solver.modes = {*options.solver};
  return config;
}

ExperimentResult RunExperiment(const ExperimentConfig& raw,
                               const RunOptions& options) {
  Setup s = Prepare(raw, options);
  const ExperimentConfig& c = s.config;
  const Scenario& sc = s.scenario;
  const int N = sc.problem.schedule.horizon();
  const Terrain terrain(c.terrain.blocks);
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < c.batch.runs; ++i) seeds.push_back(RunSeed(c.batch.seed, i));

  std::vector<RolloutJob> jobs;
  std::vector<std::pair<int, int>> slots;  // (seed index, solver index)
  for (int i = 0; i < c.batch.runs; ++i) {
    for (std::size_t k = 0; k < s.runs.size(); ++k) {
      if (!Usable(s.runs[k], N)) continue;
      jobs.push_back(RolloutJob{&s.runs[k].plan, terrain, seeds[i]});
      slots.emplace_back(i, static_cast<int>(k));
    }
  }
  std::vector<std::optional<Trace>> traces = RolloutAll(*sc.model, RolloutSim(c), jobs);

  ExperimentResult result;
  OutputDir dir(c.output);
  std::size_t next = 0;
  for (int i = 0; i < c.batch.runs; ++i) {
    for (std::size_t k = 0; k < s.runs.size(); ++k) {
      const SolverRun& run = s.runs[k];
      if (!Usable(run, N)) {
        result.rows.push_back(FailedRow(run, seeds[i], 0.0, terrain,
                                        SolveStatusName(run.result.status)));
        continue;
      }
      const std::optional<Trace>& trace = traces[next++];
      if (!trace) {
        result.rows.push_back(
            FailedRow(run, seeds[i], 0.0, terrain, "rollout-error"));
        continue;
      }
      result.rows.push_back(Summarize(sc, c, run, *trace, seeds[i], 0.0, terrain));
      const std::string stem =
          SolverModeName(run.mode) + "_seed" + std::to_string(seeds[i]) + ".csv";
      dir.Write("traces/" + stem, [&](std::ostream& out) { trace->WriteCsv(out); });
      dir.Write("metrics/" + stem, [&](std::ostream& out) {
        Metrics(*trace, sc.model->space(), run.plan).WriteCsv(out);
      });
    }
  }
  WriteSolverLogs(dir, s);
  dir.Write("summary.csv",
            [&](std::ostream& out) { WriteSummaryCsv(out, result.rows); });
  WriteTiming(dir, s.runs);
  WriteManifest(dir, c, "run");
  result.files = dir.files();
  result.files.push_back("manifest.yaml");
  for (const SolverRun& r : s.runs) {
    result.no_progress |= r.result.status == SolveStatus::kNoProgress;
  }
  return result;
}

ExperimentResult RunMonteCarlo(const ExperimentConfig& raw,
                               const RunOptions& options) {
  if (raw.terrain.max_heights.empty()) {
    throw ConfigError("montecarlo needs terrain.sampler.max_heights");
  }
  Setup s = Prepare(raw, options);
  const ExperimentConfig& c = s.config;
  const Scenario& sc = s.scenario;
  const int N = sc.problem.schedule.horizon();
  const int solvers = static_cast<int>(s.runs.size());
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < c.batch.runs; ++i) seeds.push_back(RunSeed(c.batch.seed, i));

  int baseline = 0;
  for (int k = 0; k < solvers; ++k) {
    if (s.runs[k].mode == SolverMode::kNeutral) baseline = k;
  }

  ExperimentResult result;
  for (double h : c.terrain.max_heights) {
    std::vector<Terrain> terrains;
    for (std::uint64_t seed : seeds) {
      terrains.push_back(SampleTerrain(sc.touchdown_x, c.terrain.block_width, h, seed));
    }
    std::vector<RolloutJob> jobs;
    for (int i = 0; i < c.batch.runs; ++i) {
      for (int k = 0; k < solvers; ++k) {
        if (Usable(s.runs[k], N)) {
          jobs.push_back(RolloutJob{&s.runs[k].plan, terrains[i], seeds[i]});
        }
      }
    }
    std::vector<std::optional<Trace>> traces = RolloutAll(*sc.model, RolloutSim(c), jobs);

    // Deterministic fold in seed order.
    std::vector<SolverAggregate> agg(solvers);
    for (int k = 0; k < solvers; ++k) {
      agg[k].max_height = h;
      agg[k].solver = SolverModeName(s.runs[k].mode);
      if (k != baseline) agg[k].wins = agg[k].losses = 0;
    }
    std::size_t next = 0;
    for (int i = 0; i < c.batch.runs; ++i) {
      std::vector<RunSummary> rows;
      for (int k = 0; k < solvers; ++k) {
        const SolverRun& run = s.runs[k];
        if (!Usable(run, N)) {
          rows.push_back(FailedRow(run, seeds[i], h, terrains[i],
                                   SolveStatusName(run.result.status)));
        } else if (const std::optional<Trace>& trace = traces[next++]) {
          rows.push_back(Summarize(sc, c, run, *trace, seeds[i], h, terrains[i]));
        } else {
          rows.push_back(FailedRow(run, seeds[i], h, terrains[i], "rollout-error"));
        }
      }
      for (int k = 0; k < solvers; ++k) {
        agg[k].runs += 1;
        agg[k].successes += rows[k].success;
        if (k == baseline) continue;
        *agg[k].wins += rows[k].success && !rows[baseline].success;
        *agg[k].losses += !rows[k].success && rows[baseline].success;
      }
      result.rows.insert(result.rows.end(), rows.begin(), rows.end());
    }
    for (int k = 0; k < solvers; ++k) {
      if (k != baseline) agg[k].p_value = SignTestPValue(*agg[k].wins, *agg[k].losses);
      result.aggregate.push_back(agg[k]);
    }
  }

  OutputDir dir(c.output);
  WriteSolverLogs(dir, s);
  dir.Write("summary.csv",
            [&](std::ostream& out) { WriteSummaryCsv(out, result.rows); });
  dir.Write("montecarlo.csv", [&](std::ostream& out) {
    out << "max_height,solver,runs,successes,success_percent,wins,losses,"
           "sign_test_p\n";
    auto opt = [](const auto& v) { return v ? Num(double(*v)) : std::string(); };
    for (const SolverAggregate& a : result.aggregate) {
      out << Num(a.max_height) << ',' << a.solver << ',' << a.runs << ','
          << a.successes << ',' << Num(a.success_percent()) << ','
          << opt(a.wins) << ',' << opt(a.losses) << ',' << opt(a.p_value)
          << '\n';
    }
  });
  WriteTiming(dir, s.runs);
  WriteManifest(dir, c, "montecarlo");
  result.files = dir.files();
  result.files.push_back("manifest.yaml");
  for (const SolverRun& r : s.runs) {
    result.no_progress |= r.result.status == SolveStatus::kNoProgress;
  }
  return result;
}

}  // namespace rsoc
