#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "vidprog/core/params.hpp"
#include "vidprog/core/schemas.hpp"
#include "vidprog/core/state.hpp"
#include "vidprog/dsl/ast.hpp"

namespace vidprog::dynamics {

// A validated DSL program over a schema plus its boxed parameters.
class DynamicsProgram {
 public:
  // Parses and validates; throws ParseError or an Error carrying the first
  // validation diagnostic.
  DynamicsProgram(std::string id, SchemaRef schema, ParamVector params, std::string_view source);
  DynamicsProgram(std::string id, SchemaRef schema, ParamVector params, dsl::Program program);

  const std::string& id() const noexcept { return id_; }
  const StateSchema& schema() const noexcept { return *schema_; }
  const SchemaRef& schema_ref() const noexcept { return schema_; }
  const ParamVector& params() const noexcept { return params_; }
  const dsl::Program& program() const noexcept { return program_; }

  // Canonical DSL text.
  std::string source() const;

  DynamicsProgram with_params(ParamVector params) const;
  DynamicsProgram with_values(const std::vector<double>& values) const;

 private:
  void bind();

  std::string id_;
  SchemaRef schema_;
  ParamVector params_;
  dsl::Program program_;
};

struct Transition {
  State state;
  std::vector<std::size_t> clamped;  // attribute indices
};

// One step. Values outside the attribute bounds are clamped and reported.
Transition step(const DynamicsProgram& prog, const State& s);
State transition(const DynamicsProgram& prog, const State& s);

struct ClampEvent {
  int step = 0;  // index of the produced state
  std::string attribute;
};

struct Rollout {
  Trajectory trajectory;
  std::vector<ClampEvent> clamps;
};

// n+1 states starting at s0. Evaluation errors are rethrown with the step.
Rollout rollout(const DynamicsProgram& prog, const State& s0, int n);

class TemplateRegistry {
 public:
  // Throws invalid-argument on a duplicate id within the env-kind.
  void add(EnvKind env, DynamicsProgram program);

  // Templates for an env-kind in insertion order; throws unsupported-env.
  const std::vector<DynamicsProgram>& lookup(EnvKind env) const;
  const DynamicsProgram& get(EnvKind env, std::string_view id) const;
  bool contains(EnvKind env, std::string_view id) const;

 private:
  std::map<EnvKind, std::vector<DynamicsProgram>> templates_;
};

inline constexpr std::string_view kDistractorId = "constant-acceleration";

// Program text for the built-in templates, usable on their own.
std::string inertia_source(int balls);
std::string elastic_collision_source();
std::string wall_bounce_source();
std::string cartpole_euler_source();
std::string constant_acceleration_source(EnvKind env);

DynamicsProgram cartpole_euler_template();
DynamicsProgram elastic_collision_template();

// uniform: uniform-inertia, wall-bounce, constant-acceleration
// collision: elastic-collision-1d, uniform-inertia, constant-acceleration
// cartpole: cartpole-euler, constant-acceleration
const TemplateRegistry& builtin_templates();

// Id of the template whose law generated the env-kind's data.
std::string_view true_template_id(EnvKind env);

}  // namespace vidprog::dynamics
