#include "vidprog/dynamics/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vidprog/core/error.hpp"
#include "vidprog/dsl/interpreter.hpp"
#include "vidprog/dsl/parser.hpp"
#include "vidprog/dsl/printer.hpp"
#include "vidprog/dsl/validate.hpp"

namespace vidprog::dynamics {

DynamicsProgram::DynamicsProgram(std::string id, SchemaRef schema, ParamVector params,
                                 std::string_view source)
    : DynamicsProgram(std::move(id), std::move(schema), std::move(params), dsl::parse(source)) {}

DynamicsProgram::DynamicsProgram(std::string id, SchemaRef schema, ParamVector params,
                                 dsl::Program program)
    : id_(std::move(id)),
      schema_(std::move(schema)),
      params_(std::move(params)),
      program_(std::move(program)) {
  const bool id_ok = !id_.empty() && std::all_of(id_.begin(), id_.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
  });
  if (!id_ok) {
    fail(ErrorCode::invalid_argument, "bad program id '" + id_ + "'");
  }
  if (!schema_) fail(ErrorCode::invalid_argument, "program '" + id_ + "' has no schema");
  const auto result = dsl::validate(program_, *schema_, params_);
  if (!result.ok()) {
    fail(result.errors.front().code, "program '" + id_ + "': " + result.summary());
  }
  bind();
}

void DynamicsProgram::bind() {
  const std::size_t n = schema_->size();
  dsl::bind_slots(
      program_,
      [&](std::string_view name) -> int {
        if (auto i = schema_->index_of(name)) return static_cast<int>(*i);
        if (auto j = params_.index_of(name)) return static_cast<int>(n + *j);
        return -1;
      },
      [&](std::string_view name) -> int {
        if (auto i = schema_->index_of(name)) return static_cast<int>(*i);
        return -1;
      });
}

std::string DynamicsProgram::source() const { return dsl::print(program_); }

DynamicsProgram DynamicsProgram::with_params(ParamVector params) const {
  if (params.size() != params_.size()) {
    fail(ErrorCode::shape_mismatch, "parameter count differs for '" + id_ + "'");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].name != params_[i].name) {
      fail(ErrorCode::shape_mismatch, "parameter '" + params[i].name + "' not in '" + id_ + "'");
    }
  }
  DynamicsProgram copy = *this;
  copy.params_ = std::move(params);
  return copy;
}

DynamicsProgram DynamicsProgram::with_values(const std::vector<double>& values) const {
  return with_params(params_.with_values(values));
}

Transition step(const DynamicsProgram& prog, const State& s) {
  const auto& schema = prog.schema();
  if (!same_schema(s.schema_ref(), prog.schema_ref())) {
    fail(ErrorCode::schema_mismatch, "state schema '" + s.schema().env_id() +
                                         "' does not match program '" + prog.id() + "'");
  }
  const std::size_t n = schema.size();
  const auto& params = prog.params();
  std::vector<double> slots(n + params.size());
  std::copy(s.values().begin(), s.values().end(), slots.begin());
  for (std::size_t j = 0; j < params.size(); ++j) slots[n + j] = params[j].value;

  const auto& program = prog.program();
  std::vector<double> next(s.values().begin(), s.values().end());
  std::vector<char> assigned(n, 0);
  auto apply = [&](const std::vector<dsl::Update>& updates) {
    for (const auto& u : updates) {
      const auto i = static_cast<std::size_t>(u.slot);
      if (assigned[i]) continue;
      next[i] = dsl::eval_slots(u.value, slots);
      assigned[i] = 1;
    }
  };
  const int rule = dsl::matching_rule(program, slots);
  if (rule >= 0) apply(program.rules[static_cast<std::size_t>(rule)].updates);
  apply(program.defaults);

  Transition out{State::unchecked(s.schema_ref(), {}), {}};
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = schema[i];
    const double v = std::clamp(next[i], a.lower, a.upper);
    if (v != next[i]) out.clamped.push_back(i);
    next[i] = v;
  }
  out.state = State::unchecked(s.schema_ref(), std::move(next));
  return out;
}

State transition(const DynamicsProgram& prog, const State& s) { return step(prog, s).state; }

Rollout rollout(const DynamicsProgram& prog, const State& s0, int n) {
  if (n < 0) fail(ErrorCode::precondition, "rollout length must be >= 0");
  std::vector<State> states;
  states.reserve(static_cast<std::size_t>(n) + 1);
  states.push_back(s0);
  std::vector<ClampEvent> clamps;
  for (int t = 1; t <= n; ++t) {
    Transition tr = [&] {
      try {
        return step(prog, states.back());
      } catch (const dsl::EvalError& e) {
        throw dsl::EvalError(e.pos(), "step " + std::to_string(t) + " of '" + prog.id() +
                                          "': " + e.what());
      }
    }();
    for (auto i : tr.clamped) clamps.push_back({t, prog.schema()[i].name});
    states.push_back(std::move(tr.state));
  }
  return {Trajectory(std::move(states)), std::move(clamps)};
}

void TemplateRegistry::add(EnvKind env, DynamicsProgram program) {
  auto& list = templates_[env];
  for (const auto& p : list) {
    if (p.id() == program.id()) {
      fail(ErrorCode::invalid_argument, "duplicate template id '" + program.id() + "'");
    }
  }
  list.push_back(std::move(program));
}

const std::vector<DynamicsProgram>& TemplateRegistry::lookup(EnvKind env) const {
  auto it = templates_.find(env);
  if (it == templates_.end() || it->second.empty()) {
    fail(ErrorCode::unsupported_env,
         "no templates for environment '" + std::string(to_string(env)) + "'");
  }
  return it->second;
}

const DynamicsProgram& TemplateRegistry::get(EnvKind env, std::string_view id) const {
  for (const auto& p : lookup(env)) {
    if (p.id() == id) return p;
  }
  fail(ErrorCode::invalid_argument, "no template '" + std::string(id) + "' for '" +
                                        std::string(to_string(env)) + "'");
}

bool TemplateRegistry::contains(EnvKind env, std::string_view id) const {
  auto it = templates_.find(env);
  if (it == templates_.end()) return false;
  return std::any_of(it->second.begin(), it->second.end(),
                     [&](const DynamicsProgram& p) { return p.id() == id; });
}

std::string inertia_source(int balls) {
  std::string s = "default:\n";
  for (int k = 1; k <= balls; ++k) {
    const auto i = std::to_string(k);
    s += "  x" + i + " <- x" + i + " + vx" + i + ";\n";
    s += "  y" + i + " <- y" + i + ";\n";
    s += "  vx" + i + " <- vx" + i + ";\n";
    s += "  r" + i + " <- r" + i + ";\n";
  }
  return s;
}

namespace {

// Post-contact velocity of ball a hitting ball b, masses r^2.
std::string outcome(const std::string& a, const std::string& b) {
  const std::string ma = "r" + a + " * r" + a;
  const std::string mb = "r" + b + " * r" + b;
  return "((" + ma + " - restitution * " + mb + ") * vx" + a + " + (1 + restitution) * " + mb +
         " * vx" + b + ") / (" + ma + " + " + mb + ")";
}

}  // namespace

std::string elastic_collision_source() {
  const std::string v1 = outcome("1", "2");
  const std::string v2 = outcome("2", "1");
  return "# contact during the coming step while closing\n"
         "when x2 + vx2 - (x1 + vx1) <= r1 + r2 and vx1 - vx2 > 0:\n"
         "  vx1 <- " + v1 + ";\n"
         "  vx2 <- " + v2 + ";\n"
         "  x1 <- x1 + " + v1 + ";\n"
         "  x2 <- x2 + " + v2 + ";\n" +
         inertia_source(2);
}

std::string wall_bounce_source() {
  return "when x1 + vx1 - r1 < 0 or x1 + vx1 + r1 > 1:\n"
         "  vx1 <- -vx1;\n"
         "  x1 <- x1 - vx1;\n" +
         inertia_source(1);
}

std::string cartpole_euler_source() {
  const std::string total = "(cart_mass + pole_mass)";
  const std::string omega = "(pole_angular_velocity / time_step)";
  const std::string temp = "((force + pole_mass * length * " + omega + " * " + omega +
                           " * sin(pole_angle)) / " + total + ")";
  const std::string theta_acc =
      "((gravity * sin(pole_angle) - cos(pole_angle) * " + temp +
      ") / (length * (4 / 3 - pole_mass * cos(pole_angle) * cos(pole_angle) / " + total + ")))";
  const std::string x_acc =
      "(" + temp + " - pole_mass * length * " + theta_acc + " * cos(pole_angle) / " + total + ")";
  return "# explicit Euler; velocities are per frame\n"
         "default:\n"
         "  cart_position <- cart_position + cart_velocity;\n"
         "  cart_velocity <- cart_velocity + time_step * time_step * " + x_acc + ";\n"
         "  pole_angle <- pole_angle + pole_angular_velocity;\n"
         "  pole_angular_velocity <- pole_angular_velocity + time_step * time_step * " +
         theta_acc + ";\n"
         "  pole_length <- pole_length;\n";
}

std::string constant_acceleration_source(EnvKind env) {
  if (env == EnvKind::cartpole) {
    return "default:\n"
           "  cart_position <- cart_position + cart_velocity;\n"
           "  cart_velocity <- cart_velocity + accel;\n"
           "  pole_angle <- pole_angle + pole_angular_velocity;\n"
           "  pole_angular_velocity <- pole_angular_velocity;\n"
           "  pole_length <- pole_length;\n";
  }
  std::string s = "default:\n";
  for (int k = 1; k <= ball_count(env); ++k) {
    const auto i = std::to_string(k);
    s += "  x" + i + " <- x" + i + " + vx" + i + ";\n";
    s += "  y" + i + " <- y" + i + ";\n";
    s += "  vx" + i + " <- vx" + i + " + accel * sign(vx" + i + ");\n";
    s += "  r" + i + " <- r" + i + ";\n";
  }
  return s;
}

DynamicsProgram cartpole_euler_template() {
  ParamVector params({{"gravity", 9.8, 1.0, 20.0},
                      {"cart_mass", 1.0, 0.1, 5.0},
                      {"pole_mass", 0.1, 0.01, 1.0},
                      {"length", 0.5, 0.05, 1.0},
                      {"force", -10.0, -20.0, 20.0},
                      {"time_step", 0.02, 0.005, 0.05}});
  return {"cartpole-euler", cartpole_schema(), std::move(params), cartpole_euler_source()};
}

DynamicsProgram elastic_collision_template() {
  return {"elastic-collision-1d", ball_schema(EnvKind::phyworld_collision),
          ParamVector({{"restitution", 1.0, 0.5, 1.0}}), elastic_collision_source()};
}

namespace {

DynamicsProgram distractor(EnvKind env) {
  const Param accel = env == EnvKind::cartpole ? Param{"accel", 0.001, -0.01, 0.01}
                                               : Param{"accel", 0.001, 0.0005, 0.01};
  return {std::string(kDistractorId), schema_for(env), ParamVector({accel}),
          constant_acceleration_source(env)};
}

TemplateRegistry make_builtin() {
  TemplateRegistry r;
  const auto uniform = ball_schema(EnvKind::phyworld_uniform);
  const auto collision = ball_schema(EnvKind::phyworld_collision);
  r.add(EnvKind::phyworld_uniform, {"uniform-inertia", uniform, {}, inertia_source(1)});
  r.add(EnvKind::phyworld_uniform, {"wall-bounce", uniform, {}, wall_bounce_source()});
  r.add(EnvKind::phyworld_uniform, distractor(EnvKind::phyworld_uniform));
  r.add(EnvKind::phyworld_collision, elastic_collision_template());
  r.add(EnvKind::phyworld_collision, {"uniform-inertia", collision, {}, inertia_source(2)});
  r.add(EnvKind::phyworld_collision, distractor(EnvKind::phyworld_collision));
  r.add(EnvKind::cartpole, cartpole_euler_template());
  r.add(EnvKind::cartpole, distractor(EnvKind::cartpole));
  return r;
}

}  // namespace

const TemplateRegistry& builtin_templates() {
  static const TemplateRegistry registry = make_builtin();
  return registry;
}

std::string_view true_template_id(EnvKind env) {
  switch (env) {
    case EnvKind::phyworld_uniform: return "uniform-inertia";
    case EnvKind::phyworld_collision: return "elastic-collision-1d";
    case EnvKind::cartpole: return "cartpole-euler";
  }
  return "";
}

}  // namespace vidprog::dynamics
