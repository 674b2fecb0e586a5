#include "vidprog/core/state.hpp"

#include <cmath>
#include <numbers>
#include <unordered_set>

#include "vidprog/core/error.hpp"
#include "vidprog/core/identifier.hpp"

namespace vidprog {

std::string_view to_string(Unit unit) {
  switch (unit) {
    case Unit::normalized_length: return "normalized-length";
    case Unit::normalized_length_per_frame: return "normalized-length/frame";
    case Unit::radians: return "radians";
    case Unit::radians_per_frame: return "radians/frame";
    case Unit::dimensionless: return "dimensionless";
  }
  return "dimensionless";
}

std::string_view to_string(Role role) {
  switch (role) {
    case Role::position: return "position";
    case Role::velocity: return "velocity";
    case Role::angle: return "angle";
    case Role::angular_velocity: return "angular-velocity";
    case Role::geometry: return "geometry";
  }
  return "geometry";
}

Unit parse_unit(std::string_view text) {
  for (auto u : {Unit::normalized_length, Unit::normalized_length_per_frame, Unit::radians,
                 Unit::radians_per_frame, Unit::dimensionless}) {
    if (to_string(u) == text) return u;
  }
  fail(ErrorCode::invalid_argument, "unknown unit '" + std::string(text) + "'");
}

Role parse_role(std::string_view text) {
  for (auto r : {Role::position, Role::velocity, Role::angle, Role::angular_velocity,
                 Role::geometry}) {
    if (to_string(r) == text) return r;
  }
  fail(ErrorCode::invalid_argument, "unknown role '" + std::string(text) + "'");
}

StateSchema::StateSchema(std::string env_id, std::vector<AttributeDescriptor> attributes)
    : env_id_(std::move(env_id)), attributes_(std::move(attributes)) {
  if (attributes_.empty()) {
    fail(ErrorCode::invalid_argument, "schema '" + env_id_ + "' has no attributes");
  }
  std::unordered_set<std::string> seen;
  for (const auto& a : attributes_) {
    if (!is_identifier(a.name)) {
      fail(ErrorCode::invalid_argument, "attribute name '" + a.name + "' is not an identifier");
    }
    if (!seen.insert(a.name).second) {
      fail(ErrorCode::invalid_argument, "duplicate attribute '" + a.name + "'");
    }
    if (!(a.lower < a.upper)) {
      fail(ErrorCode::invalid_argument, "attribute '" + a.name + "' needs lower < upper");
    }
  }
  for (const auto& a : attributes_) {
    if (!a.source.empty() && !seen.contains(a.source)) {
      fail(ErrorCode::invalid_argument,
           "attribute '" + a.name + "' differentiates unknown '" + a.source + "'");
    }
  }
}

std::optional<std::size_t> StateSchema::index_of(std::string_view name) const noexcept {
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    if (attributes_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t StateSchema::require_index(std::string_view name) const {
  if (auto i = index_of(name)) return *i;
  fail(ErrorCode::unknown_attribute,
       "unknown attribute '" + std::string(name) + "' in schema '" + env_id_ + "'");
}

bool same_schema(const SchemaRef& a, const SchemaRef& b) noexcept {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

State::State(SchemaRef schema, std::vector<double> values)
    : schema_(std::move(schema)), values_(std::move(values)) {
  if (!schema_) fail(ErrorCode::invalid_argument, "state without schema");
  const auto violations = validate_state(*this);
  if (!violations.empty()) {
    const auto code = values_.size() != schema_->size() ? ErrorCode::shape_mismatch
                                                        : ErrorCode::out_of_bounds;
    fail(code, violations.front().message);
  }
}

State State::unchecked(SchemaRef schema, std::vector<double> values) {
  if (!schema) fail(ErrorCode::invalid_argument, "state without schema");
  State s;
  s.schema_ = std::move(schema);
  s.values_ = std::move(values);
  return s;
}

std::vector<Violation> validate_state(const State& state) {
  std::vector<Violation> out;
  const auto& schema = state.schema();
  const auto values = state.values();
  if (values.size() != schema.size()) {
    out.push_back({"", "state has " + std::to_string(values.size()) + " values, schema '" +
                           schema.env_id() + "' has " + std::to_string(schema.size())});
    return out;
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& a = schema[i];
    const double v = values[i];
    if (!std::isfinite(v) || v < a.lower || v > a.upper) {
      out.push_back({a.name, "attribute '" + a.name + "' = " + std::to_string(v) +
                                 " outside [" + std::to_string(a.lower) + ", " +
                                 std::to_string(a.upper) + "]"});
    }
  }
  return out;
}

double attribute(const State& state, std::string_view name) {
  return state[state.schema().require_index(name)];
}

Trajectory::Trajectory(std::vector<State> states) : states_(std::move(states)) {
  if (states_.empty()) fail(ErrorCode::precondition, "trajectory must not be empty");
  for (const auto& s : states_) {
    if (!same_schema(s.schema_ref(), states_.front().schema_ref())) {
      fail(ErrorCode::schema_mismatch, "trajectory states do not share one schema");
    }
  }
}

double wrap_angle(double radians) noexcept {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(radians, two_pi);
  if (r > std::numbers::pi) r -= two_pi;
  if (r <= -std::numbers::pi) r += two_pi;
  return r;
}

}  // namespace vidprog
