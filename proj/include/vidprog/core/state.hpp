#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vidprog {

enum class Unit {
  normalized_length,
  normalized_length_per_frame,
  radians,
  radians_per_frame,
  dimensionless,
};

enum class Role { position, velocity, angle, angular_velocity, geometry };

std::string_view to_string(Unit unit);
std::string_view to_string(Role role);
Unit parse_unit(std::string_view text);
Role parse_role(std::string_view text);

struct AttributeDescriptor {
  std::string name;
  Unit unit = Unit::dimensionless;
  double lower = 0.0;
  double upper = 1.0;
  Role role = Role::position;
  // For velocity-like roles: the attribute whose per-frame difference this is.
  std::string source;

  friend bool operator==(const AttributeDescriptor&, const AttributeDescriptor&) = default;
};

class StateSchema {
 public:
  StateSchema(std::string env_id, std::vector<AttributeDescriptor> attributes);

  const std::string& env_id() const noexcept { return env_id_; }
  const std::vector<AttributeDescriptor>& attributes() const noexcept { return attributes_; }
  std::size_t size() const noexcept { return attributes_.size(); }
  const AttributeDescriptor& operator[](std::size_t i) const { return attributes_[i]; }

  std::optional<std::size_t> index_of(std::string_view name) const noexcept;
  // Throws unknown-attribute.
  std::size_t require_index(std::string_view name) const;

  friend bool operator==(const StateSchema&, const StateSchema&) = default;

 private:
  std::string env_id_;
  std::vector<AttributeDescriptor> attributes_;
};

using SchemaRef = std::shared_ptr<const StateSchema>;

bool same_schema(const SchemaRef& a, const SchemaRef& b) noexcept;

class State {
 public:
  // Checks length and bounds; throws out-of-bounds / shape-mismatch.
  State(SchemaRef schema, std::vector<double> values);

  // No bound checks; for decoded or perceived data that is validated later.
  static State unchecked(SchemaRef schema, std::vector<double> values);

  const StateSchema& schema() const noexcept { return *schema_; }
  const SchemaRef& schema_ref() const noexcept { return schema_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  friend bool operator==(const State& a, const State& b) {
    return same_schema(a.schema_, b.schema_) && a.values_ == b.values_;
  }

 private:
  State() = default;
  SchemaRef schema_;
  std::vector<double> values_;
};

struct Violation {
  std::string attribute;  // empty for length violations
  std::string message;
};

std::vector<Violation> validate_state(const State& state);

// Throws unknown-attribute naming the identifier.
double attribute(const State& state, std::string_view name);

class Trajectory {
 public:
  explicit Trajectory(std::vector<State> states);

  const std::vector<State>& states() const noexcept { return states_; }
  std::size_t size() const noexcept { return states_.size(); }
  const State& operator[](std::size_t i) const { return states_[i]; }
  const State& front() const { return states_.front(); }
  const State& back() const { return states_.back(); }
  const StateSchema& schema() const noexcept { return states_.front().schema(); }
  const SchemaRef& schema_ref() const noexcept { return states_.front().schema_ref(); }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  std::vector<State> states_;
};

// Maps an angle difference to (-pi, pi].
double wrap_angle(double radians) noexcept;

}  // namespace vidprog
