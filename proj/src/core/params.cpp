#include "vidprog/core/params.hpp"

#include <cmath>
#include <unordered_set>

#include "vidprog/core/error.hpp"
#include "vidprog/core/identifier.hpp"

namespace vidprog {

namespace {

void check_entry(const Param& p) {
  if (!std::isfinite(p.value) || p.value < p.lower || p.value > p.upper) {
    fail(ErrorCode::out_of_bounds, "parameter '" + p.name + "' = " + std::to_string(p.value) +
                                       " outside [" + std::to_string(p.lower) + ", " +
                                       std::to_string(p.upper) + "]");
  }
}

}  // namespace

ParamVector::ParamVector(std::vector<Param> entries) : entries_(std::move(entries)) {
  std::unordered_set<std::string> seen;
  for (const auto& p : entries_) {
    if (!is_identifier(p.name)) {
      fail(ErrorCode::invalid_argument, "parameter name '" + p.name + "' is not an identifier");
    }
    if (!seen.insert(p.name).second) {
      fail(ErrorCode::invalid_argument, "duplicate parameter '" + p.name + "'");
    }
    check_entry(p);
  }
}

std::optional<std::size_t> ParamVector::index_of(std::string_view name) const noexcept {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return i;
  }
  return std::nullopt;
}

std::vector<double> ParamVector::values() const {
  std::vector<double> out;
  out.reserve(entries_.size());
  for (const auto& p : entries_) out.push_back(p.value);
  return out;
}

std::vector<double> ParamVector::lower() const {
  std::vector<double> out;
  for (const auto& p : entries_) out.push_back(p.lower);
  return out;
}

std::vector<double> ParamVector::upper() const {
  std::vector<double> out;
  for (const auto& p : entries_) out.push_back(p.upper);
  return out;
}

ParamVector ParamVector::with_values(const std::vector<double>& values) const {
  if (values.size() != entries_.size()) {
    fail(ErrorCode::shape_mismatch, "expected " + std::to_string(entries_.size()) +
                                        " parameter values, got " +
                                        std::to_string(values.size()));
  }
  ParamVector out = *this;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out.entries_[i].value = values[i];
    check_entry(out.entries_[i]);
  }
  return out;
}

}  // namespace vidprog
