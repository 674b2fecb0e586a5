#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vidprog {

struct Param {
  std::string name;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;

  friend bool operator==(const Param&, const Param&) = default;
};

// Named, boxed continuous parameters of a dynamics program.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::vector<Param> entries);

  const std::vector<Param>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const Param& operator[](std::size_t i) const { return entries_[i]; }

  std::optional<std::size_t> index_of(std::string_view name) const noexcept;
  std::vector<double> values() const;
  std::vector<double> lower() const;
  std::vector<double> upper() const;

  // Same names and bounds with new values; throws out-of-bounds.
  ParamVector with_values(const std::vector<double>& values) const;

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<Param> entries_;
};

}  // namespace vidprog
