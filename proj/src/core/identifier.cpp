#include "vidprog/core/identifier.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace vidprog {

bool is_reserved_word(std::string_view word) noexcept {
  static constexpr std::array<std::string_view, 13> kReserved = {
      "when", "default", "and", "or", "not", "sin", "cos",
      "tan", "abs", "sqrt", "sign", "min", "max"};
  return std::find(kReserved.begin(), kReserved.end(), word) != kReserved.end();
}

bool is_identifier(std::string_view text) noexcept {
  if (text.empty()) return false;
  const auto head = static_cast<unsigned char>(text.front());
  if (!(std::isalpha(head) || head == '_')) return false;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (!(std::isalnum(u) || u == '_')) return false;
  }
  return !is_reserved_word(text);
}

}  // namespace vidprog
