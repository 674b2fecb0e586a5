#pragma once

#include <string_view>

namespace vidprog {

// Keywords and builtin function names of the dynamics language; never valid
// as attribute or parameter names.
bool is_reserved_word(std::string_view word) noexcept;

// [A-Za-z_][A-Za-z0-9_]* and not reserved.
bool is_identifier(std::string_view text) noexcept;

}  // namespace vidprog
