#include "vidprog/dsl/validate.hpp"

#include <set>

namespace vidprog::dsl {

namespace {

struct Checker {
  const StateSchema& schema;
  const ParamVector& params;
  std::set<std::string> reported;
  ValidationResult result;

  void variable(const Expr& e) {
    if (e.kind == Expr::Kind::variable) {
      const bool attr = schema.index_of(e.name).has_value();
      const bool param = params.index_of(e.name).has_value();
      if (!attr && !param && reported.insert(e.name).second) {
        result.errors.push_back({ErrorCode::unresolved_variable, e.name,
                                 to_string(e.pos) + ": unresolved variable '" + e.name + "'",
                                 e.pos});
      }
    }
    for (const auto& a : e.args) variable(a);
  }

  void guard(const Guard& g) {
    for (const auto& e : g.operands) variable(e);
    for (const auto& c : g.children) guard(c);
  }

  void updates(const std::vector<Update>& us) {
    for (const auto& u : us) {
      if (!schema.index_of(u.target)) {
        const bool is_param = params.index_of(u.target).has_value();
        result.errors.push_back(
            {ErrorCode::unresolved_variable, u.target,
             to_string(u.pos) + ": " +
                 (is_param ? "cannot assign to parameter '" + u.target + "'"
                           : "assignment to unknown attribute '" + u.target + "'"),
             u.pos});
      }
      variable(u.value);
    }
  }
};

}  // namespace

std::string ValidationResult::summary() const {
  std::string out;
  for (const auto& d : errors) {
    if (!out.empty()) out += '\n';
    out += d.message;
  }
  return out;
}

ValidationResult validate(const Program& program, const StateSchema& schema,
                          const ParamVector& params) {
  Checker c{schema, params, {}, {}};
  for (const auto& p : params.entries()) {
    if (schema.index_of(p.name)) {
      c.result.errors.push_back({ErrorCode::namespace_collision, p.name,
                                 "parameter '" + p.name + "' collides with a state attribute",
                                 {}});
      c.reported.insert(p.name);
    }
  }
  for (const auto& r : program.rules) {
    c.guard(r.guard);
    c.updates(r.updates);
  }
  c.updates(program.defaults);
  for (const auto& a : schema.attributes()) {
    bool covered = false;
    for (const auto& u : program.defaults) covered = covered || u.target == a.name;
    if (!covered) {
      c.result.errors.push_back({ErrorCode::incomplete_default, a.name,
                                 "default block does not assign attribute '" + a.name + "'",
                                 {}});
    }
  }
  return std::move(c.result);
}

}  // namespace vidprog::dsl
