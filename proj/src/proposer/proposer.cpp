#include "vidprog/proposer/proposer.hpp"

#include <cstdlib>
#include <sstream>

#include "httplib.h"
#include "json.hpp"
#include "vidprog/core/error.hpp"
#include "vidprog/dsl/printer.hpp"

namespace vidprog::proposer {

namespace detail {
extern const std::string_view kPromptText;
}

namespace {

using nlohmann::json;

constexpr std::string_view kGrammar = R"grammar(  program  := rule* "default" ":" update+
  rule     := "when" guard ":" update+
  update   := attribute "<-" expr ";"
  expr     := number | name | expr ("+"|"-"|"*"|"/") expr | "-" expr | "(" expr ")"
            | fn "(" expr ")" with fn in sin cos tan abs sqrt sign
            | fn "(" expr "," expr ")" with fn in min max
  guard    := expr ("<"|"<="|">"|">="|"=="|"!=") expr
            | guard "and" guard | guard "or" guard | "not" guard | "(" guard ")"
  The first rule whose guard holds supplies its updates; "default" supplies
  the rest and must assign every attribute. All right-hand sides read the
  previous state. '#' starts a comment.)grammar";

void replace_all(std::string& text, std::string_view key, const std::string& value) {
  for (auto at = text.find(key); at != std::string::npos; at = text.find(key, at + value.size())) {
    text.replace(at, key.size(), value);
  }
}

std::string describe(EnvKind env) {
  switch (env) {
    case EnvKind::phyworld_uniform:
      return "one ball moving horizontally on a white background";
    case EnvKind::phyworld_collision:
      return "two balls moving horizontally that may collide with each other";
    case EnvKind::cartpole: return "a cart on a horizontal track carrying a hinged pole";
  }
  return "";
}

std::string number(double v) { return dsl::format_number(v); }

}  // namespace

ProposalRequest make_request(EnvKind env, const std::vector<Trajectory>& examples,
                             int max_candidates) {
  if (max_candidates < 1) fail(ErrorCode::invalid_argument, "max_candidates must be >= 1");
  ProposalRequest r;
  r.env = env;
  r.description = describe(env);
  r.schema = schema_for(env);
  r.max_candidates = max_candidates;
  for (std::size_t i = 0; i < examples.size() && i < kMaxExamples; ++i) {
    const auto& states = examples[i].states();
    const auto n = std::min(states.size(), kMaxExampleStates);
    r.examples.emplace_back(std::vector<State>(states.begin(), states.begin() + n));
  }
  return r;
}

std::vector<dynamics::DynamicsProgram> registry_propose(const ProposalRequest& request) {
  return dynamics::builtin_templates().lookup(request.env);
}

std::string_view prompt_template() { return detail::kPromptText; }

std::string build_prompt(const ProposalRequest& request) {
  std::string text(prompt_template());
  const auto& schema = request.schema ? *request.schema : *schema_for(request.env);
  std::string attrs;
  for (const auto& a : schema.attributes()) {
    attrs += "  " + a.name + ", " + std::string(to_string(a.unit)) + ", " + number(a.lower) +
             ", " + number(a.upper) + ", " + std::string(to_string(a.role)) + "\n";
  }
  std::string examples;
  for (std::size_t i = 0; i < request.examples.size(); ++i) {
    examples += "  video " + std::to_string(i + 1) + ":\n";
    for (const auto& s : request.examples[i].states()) {
      examples += "   ";
      for (double v : s.values()) examples += " " + number(v);
      examples += "\n";
    }
  }
  if (examples.empty()) examples = "  (none)\n";
  replace_all(text, "{{ENV}}", std::string(to_string(request.env)) + ": " + request.description);
  replace_all(text, "{{SCHEMA}}", attrs);
  replace_all(text, "{{EXAMPLES}}", examples);
  replace_all(text, "{{GRAMMAR}}", std::string(kGrammar));
  replace_all(text, "{{TEMPLATE}}", dynamics::cartpole_euler_source());
  replace_all(text, "{{K}}", std::to_string(request.max_candidates));
  return text;
}

std::vector<ProposedCandidate> parse_response(std::string_view body) {
  std::vector<ProposedCandidate> out;
  try {
    const auto doc = json::parse(body);
    for (const auto& c : doc.at("candidates")) {
      ProposedCandidate p;
      p.program = c.at("program").get<std::string>();
      if (c.contains("params")) {
        for (const auto& q : c.at("params")) {
          p.params.push_back({q.at("name").get<std::string>(), q.at("default").get<double>(),
                              q.at("lower").get<double>(), q.at("upper").get<double>()});
        }
      }
      if (c.contains("rationale")) p.rationale = c.at("rationale").get<std::string>();
      out.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::io, std::string("malformed proposer response: ") + e.what());
  }
  return out;
}

Proposal accept_candidates(const ProposalRequest& request,
                           const std::vector<ProposedCandidate>& candidates) {
  Proposal p;
  const auto schema = request.schema ? request.schema : schema_for(request.env);
  const std::size_t limit = static_cast<std::size_t>(request.max_candidates);
  if (candidates.size() > limit) {
    p.diagnostics.push_back("response has " + std::to_string(candidates.size()) +
                            " candidates; keeping the first " + std::to_string(limit));
  }
  for (std::size_t i = 0; i < candidates.size() && i < limit; ++i) {
    const std::string id = "remote-" + std::to_string(i + 1);
    try {
      dynamics::DynamicsProgram prog(id, schema, ParamVector(candidates[i].params),
                                     candidates[i].program);
      if (!request.examples.empty()) dynamics::transition(prog, request.examples.front().front());
      p.programs.push_back(std::move(prog));
    } catch (const Error& e) {
      p.diagnostics.push_back(id + " rejected: " + e.what());
    }
  }
  return p;
}

Proposal remote_propose(const ProposalRequest& request, const EndpointConfig& endpoint) {
  auto fallback = [&](Proposal p, const std::string& why) {
    p.diagnostics.push_back("falling back to the template registry: " + why);
    p.programs = registry_propose(request);
    p.fell_back = true;
    return p;
  };

  const std::string& url = endpoint.url;
  const auto scheme_end = url.find("://");
  if (url.rfind("http://", 0) != 0) {
    return fallback({}, "only http:// endpoints are supported ('" + url + "')");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  const std::string host = url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(host);
  client.set_connection_timeout(endpoint.timeout_seconds, 0);
  client.set_read_timeout(endpoint.timeout_seconds, 0);
  client.set_write_timeout(endpoint.timeout_seconds, 0);
  httplib::Headers headers;
  if (!endpoint.api_key_env.empty()) {
    if (const char* key = std::getenv(endpoint.api_key_env.c_str()); key && *key) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }
  const json body = {{"prompt", build_prompt(request)}, {"max_candidates", request.max_candidates}};
  const auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) return fallback({}, "request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) return fallback({}, "HTTP status " + std::to_string(res->status));

  std::vector<ProposedCandidate> candidates;
  try {
    candidates = parse_response(res->body);
  } catch (const Error& e) {
    return fallback({}, e.what());
  }
  Proposal p = accept_candidates(request, candidates);
  if (p.programs.empty()) return fallback(std::move(p), "no candidate survived validation");
  for (const auto& t : registry_propose(request)) {
    if (t.id() == dynamics::kDistractorId) p.programs.push_back(t);
  }
  return p;
}

}  // namespace vidprog::proposer
