#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "vidprog/core/params.hpp"
#include "vidprog/core/schemas.hpp"
#include "vidprog/core/state.hpp"
#include "vidprog/dynamics/dynamics.hpp"

namespace vidprog::proposer {

inline constexpr std::size_t kMaxExamples = 3;
inline constexpr std::size_t kMaxExampleStates = 20;
inline constexpr int kDefaultCandidates = 4;

struct ProposalRequest {
  EnvKind env = EnvKind::phyworld_uniform;
  std::string description;
  SchemaRef schema;
  std::vector<Trajectory> examples;  // at most 3, each at most 20 states
  int max_candidates = kDefaultCandidates;
};

// Truncates the examples to the protocol limits.
ProposalRequest make_request(EnvKind env, const std::vector<Trajectory>& examples,
                             int max_candidates = kDefaultCandidates);

struct ProposedCandidate {
  std::string program;
  std::vector<Param> params;  // value holds the default
  std::string rationale;
};

struct EndpointConfig {
  std::string url;  // http://host[:port]/path
  std::string api_key_env = "VIDPROG_PROPOSER_KEY";
  int timeout_seconds = 30;
};

struct Proposal {
  std::vector<dynamics::DynamicsProgram> programs;
  std::vector<std::string> diagnostics;
  bool fell_back = false;
};

// Every registry template for the env-kind, distractor included.
std::vector<dynamics::DynamicsProgram> registry_propose(const ProposalRequest& request);

// The prompt template as checked into prompts/.
std::string_view prompt_template();
std::string build_prompt(const ProposalRequest& request);

// {candidates: [{program, params: [{name, lower, upper, default}], rationale}]}.
// Throws io errors on malformed bodies.
std::vector<ProposedCandidate> parse_response(std::string_view body);

// Parse, validate and smoke-run each candidate on the first example state.
// Survivors get ids remote-1, remote-2, ...; rejects are reported.
Proposal accept_candidates(const ProposalRequest& request,
                           const std::vector<ProposedCandidate>& candidates);

// One POST; any failure falls back to registry_propose. The distractor is
// appended to accepted remote candidates.
Proposal remote_propose(const ProposalRequest& request, const EndpointConfig& endpoint);

}  // namespace vidprog::proposer
