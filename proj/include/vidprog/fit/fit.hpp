#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vidprog/core/frame.hpp"
#include "vidprog/core/state.hpp"
#include "vidprog/dynamics/dynamics.hpp"
#include "vidprog/fit/optimize.hpp"
#include "vidprog/render/render.hpp"

namespace vidprog::fit {

enum class LossKind { surrogate, pixel };
enum class OptimizerKind { powell, lbfgs_fd };

std::string_view to_string(LossKind kind);
std::string_view to_string(OptimizerKind kind);
LossKind parse_loss_kind(std::string_view text);
OptimizerKind parse_optimizer_kind(std::string_view text);

struct FitConfig {
  LossKind loss = LossKind::surrogate;
  OptimizerKind optimizer = OptimizerKind::powell;
  int max_iterations = 200;
  int max_evaluations = 20000;
  double tolerance = 1e-10;
  int restarts = 5;
  std::uint64_t seed = 0;
  double sigma = 1.0;  // pixel-noise scale
  int jobs = 1;

  // Throws config errors.
  void validate() const;
  OptimizeOptions options() const { return {max_iterations, max_evaluations, tolerance}; }
};

// Perceived training videos. Every trajectory holds T+1 states; the first
// conditioning_frames are seen. Frames are needed only for the pixel loss.
struct FitData {
  std::vector<Trajectory> perceived;
  int conditioning_frames = 0;  // F+1
  std::vector<std::vector<Frame>> frames;
  std::optional<render::RenderConfig> render;

  int last_conditioning_index() const noexcept { return conditioning_frames - 1; }
};

// Sum over videos and t = F+1..T of the squared state residual, rolling out
// from the perceived state at t = F. Angle residuals are wrapped. Any
// evaluation error gives +infinity.
double surrogate_loss(const dynamics::DynamicsProgram& prog, const FitData& data);

// Squared pixel difference in [0,1] units over the predicted frames, divided
// by sigma^2.
double pixel_loss(const dynamics::DynamicsProgram& prog, const FitData& data, double sigma = 1.0);

// Sum of squared channel differences (bytes / 255) between two frames.
double frame_squared_error(const Frame& a, const Frame& b);

double loss(const dynamics::DynamicsProgram& prog, const FitData& data, const FitConfig& config);

struct RestartSummary {
  int index = 0;
  std::vector<double> start;
  std::vector<double> x;
  double loss = 0.0;
  int evaluations = 0;
  int iterations = 0;
  std::string status;
};

struct CandidateSummary {
  std::string id;
  std::size_t parameters = 0;
  double loss = 0.0;
};

struct FitReport {
  std::string program_id;
  std::string env;
  std::string source;
  ParamVector params;  // fitted values
  LossKind loss_kind = LossKind::surrogate;
  OptimizerKind optimizer = OptimizerKind::powell;
  double final_loss = 0.0;
  std::vector<double> trace;  // best restart
  int evaluations = 0;        // over all restarts
  int clamp_events = 0;       // in the final rollouts
  int evaluation_errors = 0;  // objective evaluations mapped to infinity
  std::vector<RestartSummary> restarts;
  std::vector<CandidateSummary> candidates;  // stage 1 only
  int conditioning_frames = 0;
  int total_frames = 0;

  // The fitted program.
  dynamics::DynamicsProgram program() const;
};

// Stage 2. Restart 0 starts from the defaults, the others from seeded
// uniform samples in the box. Throws all-restarts-failed.
FitReport fit_params(const dynamics::DynamicsProgram& prog, const FitData& data,
                     const FitConfig& config);

inline constexpr double kTieTolerance = 1e-9;

// Stage 1: fit every candidate and keep the lowest loss; near-ties prefer
// fewer parameters, then the smaller id.
FitReport select_program(const std::vector<dynamics::DynamicsProgram>& candidates,
                         const FitData& data, const FitConfig& config);

}  // namespace vidprog::fit
