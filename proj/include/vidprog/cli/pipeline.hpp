#pragma once

#include <span>
#include <string>
#include <vector>

#include "vidprog/cli/io.hpp"
#include "vidprog/core/video.hpp"
#include "vidprog/evalmetrics/metrics.hpp"
#include "vidprog/fit/fit.hpp"
#include "vidprog/render/render.hpp"

namespace vidprog::cli {

EnvKind video_env(const Video& video);
render::RenderConfig render_config_for(const Video& video);

// Per-frame perception; failures name the frame index.
Trajectory perceive_video(std::span<const Frame> frames, const render::RenderConfig& config,
                          int jobs = 1);

fit::FitData make_fit_data(const Dataset& dataset, bool keep_frames, int jobs = 1);

struct TrainResult {
  fit::FitReport report;
  std::vector<std::string> diagnostics;  // proposer notes
};

// Perceive, propose, select and fit.
TrainResult train(const Dataset& dataset, const ExperimentConfig& config);

struct Prediction {
  int conditioning_frames = 0;     // F+1
  int total_frames = 0;            // T
  Trajectory perceived;            // s_0..s_F
  Trajectory predicted;            // s_{F+1}..s_T
  std::vector<Frame> frames;       // f_{F+1}..f_T
  int clamp_events = 0;
  std::vector<std::string> trace;  // "perceive t", "transition t", "render t"

  // s_0..s_T (perceived, then predicted).
  Trajectory states() const;
};

// Perceive f_0..f_F, roll T-F steps from s_F, render each state. Frames past
// F are ignored. Throws precondition when fewer than F+1 frames are given.
Prediction predict(const fit::FitReport& report, std::span<const Frame> frames,
                   const render::RenderConfig& config, int jobs = 1);

// Writes frame_<t>.ppm for the predicted frames and states.json.
void save_prediction(const fs::path& dir, const Prediction& prediction);

// Rolls the report's program from `start` (index F) and renders T-F frames.
Prediction rollout_from(const fit::FitReport& report, const State& start,
                        const Trajectory& conditioning, const render::RenderConfig& config);

// Throws unknown-attribute or out-of-bounds.
State apply_edits(const State& state, const std::vector<Edit>& edits);

struct EvalOptions {
  std::vector<std::string> metrics{"velocity_error", "velocity_error_state", "mae", "psnr"};
  std::string split = "test";
  int jobs = 1;
};

inline const std::vector<std::string> kKnownMetrics{"velocity_error", "velocity_error_state",
                                                    "mae", "psnr"};

// In-memory scoring of one prediction against the full ground-truth video.
std::map<std::string, double> score_prediction(const Prediction& prediction, const Video& truth,
                                               const std::vector<std::string>& metrics,
                                               int jobs = 1);

// Scores one predicted video against its ground-truth video directory.
// velocity_error perceives the predicted frames (anchored by the seen
// frames) and the true frames alike; velocity_error_state compares predicted
// states with the true states.
std::map<std::string, double> evaluate_video(const fs::path& prediction_dir,
                                             const fs::path& truth_dir,
                                             const std::vector<std::string>& metrics, int jobs);

// Single video directories or dataset roots holding video_<k> on both sides.
std::vector<metrics::MetricRow> evaluate(const fs::path& predictions, const fs::path& truth,
                                         const EvalOptions& options);

// Names of the rows that violate the thresholds.
std::vector<std::string> threshold_failures(const std::vector<metrics::MetricRow>& rows,
                                            const Thresholds& thresholds);

// Human-readable report summary.
std::string describe(const fit::FitReport& report);

}  // namespace vidprog::cli
