#include "vidprog/cli/pipeline.hpp"

#include <cmath>
#include <iomanip>
#include <algorithm>
#include <sstream>

#include "vidprog/core/error.hpp"
#include "vidprog/core/parallel.hpp"
#include "vidprog/core/schemas.hpp"
#include "vidprog/dynamics/dynamics.hpp"
#include "vidprog/perceive/perceive.hpp"
#include "vidprog/proposer/proposer.hpp"

namespace vidprog::cli {

EnvKind video_env(const Video& video) { return parse_env_kind(video.env_config_id()); }

render::RenderConfig render_config_for(const Video& video) {
  return render::RenderConfig::defaults(video_env(video), video.width(), video.height());
}

Trajectory perceive_video(std::span<const Frame> frames, const render::RenderConfig& config,
                          int jobs) {
  if (frames.empty()) fail(ErrorCode::precondition, "no frames to perceive");
  std::vector<std::vector<perceive::ObjectObservation>> obs(frames.size());
  parallel_for(frames.size(), jobs, [&](std::size_t t) {
    try {
      obs[t] = perceive::perceive_frame(frames[t], config);
    } catch (const Error& e) {
      fail(e.code(), "frame " + std::to_string(t) + ": " + e.what());
    }
  });
  return perceive::assemble_trajectory(obs, schema_for(config.env));
}

fit::FitData make_fit_data(const Dataset& dataset, bool keep_frames, int jobs) {
  if (dataset.size() == 0) fail(ErrorCode::dataset_not_found, "dataset has no videos");
  const auto& first = dataset.videos().front();
  fit::FitData data;
  data.conditioning_frames = first.conditioning_frames();
  data.render = render_config_for(first);
  std::vector<std::optional<Trajectory>> perceived(dataset.size());
  parallel_for(dataset.size(), jobs, [&](std::size_t k) {
    const auto& v = dataset.videos()[k];
    if (v.env_config_id() != first.env_config_id() ||
        v.conditioning_frames() != first.conditioning_frames() || !v.frames()[0].same_shape(first.frames()[0])) {
      fail(ErrorCode::shape_mismatch, "video " + std::to_string(k) + " differs from video 0 in env or layout");
    }
    try {
      perceived[k] = perceive_video(v.frames(), *data.render);
    } catch (const Error& e) {
      fail(e.code(), "video " + std::to_string(k) + ", " + e.what());
    }
  });
  for (auto& p : perceived) data.perceived.push_back(std::move(*p));
  if (keep_frames) {
    for (const auto& v : dataset.videos()) data.frames.push_back(v.frames());
  }
  return data;
}

TrainResult train(const Dataset& dataset, const ExperimentConfig& config) {
  auto fit_config = config.fit;
  const bool pixel = fit_config.loss == fit::LossKind::pixel;
  const auto data = make_fit_data(dataset, pixel, fit_config.jobs);
  const auto env = video_env(dataset.videos().front());

  const auto request = proposer::make_request(env, data.perceived, config.proposer.max_candidates);
  TrainResult result;
  std::vector<dynamics::DynamicsProgram> candidates;
  if (config.proposer.kind == "remote") {
    auto proposal = proposer::remote_propose(
        request, {config.proposer.url, config.proposer.api_key_env, config.proposer.timeout_seconds});
    candidates = std::move(proposal.programs);
    result.diagnostics = std::move(proposal.diagnostics);
    if (proposal.fell_back) result.diagnostics.push_back("remote proposer unavailable; used the registry");
  } else {
    candidates = proposer::registry_propose(request);
  }
  result.report = fit::select_program(candidates, data, fit_config);
  return result;
}

// --- prediction ----------------------------------------------------------

Trajectory Prediction::states() const {
  std::vector<State> all = perceived.states();
  all.insert(all.end(), predicted.states().begin(), predicted.states().end());
  return Trajectory(std::move(all));
}

Prediction rollout_from(const fit::FitReport& report, const State& start,
                        const Trajectory& conditioning, const render::RenderConfig& config) {
  const auto prog = report.program();
  const int F = report.conditioning_frames - 1;
  const int T = report.total_frames;
  Prediction out{report.conditioning_frames, T, conditioning, Trajectory({start}), {}, 0, {}};
  std::vector<State> states;
  State s = start;
  for (int t = F + 1; t <= T; ++t) {
    try {
      auto next = dynamics::step(prog, s);
      out.clamp_events += static_cast<int>(next.clamped.size());
      s = std::move(next.state);
    } catch (const Error& e) {
      fail(e.code(), "transition to frame " + std::to_string(t) + " of '" + report.program_id + "': " + e.what());
    }
    out.trace.push_back("transition " + std::to_string(t));
    out.frames.push_back(render::render_state(s, config));
    out.trace.push_back("render " + std::to_string(t));
    states.push_back(s);
  }
  if (states.empty()) fail(ErrorCode::precondition, "nothing to predict: T <= F");
  out.predicted = Trajectory(std::move(states));
  return out;
}

Prediction predict(const fit::FitReport& report, std::span<const Frame> frames,
                   const render::RenderConfig& config, int jobs) {
  const auto seen = static_cast<std::size_t>(report.conditioning_frames);
  if (frames.size() < seen) {
    fail(ErrorCode::precondition, "video has " + std::to_string(frames.size()) +
                                      " frames; the report conditions on " + std::to_string(seen));
  }
  if (config.env != parse_env_kind(report.env)) {
    fail(ErrorCode::schema_mismatch, "video env '" + std::string(to_string(config.env)) +
                                         "' does not match report env '" + report.env + "'");
  }
  const auto perceived = perceive_video(frames.first(seen), config, jobs);
  const auto& s_f = perceived.back();
  auto out = rollout_from(report, s_f, perceived, config);
  std::vector<std::string> trace;
  for (std::size_t t = 0; t < seen; ++t) trace.push_back("perceive " + std::to_string(t));
  trace.insert(trace.end(), out.trace.begin(), out.trace.end());
  out.trace = std::move(trace);
  return out;
}

void save_prediction(const fs::path& dir, const Prediction& p) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < p.frames.size(); ++i) {
    write_ppm(dir / frame_name(p.conditioning_frames + static_cast<int>(i)), p.frames[i]);
  }
  write_text(dir / "states.json", trajectory_to_json(p.states()));
}

State apply_edits(const State& state, const std::vector<Edit>& edits) {
  std::vector<double> values(state.values().begin(), state.values().end());
  for (const auto& e : edits) {
    const auto i = state.schema().require_index(e.attribute);
    switch (e.op) {
      case EditOp::set: values[i] = e.value; break;
      case EditOp::scale: values[i] *= e.value; break;
      case EditOp::negate: values[i] = -values[i]; break;
    }
  }
  return State(state.schema_ref(), std::move(values));
}

// --- evaluation ----------------------------------------------------------

namespace {

std::vector<Frame> frames_from(const fs::path& dir, int first, int last) {
  std::vector<Frame> frames;
  for (int t = first; t <= last; ++t) {
    const auto path = dir / frame_name(t);
    if (!fs::exists(path)) fail(ErrorCode::io, "missing " + path.string());
    frames.push_back(read_ppm(path));
  }
  return frames;
}

bool is_video_dir(const fs::path& dir) { return fs::exists(dir / "video.json"); }

}  // namespace

namespace {

std::map<std::string, double> score(EnvKind env, int F, const std::vector<Frame>& predicted,
                                    const std::optional<Trajectory>& predicted_states,
                                    const std::vector<Frame>& truth_frames,
                                    const std::optional<Trajectory>& truth_states,
                                    const std::vector<std::string>& metrics, int jobs) {
  const auto rc = render::RenderConfig::defaults(env, truth_frames.front().width(),
                                                 truth_frames.front().height());
  const bool balls = env != EnvKind::cartpole;
  const auto& truth = truth_states;
  std::optional<Trajectory> perceived_truth_;
  auto perceived_truth = [&]() -> const Trajectory& {
    if (!perceived_truth_) perceived_truth_ = perceive_video(truth_frames, rc, jobs);
    return *perceived_truth_;
  };
  auto truth_traj = [&]() -> const Trajectory& { return truth ? *truth : perceived_truth(); };
  if (truth_frames.size() != predicted.size() + static_cast<std::size_t>(F) + 1) {
    fail(ErrorCode::shape_mismatch, "prediction covers " + std::to_string(predicted.size()) +
                                        " frames; ground truth has " +
                                        std::to_string(truth_frames.size() - F - 1) + " unseen");
  }

  std::map<std::string, double> out;
  for (const auto& m : metrics) {
    if (m == "velocity_error") {
      if (!balls) continue;
      std::vector<Frame> seq(truth_frames.begin(), truth_frames.begin() + F + 1);
      seq.insert(seq.end(), predicted.begin(), predicted.end());
      const auto perceived = perceive_video(seq, rc, jobs);
      out[m] = metrics::velocity_error(metrics::ball_positions(perceived),
                                       metrics::ball_positions(perceived_truth()), F);
    } else if (m == "velocity_error_state") {
      if (!balls) continue;
      if (!predicted_states) fail(ErrorCode::io, "predicted states are missing");
      out[m] = metrics::velocity_error(metrics::ball_positions(*predicted_states),
                                       metrics::ball_positions(truth_traj()), F);
    } else if (m == "mae" || m == "psnr") {
      const std::vector<Frame> future(truth_frames.begin() + F + 1, truth_frames.end());
      out[m] = m == "mae" ? metrics::mae(predicted, future) : metrics::psnr(predicted, future);
    } else {
      fail(ErrorCode::invalid_argument, "unknown metric '" + m + "'");
    }
  }
  return out;
}

}  // namespace

std::map<std::string, double> score_prediction(const Prediction& prediction, const Video& truth,
                                               const std::vector<std::string>& metrics, int jobs) {
  return score(video_env(truth), truth.last_conditioning_index(), prediction.frames,
               prediction.states(), truth.frames(), truth.truth(), metrics, jobs);
}

std::map<std::string, double> evaluate_video(const fs::path& prediction_dir,
                                             const fs::path& truth_dir,
                                             const std::vector<std::string>& metrics, int jobs) {
  if (!fs::is_directory(prediction_dir)) fail(ErrorCode::dataset_not_found, "no predictions at " + prediction_dir.string());
  const auto info = load_video_info(truth_dir);
  const int F = info.conditioning_frames - 1;
  const int T = info.total_frames;
  std::optional<Trajectory> truth;
  if (fs::exists(truth_dir / "truth.json")) truth = trajectory_from_json(read_text(truth_dir / "truth.json")).first;
  std::optional<Trajectory> states;
  if (fs::exists(prediction_dir / "states.json")) {
    auto [traj, first] = trajectory_from_json(read_text(prediction_dir / "states.json"));
    if (first != 0) fail(ErrorCode::shape_mismatch, "states.json must start at frame 0");
    states = std::move(traj);
  }
  return score(parse_env_kind(info.env), F, frames_from(prediction_dir, F + 1, T), states,
               frames_from(truth_dir, 0, T), truth, metrics, jobs);
}

std::vector<metrics::MetricRow> evaluate(const fs::path& predictions, const fs::path& truth,
                                         const EvalOptions& options) {
  for (const auto& m : options.metrics) {
    if (std::find(kKnownMetrics.begin(), kKnownMetrics.end(), m) == kKnownMetrics.end()) {
      fail(ErrorCode::invalid_argument, "unknown metric '" + m + "'");
    }
  }
  if (!fs::is_directory(truth)) fail(ErrorCode::dataset_not_found, "no ground truth at " + truth.string());
  if (!fs::is_directory(predictions)) fail(ErrorCode::dataset_not_found, "no predictions at " + predictions.string());

  std::vector<std::pair<fs::path, fs::path>> pairs;
  if (is_video_dir(truth)) {
    pairs.emplace_back(predictions, truth);
  } else {
    for (std::size_t k = 0; fs::exists(truth / video_dir_name(k)); ++k) {
      pairs.emplace_back(predictions / video_dir_name(k), truth / video_dir_name(k));
    }
    if (pairs.empty()) fail(ErrorCode::dataset_not_found, "no videos under " + truth.string());
  }

  std::vector<std::map<std::string, double>> scores(pairs.size());
  parallel_for(pairs.size(), options.jobs, [&](std::size_t i) {
    scores[i] = evaluate_video(pairs[i].first, pairs[i].second, options.metrics, 1);
  });
  const auto env = load_video_info(pairs.front().second).env;
  std::vector<metrics::MetricRow> rows;
  for (const auto& m : options.metrics) {
    double sum = 0.0;
    int n = 0;
    for (const auto& s : scores) {
      if (const auto it = s.find(m); it != s.end()) {
        sum += it->second;
        ++n;
      }
    }
    if (n > 0) rows.push_back({env, options.split, m, sum / n, n});
  }
  return rows;
}

std::vector<std::string> threshold_failures(const std::vector<metrics::MetricRow>& rows,
                                            const Thresholds& thresholds) {
  std::vector<std::string> failed;
  for (const auto& r : rows) {
    if (const auto it = thresholds.upper.find(r.metric); it != thresholds.upper.end() && !(r.value <= it->second)) {
      failed.push_back(r.metric);
    }
    if (const auto it = thresholds.lower.find(r.metric); it != thresholds.lower.end() && !(r.value >= it->second)) {
      failed.push_back(r.metric);
    }
  }
  return failed;
}

std::string describe(const fit::FitReport& r) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "program   " << r.program_id << "\n"
     << "env       " << r.env << "\n"
     << "frames    " << r.conditioning_frames << " seen, T = " << r.total_frames << "\n"
     << "loss      " << fit::to_string(r.loss_kind) << " = " << r.final_loss << " ("
     << fit::to_string(r.optimizer) << ", " << r.evaluations << " evaluations)\n";
  if (!r.params.empty()) {
    os << "params\n";
    for (const auto& p : r.params.entries()) {
      os << "  " << std::left << std::setw(12) << p.name << " " << p.value << "  [" << p.lower << ", "
         << p.upper << "]\n";
    }
  }
  if (!r.candidates.empty()) {
    os << "candidates\n";
    for (const auto& c : r.candidates) {
      os << "  " << std::left << std::setw(24) << c.id << " k=" << c.parameters << "  loss " << c.loss << "\n";
    }
  }
  os << "source\n" << r.source;
  if (!r.source.empty() && r.source.back() != '\n') os << "\n";
  return os.str();
}

}  // namespace vidprog::cli
