#include "vidprog/fit/fit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include "vidprog/core/error.hpp"
#include "vidprog/core/parallel.hpp"
#include "vidprog/core/rng.hpp"
#include "vidprog/core/schemas.hpp"

namespace vidprog::fit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_data(const dynamics::DynamicsProgram& prog, const FitData& data) {
  if (data.perceived.empty()) fail(ErrorCode::precondition, "no training videos");
  if (data.conditioning_frames < 1) {
    fail(ErrorCode::precondition, "at least one conditioning frame is required");
  }
  for (const auto& traj : data.perceived) {
    if (static_cast<int>(traj.size()) < data.conditioning_frames + 1) {
      fail(ErrorCode::precondition, "trajectory shorter than F+2 states");
    }
    if (!same_schema(traj.schema_ref(), prog.schema_ref())) {
      fail(ErrorCode::schema_mismatch, "trajectory schema '" + traj.schema().env_id() +
                                           "' does not match program '" + prog.id() + "'");
    }
  }
}

}  // namespace

std::string_view to_string(LossKind kind) {
  return kind == LossKind::surrogate ? "surrogate" : "pixel";
}

std::string_view to_string(OptimizerKind kind) {
  return kind == OptimizerKind::powell ? "powell" : "lbfgs-fd";
}

LossKind parse_loss_kind(std::string_view text) {
  if (text == "surrogate") return LossKind::surrogate;
  if (text == "pixel") return LossKind::pixel;
  fail(ErrorCode::config, "unknown loss '" + std::string(text) + "'");
}

OptimizerKind parse_optimizer_kind(std::string_view text) {
  if (text == "powell") return OptimizerKind::powell;
  if (text == "lbfgs-fd") return OptimizerKind::lbfgs_fd;
  fail(ErrorCode::config, "unknown optimizer '" + std::string(text) + "'");
}

void FitConfig::validate() const {
  if (max_iterations < 1) fail(ErrorCode::config, "max_iterations must be >= 1");
  if (max_evaluations < max_iterations) {
    fail(ErrorCode::config, "max_evaluations must be >= max_iterations");
  }
  if (!(tolerance > 0.0)) fail(ErrorCode::config, "tolerance must be > 0");
  if (restarts < 1) fail(ErrorCode::config, "restarts must be >= 1");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) fail(ErrorCode::config, "sigma must be > 0");
  if (jobs < 1) fail(ErrorCode::config, "jobs must be >= 1");
}

double surrogate_loss(const dynamics::DynamicsProgram& prog, const FitData& data) {
  check_data(prog, data);
  const auto& schema = prog.schema();
  const int F = data.last_conditioning_index();
  double total = 0.0;
  try {
    for (const auto& traj : data.perceived) {
      State s = traj[static_cast<std::size_t>(F)];
      for (std::size_t t = static_cast<std::size_t>(F) + 1; t < traj.size(); ++t) {
        s = dynamics::transition(prog, s);
        const auto& ref = traj[t];
        for (std::size_t i = 0; i < schema.size(); ++i) {
          double d = s[i] - ref[i];
          if (schema[i].role == Role::angle) d = wrap_angle(d);
          total += d * d;
        }
      }
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::evaluation) return kInf;
    throw;
  }
  return std::isfinite(total) ? total : kInf;
}

double frame_squared_error(const Frame& a, const Frame& b) {
  if (!a.same_shape(b)) fail(ErrorCode::shape_mismatch, "frames differ in size");
  const auto& x = a.bytes();
  const auto& y = b.bytes();
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = (static_cast<double>(x[i]) - static_cast<double>(y[i])) / 255.0;
    sum += d * d;
  }
  return sum;
}

double pixel_loss(const dynamics::DynamicsProgram& prog, const FitData& data, double sigma) {
  check_data(prog, data);
  if (!data.render) fail(ErrorCode::precondition, "pixel loss needs a render config");
  if (data.frames.size() != data.perceived.size()) {
    fail(ErrorCode::shape_mismatch, "frames and trajectories differ in count");
  }
  const int F = data.last_conditioning_index();
  double total = 0.0;
  try {
    for (std::size_t v = 0; v < data.perceived.size(); ++v) {
      const auto& traj = data.perceived[v];
      const auto& frames = data.frames[v];
      if (frames.size() != traj.size()) {
        fail(ErrorCode::shape_mismatch, "frame count differs from trajectory length");
      }
      State s = traj[static_cast<std::size_t>(F)];
      for (std::size_t t = static_cast<std::size_t>(F) + 1; t < traj.size(); ++t) {
        s = dynamics::transition(prog, s);
        total += frame_squared_error(render::render_state(s, *data.render), frames[t]);
      }
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::evaluation) return kInf;
    throw;
  }
  return total / (sigma * sigma);
}

double loss(const dynamics::DynamicsProgram& prog, const FitData& data, const FitConfig& config) {
  return config.loss == LossKind::surrogate ? surrogate_loss(prog, data)
                                            : pixel_loss(prog, data, config.sigma);
}

dynamics::DynamicsProgram FitReport::program() const {
  return {program_id, schema_for(parse_env_kind(env)), params, source};
}

FitReport fit_params(const dynamics::DynamicsProgram& prog, const FitData& data,
                     const FitConfig& config) {
  config.validate();
  check_data(prog, data);
  const auto& params = prog.params();
  const Box box{params.lower(), params.upper()};

  // The optimizers work on the unit cube; u maps affinely onto the box.
  const std::size_t n = params.size();
  auto to_theta = [&](const std::vector<double>& u) {
    std::vector<double> theta(n);
    for (std::size_t i = 0; i < n; ++i) {
      theta[i] = std::clamp(box.lower[i] + u[i] * (box.upper[i] - box.lower[i]), box.lower[i],
                            box.upper[i]);
    }
    return theta;
  };
  auto to_unit = [&](const std::vector<double>& theta) {
    std::vector<double> u(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = box.upper[i] - box.lower[i];
      if (w > 0.0) u[i] = (theta[i] - box.lower[i]) / w;
    }
    return u;
  };
  const Box unit{std::vector<double>(n, 0.0), std::vector<double>(n, 1.0)};

  std::atomic<int> errors{0};
  const Objective objective = [&](const std::vector<double>& u) {
    const double v = loss(prog.with_values(to_theta(u)), data, config);
    if (!std::isfinite(v)) ++errors;
    return v;
  };

  FitReport report;
  report.program_id = prog.id();
  report.env = prog.schema().env_id();
  report.source = prog.source();
  report.loss_kind = config.loss;
  report.optimizer = config.optimizer;
  report.conditioning_frames = data.conditioning_frames;
  report.total_frames = static_cast<int>(data.perceived.front().size()) - 1;

  std::vector<OptimizeResult> runs;
  if (params.empty()) {
    OptimizeResult r;
    r.f = objective({});
    r.trace = {r.f};
    r.evaluations = 1;
    runs.push_back(std::move(r));
    report.restarts.push_back({0, {}, {}, runs[0].f, 1, 0, "no-parameters"});
  } else {
    std::vector<std::vector<double>> starts{params.values()};
    SplitMix64 rng(config.seed);
    for (int r = 1; r < config.restarts; ++r) {
      std::vector<double> x0(params.size());
      for (std::size_t i = 0; i < x0.size(); ++i) x0[i] = rng.uniform(box.lower[i], box.upper[i]);
      starts.push_back(std::move(x0));
    }
    runs.resize(starts.size());
    parallel_for(starts.size(), config.jobs, [&](std::size_t r) {
      runs[r] = config.optimizer == OptimizerKind::powell
                    ? powell_minimize(objective, to_unit(starts[r]), unit, config.options())
                    : lbfgs_fd_minimize(objective, to_unit(starts[r]), unit, config.options());
      runs[r].x = to_theta(runs[r].x);
    });
    for (std::size_t r = 0; r < runs.size(); ++r) {
      report.restarts.push_back({static_cast<int>(r), starts[r], runs[r].x, runs[r].f,
                                 runs[r].evaluations, runs[r].iterations,
                                 to_string(runs[r].reason)});
    }
  }

  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].f < runs[best].f) best = r;
  }
  for (const auto& r : runs) report.evaluations += r.evaluations;
  report.evaluation_errors = errors.load();
  if (!std::isfinite(runs[best].f)) {
    fail(ErrorCode::all_restarts_failed,
         "every restart of '" + prog.id() + "' ended with a non-finite loss");
  }
  report.final_loss = runs[best].f;
  report.trace = runs[best].trace;
  const auto fitted = params.empty() ? prog : prog.with_values(box.project(runs[best].x));
  report.params = fitted.params();

  const int F = data.last_conditioning_index();
  for (const auto& traj : data.perceived) {
    const int steps = static_cast<int>(traj.size()) - 1 - F;
    report.clamp_events += static_cast<int>(
        dynamics::rollout(fitted, traj[static_cast<std::size_t>(F)], steps).clamps.size());
  }
  return report;
}

FitReport select_program(const std::vector<dynamics::DynamicsProgram>& candidates,
                         const FitData& data, const FitConfig& config) {
  if (candidates.empty()) fail(ErrorCode::precondition, "no candidate programs");
  std::vector<std::optional<FitReport>> reports;
  std::vector<CandidateSummary> table;
  std::string failures;
  for (const auto& c : candidates) {
    try {
      reports.push_back(fit_params(c, data, config));
      table.push_back({c.id(), c.params().size(), reports.back()->final_loss});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::all_restarts_failed) throw;
      reports.emplace_back();
      table.push_back({c.id(), c.params().size(), kInf});
      failures += std::string(e.what()) + "\n";
    }
  }
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (!reports[i]) continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto& a = table[i];
    const auto& b = table[*best];
    if (a.loss < b.loss - kTieTolerance) {
      best = i;
    } else if (std::abs(a.loss - b.loss) <= kTieTolerance) {
      if (a.parameters < b.parameters || (a.parameters == b.parameters && a.id < b.id)) best = i;
    }
  }
  if (!best) fail(ErrorCode::all_restarts_failed, "every candidate failed:\n" + failures);
  FitReport report = std::move(*reports[*best]);
  report.candidates = std::move(table);
  return report;
}

}  // namespace vidprog::fit
