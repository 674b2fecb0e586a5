#include "vidprog/cli/commands.hpp"

#include <algorithm>
#include <optional>

#include "CLI11.hpp"
#include "vidprog/cli/io.hpp"
#include "vidprog/cli/pipeline.hpp"
#include "vidprog/core/parallel.hpp"
#include "vidprog/envsim/envsim.hpp"

namespace vidprog::cli {

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::config:
    case ErrorCode::syntax:
    case ErrorCode::unsupported_env:
    case ErrorCode::invalid_argument:
    case ErrorCode::unresolved_variable:
    case ErrorCode::namespace_collision:
    case ErrorCode::incomplete_default:
      return kExitConfig;
    case ErrorCode::evaluation:
    case ErrorCode::all_restarts_failed:
      return kExitFit;
    default:
      return kExitData;
  }
}

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

ExperimentConfig config_or_default(const std::string& path) {
  return path.empty() ? ExperimentConfig{} : load_config(path);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = std::min(text.find(',', start), text.size());
    if (comma > start) out.push_back(text.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

render::RenderConfig render_config_for(const VideoInfo& info) {
  return render::RenderConfig::defaults(parse_env_kind(info.env), info.width, info.height);
}

fit::FitReport load_report(const std::string& path) {
  if (!fs::exists(path)) fail(ErrorCode::io, "report not found: " + path);
  return report_from_json(read_text(path));
}

int cmd_gen(const std::string& config_path, const fs::path& out_dir, const Common& c,
            std::ostream& out) {
  auto config = load_config(config_path);
  if (c.seed) config.env.seed = *c.seed;
  auto env = config.velocity_scale == 1.0 ? config.env : config.env.scaled_velocities(config.velocity_scale);
  env.validate();
  const auto dataset = envsim::sample_dataset(env, config.videos, env.seed, c.jobs);
  save_dataset(out_dir, dataset, env);
  out << "wrote " << dataset.size() << " videos to " << out_dir.string() << "\n";
  return kExitOk;
}

int cmd_train(const fs::path& data_dir, const std::string& config_path, const fs::path& report_path,
              const Common& c, std::ostream& out, std::ostream& err) {
  auto config = config_or_default(config_path);
  if (c.seed) config.fit.seed = *c.seed;
  config.fit.jobs = c.jobs;
  const auto dataset = load_dataset(data_dir);
  const auto result = train(dataset, config);
  for (const auto& d : result.diagnostics) err << "proposer: " << d << "\n";
  write_text(report_path, report_to_json(result.report));
  out << "selected " << result.report.program_id << " (loss " << result.report.final_loss << ") -> "
      << report_path.string() << "\n";
  return kExitOk;
}

void predict_one(const fit::FitReport& report, const fs::path& video, const fs::path& dest, int jobs) {
  const auto info = load_video_info(video);
  const auto frames = load_frames(video);
  const auto p = predict(report, frames, render_config_for(info), jobs);
  save_prediction(dest, p);
}

int cmd_predict(const std::string& report_path, const std::string& video, const std::string& data,
                const fs::path& out_dir, const Common& c, std::ostream& out) {
  const auto report = load_report(report_path);
  if (!video.empty()) {
    predict_one(report, video, out_dir, c.jobs);
    out << "predicted frames " << report.conditioning_frames << ".." << report.total_frames << " -> "
        << out_dir.string() << "\n";
    return kExitOk;
  }
  if (!fs::exists(fs::path(data) / "manifest.json")) {
    fail(ErrorCode::dataset_not_found, "no dataset at " + data + " (manifest.json missing)");
  }
  std::size_t n = 0;
  while (fs::exists(fs::path(data) / video_dir_name(n))) ++n;
  if (n == 0) fail(ErrorCode::dataset_not_found, "dataset at " + data + " is empty");
  parallel_for(n, c.jobs, [&](std::size_t k) {
    try {
      predict_one(report, fs::path(data) / video_dir_name(k), out_dir / video_dir_name(k), 1);
    } catch (const Error& e) {
      fail(e.code(), video_dir_name(k) + ": " + e.what());
    }
  });
  out << "predicted " << n << " videos -> " << out_dir.string() << "\n";
  return kExitOk;
}

int cmd_eval(const fs::path& pred, const fs::path& truth, const std::string& metric_list,
             const std::string& split, const std::string& config_path, const std::string& out_path,
             const Common& c, std::ostream& out, std::ostream& err) {
  EvalOptions options;
  if (!metric_list.empty()) options.metrics = split_list(metric_list);
  options.split = split;
  options.jobs = c.jobs;
  const auto config = config_or_default(config_path);
  const auto rows = evaluate(pred, truth, options);
  const auto text = metrics::to_json(rows);
  if (!out_path.empty()) write_text(out_path, text);
  out << text;
  if (!text.empty() && text.back() != '\n') out << "\n";
  const auto failed = threshold_failures(rows, config.thresholds);
  for (const auto& f : failed) err << "threshold not met: " << f << "\n";
  return failed.empty() ? kExitOk : kExitThreshold;
}

int cmd_edit(const std::string& states_path, const std::string& edits_arg,
             const std::string& report_path, const fs::path& out_dir, std::ostream& out) {
  const auto report = load_report(report_path);
  const auto [states, first] = trajectory_from_json(read_text(states_path));
  const int F = report.conditioning_frames - 1;
  const int at = F - first;
  if (at < 0 || static_cast<std::size_t>(at) >= states.size()) {
    fail(ErrorCode::precondition, "states file does not contain the conditioning state s_" + std::to_string(F));
  }
  const auto edits = parse_edits(!edits_arg.empty() && edits_arg.front() == '[' ? edits_arg : read_text(edits_arg));
  const auto edited = apply_edits(states[static_cast<std::size_t>(at)], edits);
  std::vector<State> seen(states.states().begin(), states.states().begin() + at);
  seen.push_back(edited);
  // Width and height are not part of the state; reuse the report's env defaults.
  const auto env = envsim::EnvConfig::defaults(parse_env_kind(report.env));
  const auto rc = render::RenderConfig::defaults(env.kind, env.width, env.height);
  auto p = rollout_from(report, edited, Trajectory(std::move(seen)), rc);
  save_prediction(out_dir, p);
  out << "applied " << edits.size() << " edits; wrote " << p.frames.size() << " frames -> "
      << out_dir.string() << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Programmatic video prediction", "vidprog"};
  app.require_subcommand(1);
  Common common;
  std::uint64_t seed = 0;
  std::vector<CLI::Option*> seed_options;
  auto add_common = [&](CLI::App* sub) {
    seed_options.push_back(sub->add_option("--seed", seed, "Override the configured seed"));
    sub->add_option("--jobs", common.jobs, "Worker threads")->check(CLI::PositiveNumber);
  };

  std::string config_path, out_path, data_dir, report_path, video_dir, pred_dir, truth_dir;
  std::string metric_list, split = "test", states_path, edits_arg;

  auto* gen = app.add_subcommand("gen", "Generate a dataset");
  gen->add_option("--config", config_path, "Experiment config (JSON)")->required();
  gen->add_option("--out", out_path, "Dataset directory")->required();
  add_common(gen);

  auto* train_cmd = app.add_subcommand("train", "Select and fit a dynamics program");
  train_cmd->add_option("--data", data_dir, "Dataset directory")->required();
  train_cmd->add_option("--config", config_path, "Experiment config (JSON)");
  train_cmd->add_option("--out", out_path, "Report path")->required();
  add_common(train_cmd);

  auto* predict_cmd = app.add_subcommand("predict", "Predict the unseen frames");
  predict_cmd->add_option("--report", report_path, "Fit report")->required();
  auto* video_opt = predict_cmd->add_option("--video", video_dir, "Video directory");
  auto* data_opt = predict_cmd->add_option("--data", data_dir, "Dataset directory");
  video_opt->excludes(data_opt);
  predict_cmd->add_option("--out", out_path, "Output directory")->required();
  add_common(predict_cmd);

  auto* eval_cmd = app.add_subcommand("eval", "Score predictions");
  eval_cmd->add_option("--pred", pred_dir, "Predictions (video or dataset layout)")->required();
  eval_cmd->add_option("--truth", truth_dir, "Ground truth (video or dataset layout)")->required();
  eval_cmd->add_option("--metrics", metric_list, "Comma-separated metric names");
  eval_cmd->add_option("--split", split, "Split label for the rows");
  eval_cmd->add_option("--config", config_path, "Config holding thresholds");
  eval_cmd->add_option("--out", out_path, "Also write the rows here");
  add_common(eval_cmd);

  auto* edit_cmd = app.add_subcommand("edit", "Counterfactual re-simulation");
  edit_cmd->add_option("--states", states_path, "states.json from predict")->required();
  edit_cmd->add_option("--edits", edits_arg, "Edit file or inline JSON list")->required();
  edit_cmd->add_option("--report", report_path, "Fit report")->required();
  edit_cmd->add_option("--out", out_path, "Output directory")->required();

  auto* inspect_cmd = app.add_subcommand("inspect", "Print a report");
  inspect_cmd->add_option("report", report_path, "Fit report")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return e.get_exit_code() == 0 ? kExitOk : kExitConfig;
  }

  for (const auto* opt : seed_options) {
    if (opt->count() > 0) common.seed = seed;
  }

  try {
    if (*gen) return cmd_gen(config_path, out_path, common, out);
    if (*train_cmd) return cmd_train(data_dir, config_path, out_path, common, out, err);
    if (*predict_cmd) {
      if (video_dir.empty() && data_dir.empty()) {
        err << "error: predict needs --video or --data\n";
        return kExitConfig;
      }
      return cmd_predict(report_path, video_dir, data_dir, out_path, common, out);
    }
    if (*eval_cmd) {
      return cmd_eval(pred_dir, truth_dir, metric_list, split, config_path, out_path, common, out, err);
    }
    if (*edit_cmd) return cmd_edit(states_path, edits_arg, report_path, out_path, out);
    if (*inspect_cmd) {
      out << describe(load_report(report_path));
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error [io]: " << e.what() << "\n";
    return kExitData;
  }
  return kExitConfig;
}

}  // namespace vidprog::cli
