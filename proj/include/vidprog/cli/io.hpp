#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vidprog/core/frame.hpp"
#include "vidprog/core/state.hpp"
#include "vidprog/core/video.hpp"
#include "vidprog/envsim/envsim.hpp"
#include "vidprog/fit/fit.hpp"

namespace vidprog::cli {

namespace fs = std::filesystem;

// Binary P6, maxval 255, no comments.
std::string encode_ppm(const Frame& frame);
Frame decode_ppm(std::string_view bytes);
void write_ppm(const fs::path& path, const Frame& frame);
Frame read_ppm(const fs::path& path);

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, std::string_view text);

std::string frame_name(int t);  // frame_<t>.ppm
std::string video_dir_name(std::size_t k);  // video_<k>

// --- configuration -------------------------------------------------------

struct ProposerSettings {
  std::string kind = "registry";  // registry | remote
  std::string url;
  std::string api_key_env = "VIDPROG_PROPOSER_KEY";
  int timeout_seconds = 30;
  int max_candidates = 4;
};

struct Thresholds {
  std::map<std::string, double> upper;  // metric <= value
  std::map<std::string, double> lower;  // metric >= value
};

struct ExperimentConfig {
  envsim::EnvConfig env;
  int videos = 10;
  double velocity_scale = 1.0;
  fit::FitConfig fit;
  ProposerSettings proposer;
  Thresholds thresholds;
};

// Unknown keys and type errors throw config errors naming the key and the
// line it appears on.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const fs::path& path);
std::string config_to_json(const ExperimentConfig& config);

// --- datasets ------------------------------------------------------------

// <dir>/manifest.json, <dir>/video_<k>/{frame_<t>.ppm, video.json, truth.json}
void save_dataset(const fs::path& dir, const Dataset& dataset, const envsim::EnvConfig& config);
Dataset load_dataset(const fs::path& dir);

struct VideoInfo {
  std::string env;
  int total_frames = 0;
  int conditioning_frames = 0;
  int width = 0;
  int height = 0;
};

VideoInfo load_video_info(const fs::path& video_dir);
// Frames frame_0.. present in the directory, in order, stopping at the first gap.
std::vector<Frame> load_frames(const fs::path& video_dir);

std::string trajectory_to_json(const Trajectory& trajectory, int first_index = 0);
// Returns the trajectory and the index of its first state.
std::pair<Trajectory, int> trajectory_from_json(std::string_view text);

// --- reports -------------------------------------------------------------

std::string report_to_json(const fit::FitReport& report);
fit::FitReport report_from_json(std::string_view text);

// --- edits ---------------------------------------------------------------

enum class EditOp { set, scale, negate };

struct Edit {
  std::string attribute;
  EditOp op = EditOp::set;
  double value = 0.0;
};

// [{"attribute": ..., "op": "set"|"scale"|"negate", "value": ...}]
std::vector<Edit> parse_edits(std::string_view text);

}  // namespace vidprog::cli
