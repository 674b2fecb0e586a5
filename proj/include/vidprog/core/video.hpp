#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vidprog/core/frame.hpp"
#include "vidprog/core/state.hpp"

namespace vidprog {

// T+1 frames f_0..f_T; the first F+1 condition the prediction.
class Video {
 public:
  Video(std::vector<Frame> frames, int total_frames, int conditioning_frames,
        std::string env_config_id, std::optional<Trajectory> truth = std::nullopt);

  const std::vector<Frame>& frames() const noexcept { return frames_; }
  int total_frames() const noexcept { return total_frames_; }             // T
  int conditioning_frames() const noexcept { return conditioning_frames_; }  // F+1
  int last_conditioning_index() const noexcept { return conditioning_frames_ - 1; }  // F
  const std::string& env_config_id() const noexcept { return env_config_id_; }
  const std::optional<Trajectory>& truth() const noexcept { return truth_; }
  int width() const noexcept { return frames_.front().width(); }
  int height() const noexcept { return frames_.front().height(); }

  friend bool operator==(const Video&, const Video&) = default;

 private:
  std::vector<Frame> frames_;
  int total_frames_;
  int conditioning_frames_;
  std::string env_config_id_;
  std::optional<Trajectory> truth_;
};

struct VideoMeta {
  std::uint64_t seed = 0;
  std::map<std::string, double> params;

  friend bool operator==(const VideoMeta&, const VideoMeta&) = default;
};

class Dataset {
 public:
  Dataset(std::vector<Video> videos, std::vector<VideoMeta> manifest);

  const std::vector<Video>& videos() const noexcept { return videos_; }
  const std::vector<VideoMeta>& manifest() const noexcept { return manifest_; }
  std::size_t size() const noexcept { return videos_.size(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<Video> videos_;
  std::vector<VideoMeta> manifest_;
};

}  // namespace vidprog
