#include "vidprog/core/video.hpp"

#include "vidprog/core/error.hpp"

namespace vidprog {

Video::Video(std::vector<Frame> frames, int total_frames, int conditioning_frames,
             std::string env_config_id, std::optional<Trajectory> truth)
    : frames_(std::move(frames)),
      total_frames_(total_frames),
      conditioning_frames_(conditioning_frames),
      env_config_id_(std::move(env_config_id)),
      truth_(std::move(truth)) {
  const int last = conditioning_frames_ - 1;
  if (last < 0 || last >= total_frames_) {
    fail(ErrorCode::invalid_argument, "need 0 <= F < T, got F=" + std::to_string(last) +
                                          " T=" + std::to_string(total_frames_));
  }
  if (frames_.size() != static_cast<std::size_t>(total_frames_) + 1) {
    fail(ErrorCode::shape_mismatch, "video has " + std::to_string(frames_.size()) +
                                        " frames, expected T+1 = " +
                                        std::to_string(total_frames_ + 1));
  }
  for (const auto& f : frames_) {
    if (!f.same_shape(frames_.front())) {
      fail(ErrorCode::shape_mismatch, "video frames differ in dimensions");
    }
  }
  if (truth_ && truth_->size() != frames_.size()) {
    fail(ErrorCode::shape_mismatch, "ground truth has " + std::to_string(truth_->size()) +
                                        " states for " + std::to_string(frames_.size()) +
                                        " frames");
  }
}

Dataset::Dataset(std::vector<Video> videos, std::vector<VideoMeta> manifest)
    : videos_(std::move(videos)), manifest_(std::move(manifest)) {
  if (videos_.empty()) fail(ErrorCode::invalid_argument, "dataset needs at least one video");
  if (manifest_.size() != videos_.size()) {
    fail(ErrorCode::shape_mismatch, "manifest size does not match video count");
  }
  for (const auto& v : videos_) {
    if (v.env_config_id() != videos_.front().env_config_id()) {
      fail(ErrorCode::schema_mismatch, "dataset mixes environments");
    }
    if (v.truth() && videos_.front().truth() &&
        !same_schema(v.truth()->schema_ref(), videos_.front().truth()->schema_ref())) {
      fail(ErrorCode::schema_mismatch, "dataset mixes schemas");
    }
  }
}

}  // namespace vidprog
