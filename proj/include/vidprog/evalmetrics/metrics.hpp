#pragma once

#include <span>
#include <string>
#include <vector>

#include "vidprog/core/frame.hpp"
#include "vidprog/core/state.hpp"

namespace vidprog::metrics {

// positions[i][t]: x of ball i at frame t = 0..T.
using BallPositions = std::vector<std::vector<double>>;

// Mean over balls and t = F+1..T of |(x̂_t - x̂_{t-1}) - (x_t - x_{t-1})|.
double velocity_error(const BallPositions& predicted, const BallPositions& truth, int F);

// x<k> attributes of a ball trajectory, one row per ball.
BallPositions ball_positions(const Trajectory& trajectory);

inline constexpr double kPsnrCap = 99.0;

// Values in [0, 1].
double mae(std::span<const double> a, std::span<const double> b);
double mse(std::span<const double> a, std::span<const double> b);
double psnr(std::span<const double> a, std::span<const double> b);
double psnr_from_mse(double mse) noexcept;

// Frame sequences, bytes mapped to [0, 1].
double mae(const std::vector<Frame>& a, const std::vector<Frame>& b);
double mse(const std::vector<Frame>& a, const std::vector<Frame>& b);
double psnr(const std::vector<Frame>& a, const std::vector<Frame>& b);

struct MetricRow {
  std::string env;
  std::string split;
  std::string metric;
  double value = 0.0;
  int n_videos = 0;

  friend bool operator==(const MetricRow&, const MetricRow&) = default;
};

// {"env", "split", "metric", "value", "n_videos"}
std::string to_json(const MetricRow& row);
std::string to_json(const std::vector<MetricRow>& rows);
std::vector<MetricRow> rows_from_json(std::string_view text);

}  // namespace vidprog::metrics
