#include "vidprog/evalmetrics/metrics.hpp"

#include <cmath>

#include "json.hpp"
#include "vidprog/core/error.hpp"

namespace vidprog::metrics {

namespace {

using nlohmann::json;

void check_frames(const std::vector<Frame>& a, const std::vector<Frame>& b) {
  if (a.size() != b.size()) fail(ErrorCode::shape_mismatch, "frame sequences differ in length");
  if (a.empty()) fail(ErrorCode::precondition, "empty frame sequence");
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (!a[t].same_shape(b[t])) {
      fail(ErrorCode::shape_mismatch, "frame " + std::to_string(t) + " differs in size");
    }
  }
}

template <typename F>
double mean_over_frames(const std::vector<Frame>& a, const std::vector<Frame>& b, F per_byte) {
  check_frames(a, b);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    const auto& x = a[t].bytes();
    const auto& y = b[t].bytes();
    for (std::size_t i = 0; i < x.size(); ++i) {
      sum += per_byte((static_cast<double>(x[i]) - static_cast<double>(y[i])) / 255.0);
    }
    count += x.size();
  }
  return sum / static_cast<double>(count);
}

json row_json(const MetricRow& r) {
  return {{"env", r.env}, {"split", r.split}, {"metric", r.metric}, {"value", r.value},
          {"n_videos", r.n_videos}};
}

}  // namespace

double velocity_error(const BallPositions& predicted, const BallPositions& truth, int F) {
  if (predicted.size() != truth.size()) fail(ErrorCode::shape_mismatch, "ball counts differ");
  if (predicted.empty()) fail(ErrorCode::precondition, "no balls");
  if (F < 0) fail(ErrorCode::precondition, "F must be >= 0");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const auto& p = predicted[i];
    const auto& q = truth[i];
    if (p.size() != q.size()) fail(ErrorCode::shape_mismatch, "frame counts differ");
    if (static_cast<int>(p.size()) < F + 2) {
      fail(ErrorCode::precondition, "no predicted frames after F");
    }
    for (std::size_t t = static_cast<std::size_t>(F) + 1; t < p.size(); ++t) {
      sum += std::abs((p[t] - p[t - 1]) - (q[t] - q[t - 1]));
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

BallPositions ball_positions(const Trajectory& trajectory) {
  BallPositions out;
  const auto& schema = trajectory.schema();
  for (int k = 1;; ++k) {
    const auto index = schema.index_of("x" + std::to_string(k));
    if (!index) break;
    std::vector<double> xs;
    for (const auto& s : trajectory.states()) xs.push_back(s[*index]);
    out.push_back(std::move(xs));
  }
  if (out.empty()) fail(ErrorCode::schema_mismatch, "trajectory has no ball positions");
  return out;
}

double mae(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorCode::shape_mismatch, "inputs differ in size");
  if (a.empty()) fail(ErrorCode::precondition, "empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return sum / static_cast<double>(a.size());
}

double mse(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorCode::shape_mismatch, "inputs differ in size");
  if (a.empty()) fail(ErrorCode::precondition, "empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
  return sum / static_cast<double>(a.size());
}

double psnr_from_mse(double m) noexcept {
  if (m <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / m));
}

double psnr(std::span<const double> a, std::span<const double> b) {
  return psnr_from_mse(mse(a, b));
}

double mae(const std::vector<Frame>& a, const std::vector<Frame>& b) {
  return mean_over_frames(a, b, [](double d) { return std::abs(d); });
}

double mse(const std::vector<Frame>& a, const std::vector<Frame>& b) {
  return mean_over_frames(a, b, [](double d) { return d * d; });
}

double psnr(const std::vector<Frame>& a, const std::vector<Frame>& b) {
  return psnr_from_mse(mse(a, b));
}

std::string to_json(const MetricRow& row) { return row_json(row).dump(); }

std::string to_json(const std::vector<MetricRow>& rows) {
  json doc = json::array();
  for (const auto& r : rows) doc.push_back(row_json(r));
  return doc.dump(2);
}

std::vector<MetricRow> rows_from_json(std::string_view text) {
  std::vector<MetricRow> rows;
  try {
    for (const auto& r : json::parse(text)) {
      rows.push_back({r.at("env"), r.at("split"), r.at("metric"), r.at("value"), r.at("n_videos")});
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::io, std::string("bad metric rows: ") + e.what());
  }
  return rows;
}

}  // namespace vidprog::metrics
