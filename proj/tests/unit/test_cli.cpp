#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "vidprog/cli/commands.hpp"
#include "vidprog/cli/io.hpp"
#include "vidprog/cli/pipeline.hpp"
#include "vidprog/core/schemas.hpp"
#include "vidprog/envsim/envsim.hpp"
#include "vidprog/perceive/perceive.hpp"

using namespace vidprog;
using namespace vidprog::cli;

namespace {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("vidprog_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run vidprog_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path write_config(const TempDir& dir, const std::string& name, const std::string& text) {
  const auto path = dir / name;
  write_text(path, text);
  return path;
}

std::string gen_config(const std::string& env, int videos, int seed) {
  return "{\n  \"env\": \"" + env + "\",\n  \"videos\": " + std::to_string(videos) +
         ",\n  \"seed\": " + std::to_string(seed) + "\n}\n";
}

// Every regular file under root with its bytes, keyed by relative path.
std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = read_text(e.path());
  }
  return files;
}

int count_ppm(const fs::path& dir) {
  int n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.path().extension() == ".ppm";
  return n;
}

double pole_extent_px(const Frame& frame) {
  const auto rc = render::RenderConfig::defaults(EnvKind::cartpole, frame.width(), frame.height());
  const auto m = perceive::moments(perceive::segment_color(frame, rc.style("pole").color));
  return m.extent * frame.width();
}

double cart_x(const Frame& frame) {
  const auto rc = render::RenderConfig::defaults(EnvKind::cartpole, frame.width(), frame.height());
  return perceive::perceive_cartpole_frame(frame, rc).cart_x;
}

}  // namespace

TEST_CASE("ppm round trip is bit-exact") {
  Frame f(5, 3);
  f.set(1, 2, {1, 2, 3});
  f.set(4, 0, {255, 0, 128});
  const auto bytes = encode_ppm(f);
  CHECK(bytes.substr(0, 11) == "P6\n5 3\n255\n");
  CHECK(bytes.size() == 11 + 5 * 3 * 3);
  CHECK(decode_ppm(bytes) == f);
  CHECK(encode_ppm(decode_ppm(bytes)) == bytes);
  CHECK_THROWS_AS(decode_ppm("P3\n1 1\n255\n"), Error);
  CHECK_THROWS_AS(decode_ppm(bytes.substr(0, bytes.size() - 1)), Error);
  CHECK_THROWS_AS(decode_ppm("P6\n1 1\n65535\n"), Error);
}

TEST_CASE("config parsing names the offending key and line") {
  const auto c = parse_config(
      "{\"env\": \"cartpole\", \"videos\": 4, \"fit\": {\"optimizer\": \"lbfgs-fd\", \"restarts\": 2},"
      " \"thresholds\": {\"psnr\": {\"min\": 28}}}");
  CHECK(c.env.kind == EnvKind::cartpole);
  CHECK(c.env.conditioning_frames == 10);
  CHECK(c.videos == 4);
  CHECK(c.fit.optimizer == fit::OptimizerKind::lbfgs_fd);
  CHECK(c.fit.restarts == 2);
  CHECK(c.thresholds.lower.at("psnr") == 28);

  auto message = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::config);
      return std::string(e.what());
    }
    FAIL("expected a config error");
    return std::string();
  };
  const auto unknown = message("{\n  \"env\": \"phyworld-uniform\",\n  \"velocity_rnage\": [0, 1]\n}");
  CHECK(unknown.find("velocity_rnage") != std::string::npos);
  CHECK(unknown.find("line 3") != std::string::npos);
  CHECK(message("{\"env\": \"phyworld-uniform\", \"fit\": {\"restarts\": \"five\"}}").find("fit.restarts") !=
        std::string::npos);
  CHECK(message("{\"env\": \"phyworld-uniform\",\n\"width\": }").find("line 2") != std::string::npos);
  CHECK(message("{\"env\": \"pong\"}").find("env") != std::string::npos);
  CHECK(message("{\"env\": \"phyworld-uniform\", \"width\": 8}").find("width") != std::string::npos);
}

TEST_CASE("gen writes the documented layout, deterministically") {
  TempDir dir;
  const auto config = write_config(dir, "u.json", gen_config("phyworld-uniform", 10, 3));
  const auto a = dir / "a";
  const auto b = dir / "b";
  REQUIRE(vidprog_run({"gen", "--config", config.string(), "--out", a.string()}).code == 0);
  REQUIRE(vidprog_run({"gen", "--config", config.string(), "--out", b.string(), "--jobs", "3"}).code == 0);
  CHECK(fs::exists(a / "manifest.json"));
  for (int k = 0; k < 10; ++k) {
    const auto v = a / video_dir_name(static_cast<std::size_t>(k));
    CHECK(count_ppm(v) == 20);
    CHECK(fs::exists(v / "truth.json"));
    CHECK(fs::exists(v / "video.json"));
  }
  CHECK_FALSE(fs::exists(a / "video_10"));
  CHECK(snapshot(a) == snapshot(b));

  const auto loaded = load_dataset(a);
  const auto direct = envsim::sample_dataset(load_config(config).env, 10, 3);
  CHECK(loaded == direct);

  const auto other = dir / "c";
  REQUIRE(vidprog_run({"gen", "--config", config.string(), "--out", other.string(), "--seed", "4"}).code == 0);
  CHECK(snapshot(a) != snapshot(other));
}

TEST_CASE("gen rejects a bad key by name with exit code 2") {
  TempDir dir;
  const auto config = write_config(dir, "bad.json", "{\n  \"env\": \"phyworld-uniform\",\n  \"vidoes\": 3\n}\n");
  const auto r = vidprog_run({"gen", "--config", config.string(), "--out", (dir / "d").string()});
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("vidoes") != std::string::npos);
  CHECK(r.err.find("line 3") != std::string::npos);
  CHECK(vidprog_run({"gen", "--out", "x"}).code == kExitConfig);
  CHECK(vidprog_run({"frobnicate"}).code == kExitConfig);
}

TEST_CASE("train, predict, eval and inspect on a uniform dataset") {
  TempDir dir;
  const auto train_cfg = write_config(dir, "train.json", gen_config("phyworld-uniform", 10, 1));
  const auto test_cfg = write_config(dir, "test.json", gen_config("phyworld-uniform", 3, 500));
  REQUIRE(vidprog_run({"gen", "--config", train_cfg.string(), "--out", (dir / "train").string()}).code == 0);
  REQUIRE(vidprog_run({"gen", "--config", test_cfg.string(), "--out", (dir / "test").string()}).code == 0);

  const auto report = dir / "report.json";
  const auto t = vidprog_run({"train", "--data", (dir / "train").string(), "--out", report.string()});
  REQUIRE(t.code == 0);
  const auto r = report_from_json(read_text(report));
  CHECK(r.program_id == "uniform-inertia");
  CHECK(r.source.find("x1 <- x1 + vx1;") != std::string::npos);
  CHECK(r.candidates.size() == 3);
  CHECK(report_to_json(r) == read_text(report));

  const auto shown = vidprog_run({"inspect", report.string()});
  CHECK(shown.code == 0);
  CHECK(shown.out.find("uniform-inertia") != std::string::npos);

  const auto pred = dir / "pred";
  REQUIRE(vidprog_run({"predict", "--report", report.string(), "--video", (dir / "test" / "video_0").string(),
                       "--out", pred.string()})
              .code == 0);
  CHECK(count_ppm(pred) == 17);
  CHECK(fs::exists(pred / "frame_3.ppm"));
  CHECK(fs::exists(pred / "frame_19.ppm"));
  CHECK(trajectory_from_json(read_text(pred / "states.json")).first.size() == 20);

  const auto preds = dir / "preds";
  REQUIRE(vidprog_run({"predict", "--report", report.string(), "--data", (dir / "test").string(), "--out",
                       preds.string(), "--jobs", "2"})
              .code == 0);
  const auto e = vidprog_run({"eval", "--pred", preds.string(), "--truth", (dir / "test").string()});
  REQUIRE(e.code == 0);
  const auto rows = metrics::rows_from_json(e.out);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].metric == "velocity_error");
  CHECK(rows[0].n_videos == 3);
  CHECK(rows[0].value <= 0.02);

  const auto strict = write_config(dir, "strict.json",
                                   "{\"thresholds\": {\"velocity_error\": {\"max\": 0}, \"psnr\": {\"min\": 1}}}");
  const auto failed = vidprog_run({"eval", "--pred", preds.string(), "--truth", (dir / "test").string(),
                                   "--config", strict.string()});
  CHECK(failed.code == kExitThreshold);
  CHECK(failed.err.find("velocity_error") != std::string::npos);
  CHECK(vidprog_run({"eval", "--pred", preds.string(), "--truth", (dir / "test").string(), "--metrics",
                     "fvd"})
            .code == kExitConfig);
}

TEST_CASE("train on a single video yields a valid report") {
  TempDir dir;
  const auto cfg = write_config(dir, "one.json", gen_config("phyworld-uniform", 1, 9));
  REQUIRE(vidprog_run({"gen", "--config", cfg.string(), "--out", (dir / "d").string()}).code == 0);
  const auto report = dir / "r.json";
  REQUIRE(vidprog_run({"train", "--data", (dir / "d").string(), "--out", report.string()}).code == 0);
  const auto r = report_from_json(read_text(report));
  CHECK(r.program_id == "uniform-inertia");
  CHECK(std::isfinite(r.final_loss));
}

TEST_CASE("train on an empty directory is dataset-not-found") {
  TempDir dir;
  fs::create_directories(dir / "empty");
  const auto r = vidprog_run({"train", "--data", (dir / "empty").string(), "--out", (dir / "r.json").string()});
  CHECK(r.code == kExitData);
  CHECK(r.err.find("dataset-not-found") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "r.json"));
}

TEST_CASE("predict follows perceive then transition/render pairs") {
  const auto env = envsim::EnvConfig::defaults(EnvKind::phyworld_uniform);
  const auto train_set = envsim::sample_dataset(env, 3, 40);
  ExperimentConfig config;
  config.env = env;
  const auto report = train(train_set, config).report;
  const auto video = envsim::generate(env, 77).video;
  const auto p = predict(report, video.frames(), render_config_for(video));

  std::vector<std::string> expected;
  for (int t = 0; t <= 2; ++t) expected.push_back("perceive " + std::to_string(t));
  for (int t = 3; t <= 19; ++t) {
    expected.push_back("transition " + std::to_string(t));
    expected.push_back("render " + std::to_string(t));
  }
  CHECK(p.trace == expected);
  CHECK(p.frames.size() == 17);
  CHECK(p.perceived.size() == 3);

  // Frames past F must not influence the result.
  std::vector<Frame> seen(video.frames().begin(), video.frames().begin() + 3);
  const auto only_seen = predict(report, seen, render_config_for(video));
  CHECK(only_seen.frames == p.frames);

  std::vector<Frame> short_video(video.frames().begin(), video.frames().begin() + 2);
  try {
    predict(report, short_video, render_config_for(video));
    FAIL("expected a precondition error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::precondition);
  }
}

TEST_CASE("predict rejects a short video directory with exit code 3") {
  TempDir dir;
  const auto env = envsim::EnvConfig::defaults(EnvKind::phyworld_uniform);
  const auto data = envsim::sample_dataset(env, 2, 5);
  save_dataset(dir / "d", data, env);
  ExperimentConfig config;
  write_text(dir / "r.json", report_to_json(train(data, config).report));
  for (int t = 2; t <= 19; ++t) fs::remove(dir / "d" / "video_1" / frame_name(t));
  const auto r = vidprog_run({"predict", "--report", (dir / "r.json").string(), "--video",
                              (dir / "d" / "video_1").string(), "--out", (dir / "p").string()});
  CHECK(r.code == kExitData);
  CHECK(r.err.find("precondition") != std::string::npos);
}

TEST_CASE("eval of a perfect copy is all zero") {
  TempDir dir;
  const auto env = envsim::EnvConfig::defaults(EnvKind::phyworld_collision);
  const auto data = envsim::sample_dataset(env, 2, 11);
  save_dataset(dir / "truth", data, env);
  for (std::size_t k = 0; k < 2; ++k) {
    const auto& v = data.videos()[k];
    const auto out = dir / "pred" / video_dir_name(k);
    for (int t = 3; t <= 19; ++t) write_ppm(out / frame_name(t), v.frames()[static_cast<std::size_t>(t)]);
    write_text(out / "states.json", trajectory_to_json(*v.truth()));
  }
  const auto r = vidprog_run({"eval", "--pred", (dir / "pred").string(), "--truth", (dir / "truth").string(),
                              "--split", "iid"});
  REQUIRE(r.code == 0);
  const auto rows = metrics::rows_from_json(r.out);
  REQUIRE(rows.size() == 4);
  for (const auto& row : rows) {
    CHECK(row.split == "iid");
    CHECK(row.env == "phyworld-collision");
    if (row.metric == "psnr") CHECK(row.value == metrics::kPsnrCap);
    else CHECK(row.value == 0.0);
  }
  CHECK(vidprog_run({"eval", "--pred", (dir / "nope").string(), "--truth", (dir / "truth").string()}).code ==
        kExitData);
}

TEST_CASE("cartpole predict and counterfactual edits") {
  TempDir dir;
  const auto env = envsim::EnvConfig::defaults(EnvKind::cartpole);
  const auto data = envsim::sample_dataset(env, 3, 21);
  save_dataset(dir / "d", data, env);
  ExperimentConfig config;
  config.fit.optimizer = fit::OptimizerKind::lbfgs_fd;
  config.fit.restarts = 2;
  const auto report = dir / "r.json";
  write_text(report, report_to_json(train(data, config).report));

  const auto pred = dir / "pred";
  REQUIRE(vidprog_run({"predict", "--report", report.string(), "--video", (dir / "d" / "video_0").string(),
                       "--out", pred.string()})
              .code == 0);
  CHECK(count_ppm(pred) == 10);
  CHECK(fs::exists(pred / "frame_10.ppm"));

  const auto states = (pred / "states.json").string();
  const auto doubled = dir / "doubled";
  REQUIRE(vidprog_run({"edit", "--states", states, "--edits",
                       R"([{"attribute": "pole_length", "op": "scale", "value": 2}])", "--report",
                       report.string(), "--out", doubled.string()})
              .code == 0);
  for (int t = 10; t <= 19; ++t) {
    const double before = pole_extent_px(read_ppm(pred / frame_name(t)));
    const double after = pole_extent_px(read_ppm(doubled / frame_name(t)));
    CHECK(std::abs(after - 2.0 * before) <= 2.0);
  }

  write_text(dir / "negate.json", R"([{"attribute": "cart_velocity", "op": "negate"}])");
  const auto reversed = dir / "reversed";
  REQUIRE(vidprog_run({"edit", "--states", states, "--edits", (dir / "negate.json").string(), "--report",
                       report.string(), "--out", reversed.string()})
              .code == 0);
  const auto [traj, first] = trajectory_from_json(read_text(states));
  CHECK(first == 0);
  const double v = attribute(traj[9], "cart_velocity");
  const auto edited = trajectory_from_json(read_text(reversed / "states.json")).first;
  CHECK(attribute(edited[9], "cart_velocity") == -v);
  CHECK(attribute(edited[10], "cart_position") - attribute(edited[9], "cart_position") ==
        doctest::Approx(-(attribute(traj[10], "cart_position") - attribute(traj[9], "cart_position")))
            .epsilon(0.2));

  const auto bad = vidprog_run({"edit", "--states", states, "--edits",
                                R"([{"attribute": "pole_mass", "op": "set", "value": 1}])", "--report",
                                report.string(), "--out", (dir / "bad").string()});
  CHECK(bad.code == kExitData);
  CHECK(bad.err.find("pole_mass") != std::string::npos);
  const auto oob = vidprog_run({"edit", "--states", states, "--edits",
                                R"([{"attribute": "cart_position", "op": "set", "value": 7}])", "--report",
                                report.string(), "--out", (dir / "oob").string()});
  CHECK(oob.code == kExitData);
  CHECK(oob.err.find("out-of-bounds") != std::string::npos);
}

TEST_CASE("apply_edits semantics") {
  const auto s = envsim::to_schema_state({0.5, 1.0, 0.02, -0.3}, {});
  const auto e = apply_edits(s, {{"pole_length", EditOp::scale, 2.0},
                                 {"cart_velocity", EditOp::negate, 0.0},
                                 {"pole_angle", EditOp::set, 0.1}});
  CHECK(attribute(e, "pole_length") == 2.0 * attribute(s, "pole_length"));
  CHECK(attribute(e, "cart_velocity") == -attribute(s, "cart_velocity"));
  CHECK(attribute(e, "pole_angle") == 0.1);
  CHECK(attribute(e, "cart_position") == attribute(s, "cart_position"));
  CHECK_THROWS_AS(apply_edits(s, {{"speed", EditOp::set, 1.0}}), Error);
  CHECK_THROWS_AS(parse_edits(R"([{"attribute": "x", "op": "twist", "value": 1}])"), Error);
}

TEST_CASE("gen, train, predict, eval is byte-reproducible") {
  auto pipeline = [](const TempDir& dir) {
    const auto cfg = write_config(dir, "c.json", gen_config("phyworld-collision", 4, 12));
    REQUIRE(vidprog_run({"gen", "--config", cfg.string(), "--out", (dir / "data").string()}).code == 0);
    REQUIRE(vidprog_run({"train", "--data", (dir / "data").string(), "--out", (dir / "r.json").string(),
                         "--seed", "5", "--jobs", "2"})
                .code == 0);
    REQUIRE(vidprog_run({"predict", "--report", (dir / "r.json").string(), "--data", (dir / "data").string(),
                         "--out", (dir / "pred").string(), "--jobs", "2"})
                .code == 0);
    REQUIRE(vidprog_run({"eval", "--pred", (dir / "pred").string(), "--truth", (dir / "data").string(),
                         "--out", (dir / "metrics.json").string()})
                .code == 0);
    return snapshot(dir.path());
  };
  TempDir a, b;
  const auto first = pipeline(a);
  const auto second = pipeline(b);
  CHECK(first.size() > 100);
  CHECK(first == second);
}
