#include "vidprog/cli/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"
#include "vidprog/core/error.hpp"
#include "vidprog/core/schemas.hpp"

namespace vidprog::cli {

using nlohmann::json;

namespace {

// Reads "<ascii int>" after skipping whitespace; advances pos.
int ppm_int(std::string_view bytes, std::size_t& pos) {
  while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  int value = 0;
  const auto* begin = bytes.data() + pos;
  const auto [end, ec] = std::from_chars(begin, bytes.data() + bytes.size(), value);
  if (ec != std::errc{} || end == begin) fail(ErrorCode::io, "malformed PPM header");
  pos += static_cast<std::size_t>(end - begin);
  return value;
}

}  // namespace

std::string encode_ppm(const Frame& frame) {
  std::string out = "P6\n" + std::to_string(frame.width()) + " " +
                    std::to_string(frame.height()) + "\n255\n";
  const auto bytes = frame.bytes();
  out.append(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  return out;
}

Frame decode_ppm(std::string_view bytes) {
  if (bytes.substr(0, 2) != "P6") fail(ErrorCode::io, "not a binary PPM (P6) image");
  std::size_t pos = 2;
  const int w = ppm_int(bytes, pos);
  const int h = ppm_int(bytes, pos);
  const int maxval = ppm_int(bytes, pos);
  if (maxval != 255) fail(ErrorCode::io, "PPM maxval must be 255");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    fail(ErrorCode::io, "malformed PPM header");
  }
  ++pos;
  if (w <= 0 || h <= 0) fail(ErrorCode::io, "PPM dimensions must be positive");
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3;
  if (bytes.size() - pos != n) fail(ErrorCode::io, "PPM pixel data has the wrong size");
  const auto* p = reinterpret_cast<const std::uint8_t*>(bytes.data() + pos);
  return Frame(w, h, std::vector<std::uint8_t>(p, p + n));
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

void write_ppm(const fs::path& path, const Frame& frame) { write_text(path, encode_ppm(frame)); }

Frame read_ppm(const fs::path& path) {
  try {
    return decode_ppm(read_text(path));
  } catch (const Error& e) {
    fail(e.code(), path.string() + ": " + e.what());
  }
}

std::string frame_name(int t) { return "frame_" + std::to_string(t) + ".ppm"; }
std::string video_dir_name(std::size_t k) { return "video_" + std::to_string(k); }

// --- configuration -------------------------------------------------------

namespace {

class ConfigReader {
 public:
  explicit ConfigReader(std::string_view text) : text_(text) {}

  [[noreturn]] void error(const std::string& key, const std::string& message) const {
    const auto leaf = key.substr(key.rfind('.') + 1);
    const auto at = text_.find("\"" + leaf + "\"");
    std::string where;
    if (at != std::string_view::npos) {
      where = "line " + std::to_string(1 + std::count(text_.begin(), text_.begin() + at, '\n')) +
              ": ";
    }
    fail(ErrorCode::config, where + "'" + key + "' " + message);
  }

  void expect_object(const json& j, const std::string& key) const {
    if (!j.is_object()) error(key, "must be an object");
  }

  double number(const json& j, const std::string& key) const {
    if (!j.is_number()) error(key, "must be a number");
    return j.get<double>();
  }

  int integer(const json& j, const std::string& key) const {
    if (!j.is_number_integer()) error(key, "must be an integer");
    return j.get<int>();
  }

  std::uint64_t unsigned_integer(const json& j, const std::string& key) const {
    if (!j.is_number_unsigned()) error(key, "must be a non-negative integer");
    return j.get<std::uint64_t>();
  }

  std::string string(const json& j, const std::string& key) const {
    if (!j.is_string()) error(key, "must be a string");
    return j.get<std::string>();
  }

  envsim::Range range(const json& j, const std::string& key) const {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
      error(key, "must be a [low, high] pair of numbers");
    }
    return {j[0].get<double>(), j[1].get<double>()};
  }

 private:
  std::string_view text_;
};

json range_json(const envsim::Range& r) { return json::array({r.low, r.high}); }

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + upto, '\n');
    fail(ErrorCode::config, "line " + std::to_string(line) + ": invalid JSON: " + e.what());
  }
  const ConfigReader rd(text);
  rd.expect_object(doc, "config");
  ExperimentConfig c;
  try {
    const auto kind = doc.contains("env") ? parse_env_kind(rd.string(doc["env"], "env"))
                                          : EnvKind::phyworld_uniform;
    c.env = envsim::EnvConfig::defaults(kind);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config) throw;
    rd.error("env", std::string("is not supported: ") + e.what());
  }
  auto& env = c.env;
  for (const auto& [key, v] : doc.items()) {
    if (key == "env") continue;
    else if (key == "seed") env.seed = rd.unsigned_integer(v, key);
    else if (key == "videos") c.videos = rd.integer(v, key);
    else if (key == "width") env.width = rd.integer(v, key);
    else if (key == "height") env.height = rd.integer(v, key);
    else if (key == "total_frames") env.total_frames = rd.integer(v, key);
    else if (key == "conditioning_frames") env.conditioning_frames = rd.integer(v, key);
    else if (key == "velocity_range") env.velocity_range = rd.range(v, key);
    else if (key == "radius_range") env.radius_range = rd.range(v, key);
    else if (key == "y_range") env.y_range = rd.range(v, key);
    else if (key == "position_range") env.position_range = rd.range(v, key);
    else if (key == "angle_range") env.angle_range = rd.range(v, key);
    else if (key == "angular_velocity_range") env.angular_velocity_range = rd.range(v, key);
    else if (key == "velocity_scale") c.velocity_scale = rd.number(v, key);
    else if (key == "cartpole") {
      rd.expect_object(v, key);
      for (const auto& [k, x] : v.items()) {
        const std::string name = key + "." + k;
        auto& cp = env.cartpole;
        if (k == "gravity") cp.gravity = rd.number(x, name);
        else if (k == "cart_mass") cp.cart_mass = rd.number(x, name);
        else if (k == "pole_mass") cp.pole_mass = rd.number(x, name);
        else if (k == "pole_length") cp.pole_length = rd.number(x, name);
        else if (k == "force") cp.force = rd.number(x, name);
        else if (k == "time_step") cp.time_step = rd.number(x, name);
        else rd.error(name, "is not a known key");
      }
    } else if (key == "fit") {
      rd.expect_object(v, key);
      for (const auto& [k, x] : v.items()) {
        const std::string name = key + "." + k;
        auto& f = c.fit;
        if (k == "loss") f.loss = fit::parse_loss_kind(rd.string(x, name));
        else if (k == "optimizer") f.optimizer = fit::parse_optimizer_kind(rd.string(x, name));
        else if (k == "max_iterations") f.max_iterations = rd.integer(x, name);
        else if (k == "max_evaluations") f.max_evaluations = rd.integer(x, name);
        else if (k == "tolerance") f.tolerance = rd.number(x, name);
        else if (k == "restarts") f.restarts = rd.integer(x, name);
        else if (k == "seed") f.seed = rd.unsigned_integer(x, name);
        else if (k == "sigma") f.sigma = rd.number(x, name);
        else rd.error(name, "is not a known key");
      }
    } else if (key == "proposer") {
      rd.expect_object(v, key);
      for (const auto& [k, x] : v.items()) {
        const std::string name = key + "." + k;
        auto& p = c.proposer;
        if (k == "kind") p.kind = rd.string(x, name);
        else if (k == "url") p.url = rd.string(x, name);
        else if (k == "api_key_env") p.api_key_env = rd.string(x, name);
        else if (k == "timeout_seconds") p.timeout_seconds = rd.integer(x, name);
        else if (k == "max_candidates") p.max_candidates = rd.integer(x, name);
        else rd.error(name, "is not a known key");
      }
      if (c.proposer.kind != "registry" && c.proposer.kind != "remote") {
        rd.error("proposer.kind", "must be \"registry\" or \"remote\"");
      }
      if (c.proposer.kind == "remote" && c.proposer.url.empty()) {
        rd.error("proposer.url", "is required for a remote proposer");
      }
      if (c.proposer.max_candidates < 1) rd.error("proposer.max_candidates", "must be >= 1");
    } else if (key == "thresholds") {
      rd.expect_object(v, key);
      for (const auto& [metric, bound] : v.items()) {
        const std::string name = key + "." + metric;
        rd.expect_object(bound, name);
        for (const auto& [k, x] : bound.items()) {
          if (k == "max") c.thresholds.upper[metric] = rd.number(x, name + ".max");
          else if (k == "min") c.thresholds.lower[metric] = rd.number(x, name + ".min");
          else rd.error(name + "." + k, "is not a known key (use min or max)");
        }
      }
    } else {
      rd.error(key, "is not a known key");
    }
  }
  if (c.videos < 1) rd.error("videos", "must be >= 1");
  if (!(c.velocity_scale > 0.0)) rd.error("velocity_scale", "must be > 0");
  env.validate();
  c.fit.validate();
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  if (!fs::exists(path)) fail(ErrorCode::config, "config file not found: " + path.string());
  try {
    return parse_config(read_text(path));
  } catch (const Error& e) {
    fail(e.code(), path.string() + ": " + e.what());
  }
}

std::string config_to_json(const ExperimentConfig& c) {
  const auto& e = c.env;
  json doc = {
      {"env", to_string(e.kind)},
      {"seed", e.seed},
      {"videos", c.videos},
      {"width", e.width},
      {"height", e.height},
      {"total_frames", e.total_frames},
      {"conditioning_frames", e.conditioning_frames},
      {"velocity_scale", c.velocity_scale},
      {"velocity_range", range_json(e.velocity_range)},
  };
  if (e.kind == EnvKind::cartpole) {
    doc["position_range"] = range_json(e.position_range);
    doc["angle_range"] = range_json(e.angle_range);
    doc["angular_velocity_range"] = range_json(e.angular_velocity_range);
    doc["cartpole"] = {{"gravity", e.cartpole.gravity},     {"cart_mass", e.cartpole.cart_mass},
                       {"pole_mass", e.cartpole.pole_mass}, {"pole_length", e.cartpole.pole_length},
                       {"force", e.cartpole.force},         {"time_step", e.cartpole.time_step}};
  } else {
    doc["radius_range"] = range_json(e.radius_range);
    doc["y_range"] = range_json(e.y_range);
  }
  const auto& f = c.fit;
  doc["fit"] = {{"loss", fit::to_string(f.loss)},
                {"optimizer", fit::to_string(f.optimizer)},
                {"max_iterations", f.max_iterations},
                {"max_evaluations", f.max_evaluations},
                {"tolerance", f.tolerance},
                {"restarts", f.restarts},
                {"seed", f.seed},
                {"sigma", f.sigma}};
  return doc.dump(2) + "\n";
}

// --- datasets ------------------------------------------------------------

namespace {

json schema_json(const StateSchema& schema) {
  json attrs = json::array();
  for (const auto& a : schema.attributes()) {
    attrs.push_back({{"name", a.name},
                     {"unit", to_string(a.unit)},
                     {"lower", a.lower},
                     {"upper", a.upper},
                     {"role", to_string(a.role)},
                     {"source", a.source}});
  }
  return {{"env", schema.env_id()}, {"attributes", attrs}};
}

SchemaRef schema_from_json(const json& j) {
  std::vector<AttributeDescriptor> attrs;
  for (const auto& a : j.at("attributes")) {
    attrs.push_back({a.at("name"), parse_unit(a.at("unit").get<std::string>()), a.at("lower"),
                     a.at("upper"), parse_role(a.at("role").get<std::string>()),
                     a.value("source", "")});
  }
  return std::make_shared<const StateSchema>(j.at("env").get<std::string>(), std::move(attrs));
}

json meta_json(const VideoMeta& m) {
  json params = json::object();
  for (const auto& [k, v] : m.params) params[k] = v;
  return {{"seed", m.seed}, {"params", params}};
}

}  // namespace

std::string trajectory_to_json(const Trajectory& trajectory, int first_index) {
  json states = json::array();
  for (const auto& s : trajectory.states()) {
    states.push_back(std::vector<double>(s.values().begin(), s.values().end()));
  }
  return json{{"schema", schema_json(trajectory.schema())},
              {"first_index", first_index},
              {"states", states}}
             .dump(1) +
         "\n";
}

std::pair<Trajectory, int> trajectory_from_json(std::string_view text) {
  try {
    const auto doc = json::parse(text);
    const auto schema = schema_from_json(doc.at("schema"));
    std::vector<State> states;
    for (const auto& s : doc.at("states")) states.push_back(State::unchecked(schema, s.get<std::vector<double>>()));
    return {Trajectory(std::move(states)), doc.value("first_index", 0)};
  } catch (const json::exception& e) {
    fail(ErrorCode::io, std::string("malformed states file: ") + e.what());
  }
}

void save_dataset(const fs::path& dir, const Dataset& dataset, const envsim::EnvConfig& config) {
  fs::create_directories(dir);
  json videos = json::array();
  for (std::size_t k = 0; k < dataset.size(); ++k) {
    const auto& v = dataset.videos()[k];
    const auto sub = dir / video_dir_name(k);
    fs::create_directories(sub);
    for (std::size_t t = 0; t < v.frames().size(); ++t) {
      write_ppm(sub / frame_name(static_cast<int>(t)), v.frames()[t]);
    }
    json info = {{"env", v.env_config_id()},
                 {"total_frames", v.total_frames()},
                 {"conditioning_frames", v.conditioning_frames()},
                 {"width", v.width()},
                 {"height", v.height()}};
    info.update(meta_json(dataset.manifest()[k]));
    write_text(sub / "video.json", info.dump(2) + "\n");
    if (v.truth()) write_text(sub / "truth.json", trajectory_to_json(*v.truth()));
    json entry = meta_json(dataset.manifest()[k]);
    entry["dir"] = video_dir_name(k);
    videos.push_back(entry);
  }
  ExperimentConfig wrapped;
  wrapped.env = config;
  wrapped.videos = static_cast<int>(dataset.size());
  json manifest = {{"env", to_string(config.kind)},
                   {"config", json::parse(config_to_json(wrapped))},
                   {"videos", videos}};
  manifest["config"].erase("fit");
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

VideoInfo load_video_info(const fs::path& video_dir) {
  const auto path = video_dir / "video.json";
  if (!fs::exists(path)) fail(ErrorCode::dataset_not_found, "missing " + path.string());
  try {
    const auto j = json::parse(read_text(path));
    return {j.at("env"), j.at("total_frames"), j.at("conditioning_frames"), j.at("width"),
            j.at("height")};
  } catch (const json::exception& e) {
    fail(ErrorCode::io, path.string() + ": " + e.what());
  }
}

std::vector<Frame> load_frames(const fs::path& video_dir) {
  std::vector<Frame> frames;
  for (int t = 0;; ++t) {
    const auto path = video_dir / frame_name(t);
    if (!fs::exists(path)) break;
    frames.push_back(read_ppm(path));
  }
  return frames;
}

Dataset load_dataset(const fs::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  if (!fs::is_directory(dir) || !fs::exists(manifest_path)) {
    fail(ErrorCode::dataset_not_found, "no dataset at " + dir.string() + " (manifest.json missing)");
  }
  json manifest;
  try {
    manifest = json::parse(read_text(manifest_path));
  } catch (const json::exception& e) {
    fail(ErrorCode::io, manifest_path.string() + ": " + e.what());
  }
  std::vector<Video> videos;
  std::vector<VideoMeta> metas;
  try {
    for (const auto& entry : manifest.at("videos")) {
      const auto sub = dir / entry.at("dir").get<std::string>();
      const auto info = load_video_info(sub);
      auto frames = load_frames(sub);
      std::optional<Trajectory> truth;
      if (fs::exists(sub / "truth.json")) truth = trajectory_from_json(read_text(sub / "truth.json")).first;
      videos.emplace_back(std::move(frames), info.total_frames, info.conditioning_frames,
                          info.env, std::move(truth));
      VideoMeta m;
      m.seed = entry.at("seed").get<std::uint64_t>();
      for (const auto& [k, v] : entry.at("params").items()) m.params[k] = v.get<double>();
      metas.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::io, manifest_path.string() + ": " + e.what());
  }
  if (videos.empty()) fail(ErrorCode::dataset_not_found, "dataset at " + dir.string() + " is empty");
  return Dataset(std::move(videos), std::move(metas));
}

// --- reports -------------------------------------------------------------

std::string report_to_json(const fit::FitReport& r) {
  json params = json::array();
  for (const auto& p : r.params.entries()) {
    params.push_back({{"name", p.name}, {"value", p.value}, {"lower", p.lower}, {"upper", p.upper}});
  }
  json restarts = json::array();
  for (const auto& s : r.restarts) {
    restarts.push_back({{"index", s.index},
                        {"start", s.start},
                        {"x", s.x},
                        {"loss", s.loss},
                        {"evaluations", s.evaluations},
                        {"iterations", s.iterations},
                        {"status", s.status}});
  }
  json candidates = json::array();
  for (const auto& c : r.candidates) {
    candidates.push_back({{"id", c.id}, {"parameters", c.parameters}, {"loss", c.loss}});
  }
  const json doc = {{"program_id", r.program_id},
                    {"env", r.env},
                    {"source", r.source},
                    {"params", params},
                    {"loss_kind", fit::to_string(r.loss_kind)},
                    {"optimizer", fit::to_string(r.optimizer)},
                    {"final_loss", r.final_loss},
                    {"trace", r.trace},
                    {"evaluations", r.evaluations},
                    {"clamp_events", r.clamp_events},
                    {"evaluation_errors", r.evaluation_errors},
                    {"restarts", restarts},
                    {"candidates", candidates},
                    {"conditioning_frames", r.conditioning_frames},
                    {"total_frames", r.total_frames}};
  // Non-finite losses (failed candidates) are written as null.
  return doc.dump(2) + "\n";
}

fit::FitReport report_from_json(std::string_view text) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  auto num = [&](const json& j) { return j.is_null() ? inf : j.get<double>(); };
  try {
    const auto doc = json::parse(text);
    fit::FitReport r;
    r.program_id = doc.at("program_id");
    r.env = doc.at("env");
    r.source = doc.at("source");
    std::vector<Param> params;
    for (const auto& p : doc.at("params")) {
      params.push_back({p.at("name"), p.at("value"), p.at("lower"), p.at("upper")});
    }
    r.params = ParamVector(std::move(params));
    r.loss_kind = fit::parse_loss_kind(doc.at("loss_kind").get<std::string>());
    r.optimizer = fit::parse_optimizer_kind(doc.at("optimizer").get<std::string>());
    r.final_loss = num(doc.at("final_loss"));
    for (const auto& t : doc.at("trace")) r.trace.push_back(num(t));
    r.evaluations = doc.at("evaluations");
    r.clamp_events = doc.at("clamp_events");
    r.evaluation_errors = doc.at("evaluation_errors");
    for (const auto& s : doc.at("restarts")) {
      r.restarts.push_back({s.at("index"), s.at("start").get<std::vector<double>>(),
                            s.at("x").get<std::vector<double>>(), num(s.at("loss")),
                            s.at("evaluations"), s.at("iterations"), s.at("status")});
    }
    for (const auto& c : doc.at("candidates")) {
      r.candidates.push_back({c.at("id"), c.at("parameters"), num(c.at("loss"))});
    }
    r.conditioning_frames = doc.at("conditioning_frames");
    r.total_frames = doc.at("total_frames");
    return r;
  } catch (const json::exception& e) {
    fail(ErrorCode::io, std::string("malformed report: ") + e.what());
  }
}

// --- edits ---------------------------------------------------------------

std::vector<Edit> parse_edits(std::string_view text) {
  std::vector<Edit> edits;
  try {
    for (const auto& e : json::parse(text)) {
      Edit edit;
      edit.attribute = e.at("attribute");
      const std::string op = e.at("op");
      if (op == "set") edit.op = EditOp::set;
      else if (op == "scale") edit.op = EditOp::scale;
      else if (op == "negate") edit.op = EditOp::negate;
      else fail(ErrorCode::invalid_argument, "unknown edit op '" + op + "'");
      if (edit.op != EditOp::negate) edit.value = e.at("value").get<double>();
      edits.push_back(std::move(edit));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::invalid_argument, std::string("malformed edit spec: ") + e.what());
  }
  return edits;
}

}  // namespace vidprog::cli
