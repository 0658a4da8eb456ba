#include "multicam/config.hpp"

#include <fstream>
#include <initializer_list>
#include <string_view>

namespace multicam {

using nlohmann::json;

namespace {

void require_object(const json& j, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + ": expected an object");
}

void allow_keys(const json& j, const char* what, std::initializer_list<std::string_view> keys) {
  for (const auto& [k, _] : j.items()) {
    bool known = false;
    for (auto key : keys) known = known || key == k;
    if (!known) throw ConfigError(std::string(what) + ": unknown key '" + k + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("'") + key + "' has the wrong type");
  }
}

double read_number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  return j.at(key).get<double>();
}

std::vector<CameraSpec> camera_list(const json& j) {
  if (!j.is_array()) throw ConfigError("cameras: expected an array");
  std::vector<CameraSpec> out;
  for (const auto& c : j) out.push_back(camera_from_json(c));
  return out;
}

PeerConfig peer_from_json(const json& j, PeerConfig base) {
  require_object(j, "peer");
  allow_keys(j, "peer",
             {"username", "has_app", "cameras", "whitelist", "strategy", "tiled", "thumbnails", "im_switch",
              "keystroke_switch"});
  read(j, "username", base.username);
  read(j, "has_app", base.has_app);
  if (j.contains("cameras")) base.cameras = camera_list(j.at("cameras"));
  read(j, "whitelist", base.whitelist);
  if (j.contains("strategy")) {
    std::string s;
    read(j, "strategy", s);
    base.strategy = parse_strategy(s);
  }
  read(j, "tiled", base.tiled_enabled);
  read(j, "thumbnails", base.thumbnails_enabled);
  read(j, "im_switch", base.im.im_switch_enabled);
  read(j, "keystroke_switch", base.im.keystroke_switch_enabled);
  return base;
}

}  // namespace

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

CameraSpec camera_from_json(const json& j) {
  require_object(j, "camera");
  allow_keys(j, "camera",
             {"name", "capabilities", "warm_up_ms", "latency_ms", "is_virtual", "conversion_latency_ms"});
  CameraSpec c;
  read(j, "name", c.name);
  if (!j.contains("capabilities") || !j.at("capabilities").is_array())
    throw ConfigError("camera '" + c.name + "': capabilities must be an array");
  for (const auto& cj : j.at("capabilities")) {
    require_object(cj, "capability");
    allow_keys(cj, "capability", {"width", "height", "format", "fps"});
    Capability cap;
    read(cj, "width", cap.resolution.width);
    read(cj, "height", cap.resolution.height);
    std::string fmt = "RGB24";
    read(cj, "format", fmt);
    cap.format = parse_pixel_format(fmt);
    cap.fps = read_number(cj, "fps", cap.fps);
    c.capabilities.push_back(cap);
  }
  c.warm_up_ms = read_number(j, "warm_up_ms", c.warm_up_ms);
  c.latency_ms = read_number(j, "latency_ms", c.latency_ms);
  read(j, "is_virtual", c.is_virtual);
  c.conversion_latency_ms = read_number(j, "conversion_latency_ms", c.conversion_latency_ms);
  c.validate();
  return c;
}

json camera_to_json(const CameraSpec& c) {
  json caps = json::array();
  for (const auto& cap : c.capabilities)
    caps.push_back({{"width", cap.resolution.width},
                    {"height", cap.resolution.height},
                    {"format", to_string(cap.format)},
                    {"fps", cap.fps}});
  return {{"name", c.name},
          {"capabilities", caps},
          {"warm_up_ms", c.warm_up_ms},
          {"latency_ms", c.latency_ms},
          {"is_virtual", c.is_virtual},
          {"conversion_latency_ms", c.conversion_latency_ms}};
}

std::vector<CameraSpec> cameras_from_json(const json& j) {
  if (j.is_array()) return camera_list(j);
  require_object(j, "camera file");
  allow_keys(j, "camera file", {"cameras"});
  if (!j.contains("cameras")) throw ConfigError("camera file: missing 'cameras'");
  return camera_list(j.at("cameras"));
}

SessionConfig session_config_from_json(const json& j) {
  require_object(j, "session");
  allow_keys(j, "session",
             {"peers", "link", "target_height", "output_fps", "stop_cost_ms", "start_cost_ms", "clock", "seed",
              "randomize_phase", "connection"});
  SessionConfig c = SessionConfig::defaults();
  if (j.contains("peers")) {
    const auto& peers = j.at("peers");
    require_object(peers, "peers");
    allow_keys(peers, "peers", {"A", "B"});
    if (peers.contains("A")) c.a = peer_from_json(peers.at("A"), c.a);
    if (peers.contains("B")) c.b = peer_from_json(peers.at("B"), c.b);
  }
  if (j.contains("link")) {
    const auto& link = j.at("link");
    require_object(link, "link");
    allow_keys(link, "link", {"a_to_b_ms", "b_to_a_ms"});
    c.delay_a_to_b_ms = read_number(link, "a_to_b_ms", c.delay_a_to_b_ms);
    c.delay_b_to_a_ms = read_number(link, "b_to_a_ms", c.delay_b_to_a_ms);
  }
  read(j, "target_height", c.target_height);
  c.output_fps = read_number(j, "output_fps", c.output_fps);
  c.stop_cost_ms = read_number(j, "stop_cost_ms", c.stop_cost_ms);
  c.start_cost_ms = read_number(j, "start_cost_ms", c.start_cost_ms);
  if (j.contains("clock")) {
    std::string clock;
    read(j, "clock", clock);
    if (clock == "virtual") {
      c.clock = ClockMode::Virtual;
    } else if (clock == "wall") {
      c.clock = ClockMode::Wall;
    } else {
      throw ConfigError("clock must be 'virtual' or 'wall'");
    }
  }
  read(j, "seed", c.seed);
  read(j, "randomize_phase", c.randomize_phase);
  read(j, "connection", c.connection);
  return c;
}

BenchConfig bench_config_from_json(const json& j) {
  require_object(j, "bench");
  allow_keys(j, "bench",
             {"scenario", "cameras", "strategies", "subsets", "runs", "target_height", "output_fps", "stop_cost_ms",
              "start_cost_ms", "n_frames", "burn_in_ms", "sampling_period_ms", "display_iterations",
              "display_events", "seed", "backend"});
  BenchConfig c;
  read(j, "scenario", c.scenario);
  if (j.contains("cameras")) c.cameras = camera_list(j.at("cameras"));
  if (j.contains("strategies")) {
    std::vector<std::string> names;
    read(j, "strategies", names);
    c.strategies.clear();
    for (const auto& n : names) c.strategies.push_back(parse_strategy(n));
  }
  if (j.contains("subsets")) {
    std::string s;
    read(j, "subsets", s);
    c.subsets = parse_subset_mode(s);
  }
  read(j, "runs", c.runs);
  read(j, "target_height", c.target_height);
  c.output_fps = read_number(j, "output_fps", c.output_fps);
  c.stop_cost_ms = read_number(j, "stop_cost_ms", c.stop_cost_ms);
  c.start_cost_ms = read_number(j, "start_cost_ms", c.start_cost_ms);
  read(j, "n_frames", c.frame_rate.n_frames);
  c.frame_rate.burn_in_ms = read_number(j, "burn_in_ms", c.frame_rate.burn_in_ms);
  c.capture.sampling_period_ms = read_number(j, "sampling_period_ms", c.capture.sampling_period_ms);
  read(j, "display_iterations", c.display_iterations);
  read(j, "display_events", c.display_events);
  read(j, "seed", c.seed);
  if (j.contains("backend")) {
    std::string b;
    read(j, "backend", b);
    if (b == "parallel") {
      c.backend = Backend::Parallel;
    } else if (b == "serial") {
      c.backend = Backend::Serial;
    } else {
      throw ConfigError("backend must be 'parallel' or 'serial'");
    }
  }
  c.validate();
  return c;
}

}  // namespace multicam
