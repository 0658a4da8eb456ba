#pragma once

#include <filesystem>
#include <vector>

#include "json.hpp"

#include "multicam/bench.hpp"
#include "multicam/session.hpp"
#include "multicam/sources.hpp"

namespace multicam {

// JSON configuration. Every loader rejects unknown keys and wrong types with
// ConfigError; missing keys keep their defaults.
//
// Camera:
//   {"name": "cam1", "capabilities": [{"width": 640, "height": 480,
//    "format": "RGB24", "fps": 30}], "warm_up_ms": 0, "latency_ms": 0,
//    "is_virtual": false, "conversion_latency_ms": 0}
//
// Camera file: {"cameras": [camera, ...]}
//
// Session: {"peers": {"A": peer, "B": peer}, "link": {"a_to_b_ms": 25,
//   "b_to_a_ms": 25}, "target_height", "output_fps", "stop_cost_ms",
//   "start_cost_ms", "clock": "virtual"|"wall", "seed", "randomize_phase",
//   "connection"}
// Peer: {"username", "has_app", "cameras": [...], "whitelist": [...],
//   "strategy": "all"|"one", "tiled", "thumbnails", "im_switch",
//   "keystroke_switch"}
//
// Bench: {"scenario", "cameras": [...], "strategies": ["all", "one"],
//   "subsets": "all"|"single", "runs", "target_height", "output_fps",
//   "stop_cost_ms", "start_cost_ms", "n_frames", "burn_in_ms",
//   "sampling_period_ms", "display_iterations", "display_events", "seed",
//   "backend": "parallel"|"serial"}

nlohmann::json load_json_file(const std::filesystem::path& path);

CameraSpec camera_from_json(const nlohmann::json& j);
nlohmann::json camera_to_json(const CameraSpec& c);
/// Accepts either {"cameras": [...]} or a bare array.
std::vector<CameraSpec> cameras_from_json(const nlohmann::json& j);

SessionConfig session_config_from_json(const nlohmann::json& j);
BenchConfig bench_config_from_json(const nlohmann::json& j);

}  // namespace multicam
