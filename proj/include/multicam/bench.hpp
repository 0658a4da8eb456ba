#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "multicam/sources.hpp"
#include "multicam/switch_engine.hpp"

namespace multicam {

inline constexpr double kMiB = 1024.0 * 1024.0;

class Timeout : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoSwitchObserved : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raw RGB24 bytes per second: width * height * 3 * fps.
double bandwidth_estimate(const Capability& cap);
double bandwidth_estimate(std::span<const Capability> caps);

// ---------------------------------------------------------------------------
// Frame rate

struct FrameRateOptions {
  int n_frames = 250;
  double burn_in_ms = 1000.0;
  double stall_timeout_ms = 5000.0;  // no fresh frame for this long -> Timeout
};

/// Averages the rate of fresh composed frames over n consecutive ones after a
/// burn-in: (n - 1) / (t_last - t_first). Runs the pipeline forward.
double measure_frame_rate(Pipeline& pipeline, const FrameRateOptions& opts = {});

// ---------------------------------------------------------------------------
// Screen capture model: the output is observed only at phase + j * period.

struct CaptureModel {
  double sampling_period_ms = 22.0;
  double phase_ms = 0.0;

  void validate() const;
  std::int64_t period_us() const;
  /// First sampling instant >= t.
  std::int64_t sample_at_or_after(std::int64_t t_us) const;
};

/// Issues one advance at `request_us` and watches the sampled output until
/// the view marker at (0,0) changes. Returns sampled switch time minus sampled
/// click time in ms. Throws NoSwitchObserved after 5 s.
double measure_switch_latency(Pipeline& pipeline, const CaptureModel& capture, std::int64_t request_us);

// ---------------------------------------------------------------------------
// Feedback-loop display latency.
//
// A chain of iterations + 1 sources in tiled mode. Source 1 films a counter
// that ticks once per second; source d + 1 films the display of source d, so
// it shows the counter as it was d hops ago. Each frame is a solid colour
// (ordinal, counter mod 256, 255).

struct FeedbackConfig {
  int iterations = 3;
  double hop_latency_ms = 100.0;
  double counter_phase_ms = 0.0;
  std::vector<std::int64_t> source_phase_us;  // per chain source, optional
  double source_fps = 30.0;
  double output_fps = 30.0;
  Resolution source_size{160, 120};
  Backend backend = Backend::Parallel;
};

/// Started at t = 0.
Pipeline make_feedback_pipeline(const FeedbackConfig& cfg);

struct DisplayLatency {
  double mean_ms = 0.0;
  double stddev_ms = 0.0;
  std::vector<double> events_ms;  // one estimate per counter increment
};

/// Watches the counter tiles of a feedback pipeline through `capture`; per
/// increment the estimate is (t_last_tile - t_first_tile) / iterations.
DisplayLatency measure_display_latency(Pipeline& pipeline, int iterations = 3, int events = 10,
                                       const CaptureModel& capture = {});

// ---------------------------------------------------------------------------
// Suite

enum class SubsetMode { All, Single };

std::string to_string(SubsetMode m);
SubsetMode parse_subset_mode(const std::string& s);

/// Index sets into a camera list: every non-empty subset ordered by size then
/// lexicographically, or each camera alone.
std::vector<std::vector<int>> camera_subsets(int n, SubsetMode mode);

struct BenchConfig {
  std::string scenario = "default";
  std::vector<CameraSpec> cameras;
  std::vector<SwitchStrategy> strategies{SwitchStrategy::AllAtOnce, SwitchStrategy::OneAtATime};
  SubsetMode subsets = SubsetMode::All;
  int runs = 1;
  int target_height = kDefaultTargetHeight;
  double output_fps = 30.0;
  double stop_cost_ms = 25.0;
  double start_cost_ms = 25.0;
  FrameRateOptions frame_rate;
  CaptureModel capture;
  int display_iterations = 3;
  int display_events = 10;
  std::uint64_t seed = 1;
  Backend backend = Backend::Parallel;

  /// Throws ConfigError.
  void validate() const;
};

struct BenchRecord {
  std::string scenario;
  int run = 0;
  std::vector<std::string> cameras;
  SwitchStrategy strategy = SwitchStrategy::AllAtOnce;
  double fps_measured = 0.0;
  std::optional<double> switch_latency_ms;  // empty when the view cannot change
  double display_latency_ms = 0.0;
  double display_latency_stddev_ms = 0.0;
  double bandwidth_bytes_per_s = 0.0;
  double compose_fps_wall = 0.0;  // composed frames per wall-clock second
};

struct BenchReport {
  std::string scenario;
  std::string clock = "virtual";
  std::uint64_t seed = 0;
  std::vector<BenchRecord> records;
};

BenchReport run_suite(const BenchConfig& config);

inline constexpr const char* kCsvHeader =
    "scenario,run,cameras,num_cams,strategy,fps_measured,switch_latency_ms,display_latency_ms,"
    "display_latency_stddev_ms,bandwidth_bytes_per_s,compose_fps_wall";

void write_csv(const BenchReport& report, std::ostream& out);
void write_text(const BenchReport& report, std::ostream& out);

}  // namespace multicam
