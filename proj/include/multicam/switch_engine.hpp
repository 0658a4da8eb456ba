#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "multicam/compositor.hpp"
#include "multicam/frame.hpp"
#include "multicam/sources.hpp"

namespace multicam {

/// Which view the virtual camera is producing.
struct ViewState {
  enum class Mode { Primary, Tiled };

  Mode mode = Mode::Primary;
  int primary = 1;  // meaningful only in Primary mode

  static constexpr ViewState Primary(int ordinal) { return {Mode::Primary, ordinal}; }
  static constexpr ViewState Tiled() { return {Mode::Tiled, 0}; }

  constexpr bool is_tiled() const noexcept { return mode == Mode::Tiled; }
  friend constexpr bool operator==(const ViewState&, const ViewState&) = default;
};

std::string to_string(const ViewState& s);

/// The single switching action: Primary(1) .. Primary(n) [, Tiled] and round.
ViewState advance(ViewState state, int n, bool tiled_enabled);

enum class SwitchStrategy { AllAtOnce, OneAtATime };

std::string to_string(SwitchStrategy s);
SwitchStrategy parse_strategy(const std::string& s);

struct PipelineConfig {
  SwitchStrategy strategy = SwitchStrategy::AllAtOnce;
  Resolution canvas{854, 640};
  double output_fps = 30.0;
  double stop_cost_ms = 25.0;
  double start_cost_ms = 25.0;
  bool tiled_enabled = true;  // ignored (forced off) for OneAtATime
  bool thumbnails_enabled = true;
  ViewState initial = ViewState::Primary(1);
  Backend backend = Backend::Parallel;
  // Optional per-ordinal capture phase offset; missing entries mean 0.
  std::vector<std::int64_t> phase_offsets_us;
};

/// Writes frame `seq` of camera `ordinal`, captured at `capture_us` on the
/// pipeline clock, into `slot`. The slot may still hold an earlier frame of
/// the same camera whose storage can be reused.
using FrameGenerator = std::function<void(int ordinal, const Capability& cap, std::uint64_t seq,
                                          std::int64_t capture_us, std::optional<Frame>& slot)>;

FrameGenerator synthetic_generator();

struct SwitchOutcome {
  ViewState new_state;
  std::int64_t effective_at_us = 0;
};

struct ComposedFrame {
  Frame frame;
  ViewState state;
  bool fresh = false;  // carries at least one source frame not shown before, or a new view
  std::int64_t emitted_at_us = 0;
};

struct SourceStats {
  std::uint64_t delivered = 0;
  std::uint64_t consumed = 0;   // taken from the mailbox by the compositor
  std::uint64_t discarded = 0;  // consumed but not drawn into the output
  std::uint64_t dropped = 0;    // overwritten in the mailbox before being consumed
};

class PipelineError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Deterministic discrete-time model of the virtual camera: sources deliver
/// into single-slot latest-wins mailboxes, the compositor samples them at a
/// fixed output cadence, and advance requests are applied per strategy.
///
/// All times are microseconds on the caller's virtual clock. Time only moves
/// forward; calls with an earlier time than the last one throw PipelineError.
class Pipeline {
 public:
  Pipeline(Registry registry, PipelineConfig config, FrameGenerator generator = synthetic_generator());

  void start(std::int64_t now_us);
  bool running() const noexcept { return running_; }
  std::int64_t now_us() const noexcept { return now_us_; }

  /// Applies one advance requested at `request_us`. Frames due strictly before
  /// the request are produced first and returned by the next run_until().
  SwitchOutcome apply_switch(std::int64_t request_us);

  /// Emits every output frame with instant <= now_us, in order.
  std::vector<ComposedFrame> run_until(std::int64_t now_us);

  /// With collection off, run_until() returns nothing and only latest() is
  /// kept. Measurement loops use this to avoid copying every frame.
  void set_collect_frames(bool on) noexcept { collect_frames_ = on; }
  bool collect_frames() const noexcept { return collect_frames_; }

  /// run_until(), keeping only the most recent frame.
  std::optional<ComposedFrame> frame_tick(std::int64_t now_us);

  /// Earliest time at which the pipeline has something to emit; max() if idle.
  std::int64_t next_event_us() const noexcept;

  /// Logical state: every accepted request applied.
  const ViewState& state() const noexcept { return state_; }
  const std::optional<ComposedFrame>& latest() const noexcept { return latest_; }
  bool in_switch_gap() const noexcept { return gap_until_.has_value(); }
  bool source_running(int ordinal) const;
  const SourceStats& stats(int ordinal) const;
  const Registry& registry() const noexcept { return registry_; }
  const PipelineConfig& config() const noexcept { return config_; }
  bool tiled_enabled() const noexcept;
  std::int64_t frame_period_us() const noexcept;

 private:
  struct Source {
    bool running = false;
    std::int64_t capture_origin_us = 0;
    std::int64_t delivery_delay_us = 0;
    double fps = 30.0;
    std::uint64_t next_seq = 0;
    std::optional<std::uint64_t> mailbox;  // latest delivered seq
    bool mailbox_unconsumed = false;
    std::optional<std::uint64_t> last_shown;
    std::optional<Frame> cache;  // materialised frame, valid for cached_seq
    std::optional<std::uint64_t> cached_seq;
    Frame placeholder;
    SourceStats stats;
  };

  void start_source(int ordinal, std::int64_t at_us);
  void stop_source(int ordinal);
  void deliver_until(Source& s, std::int64_t t);
  std::int64_t output_instant(std::uint64_t index) const;
  std::int64_t first_delivery_us(int ordinal, std::int64_t start_us) const;
  void begin_surgery(std::int64_t request_us, ViewState target);
  void process_until(std::int64_t t, bool inclusive);
  void emit_at(std::int64_t instant);
  const Frame& frame_for(int ordinal);
  Source& source(int ordinal);

  Registry registry_;
  PipelineConfig config_;
  FrameGenerator generator_;

  std::vector<Source> sources_;
  bool running_ = false;
  std::int64_t start_us_ = 0;
  std::int64_t now_us_ = std::numeric_limits<std::int64_t>::min();

  std::int64_t out_origin_us_ = 0;
  std::uint64_t out_index_ = 0;
  std::uint64_t out_seq_ = 0;

  ViewState state_;
  ViewState shown_state_;  // state frames are currently composed for
  std::optional<ViewState> last_emitted_state_;
  std::optional<std::int64_t> gap_until_;
  std::int64_t projected_end_us_ = 0;
  std::deque<ViewState> queued_;

  bool collect_frames_ = true;
  std::vector<ComposedFrame> pending_;
  std::optional<ComposedFrame> latest_;
};

}  // namespace multicam
