#include "multicam/switch_engine.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace multicam {

std::string to_string(const ViewState& s) {
  return s.is_tiled() ? "Tiled" : "Primary(" + std::to_string(s.primary) + ")";
}

ViewState advance(ViewState state, int n, bool tiled_enabled) {
  if (n < 1) throw std::invalid_argument("advance: camera count must be >= 1");
  if (state.is_tiled()) return ViewState::Primary(1);
  if (state.primary < 1 || state.primary > n)
    throw std::invalid_argument("advance: primary " + std::to_string(state.primary) +
                                " outside 1.." + std::to_string(n));
  if (state.primary < n) return ViewState::Primary(state.primary + 1);
  return tiled_enabled ? ViewState::Tiled() : ViewState::Primary(1);
}

std::string to_string(SwitchStrategy s) {
  return s == SwitchStrategy::AllAtOnce ? "all-at-once" : "one-at-a-time";
}

SwitchStrategy parse_strategy(const std::string& s) {
  if (s == "all" || s == "all-at-once" || s == "AllAtOnce") return SwitchStrategy::AllAtOnce;
  if (s == "one" || s == "one-at-a-time" || s == "OneAtATime") return SwitchStrategy::OneAtATime;
  throw ConfigError("unknown switch strategy '" + s + "'");
}

FrameGenerator synthetic_generator() {
  return [](int ordinal, const Capability& cap, std::uint64_t seq, std::int64_t, std::optional<Frame>& slot) {
    // Only the marker pixel differs between frames of one camera.
    if (!slot || slot->resolution() != cap.resolution || slot->source_ordinal != static_cast<std::uint32_t>(ordinal)) {
      slot = synth_frame(ordinal, cap, seq);
      return;
    }
    slot->set_pixel(0, 0, {static_cast<std::uint8_t>(ordinal), static_cast<std::uint8_t>(seq % 256), 255});
    slot->seq = seq;
    slot->timestamp_us = frame_time_us(seq, cap.fps);
  };
}

namespace {
std::int64_t ms_to_us(double ms) { return static_cast<std::int64_t>(std::llround(ms * 1000.0)); }
}  // namespace

Pipeline::Pipeline(Registry registry, PipelineConfig config, FrameGenerator generator)
    : registry_(std::move(registry)), config_(std::move(config)), generator_(std::move(generator)) {
  if (registry_.empty()) throw PipelineError("pipeline needs at least one camera");
  if (!config_.canvas.valid()) throw PipelineError("invalid canvas");
  if (!(config_.output_fps > 0.0)) throw PipelineError("output fps must be positive");
  if (config_.strategy == SwitchStrategy::OneAtATime && config_.initial.is_tiled())
    throw PipelineError("one-at-a-time switching cannot show the tiled view");
  if (!config_.initial.is_tiled() &&
      (config_.initial.primary < 1 || config_.initial.primary > registry_.size()))
    throw PipelineError("initial primary outside registry");

  sources_.resize(static_cast<std::size_t>(registry_.size()));
  for (const auto& e : registry_.entries()) {
    auto& s = sources_[static_cast<std::size_t>(e.ordinal - 1)];
    s.fps = e.selected.fps;
    double delay_ms = e.spec.latency_ms;
    if (e.selected.format != PixelFormat::Rgb24) delay_ms += e.spec.conversion_latency_ms;
    s.delivery_delay_us = ms_to_us(delay_ms);
    s.placeholder = blank_frame(e.selected.resolution);
  }
  state_ = shown_state_ = config_.initial;
}

bool Pipeline::tiled_enabled() const noexcept {
  return config_.strategy == SwitchStrategy::AllAtOnce && config_.tiled_enabled;
}

std::int64_t Pipeline::frame_period_us() const noexcept {
  return frame_time_us(1, config_.output_fps);
}

Pipeline::Source& Pipeline::source(int ordinal) {
  if (ordinal < 1 || ordinal > registry_.size())
    throw std::out_of_range("no source " + std::to_string(ordinal));
  return sources_[static_cast<std::size_t>(ordinal - 1)];
}

bool Pipeline::source_running(int ordinal) const {
  return const_cast<Pipeline*>(this)->source(ordinal).running;
}

const SourceStats& Pipeline::stats(int ordinal) const {
  return const_cast<Pipeline*>(this)->source(ordinal).stats;
}

std::int64_t Pipeline::first_delivery_us(int ordinal, std::int64_t start_us) const {
  const auto& e = registry_.at(ordinal);
  const auto idx = static_cast<std::size_t>(ordinal - 1);
  const std::int64_t phase = idx < config_.phase_offsets_us.size() ? config_.phase_offsets_us[idx] : 0;
  return start_us + ms_to_us(e.spec.warm_up_ms) + phase + sources_[idx].delivery_delay_us;
}

void Pipeline::start_source(int ordinal, std::int64_t at_us) {
  auto& s = source(ordinal);
  s.running = true;
  s.capture_origin_us = first_delivery_us(ordinal, at_us) - s.delivery_delay_us;
  s.next_seq = 0;
  s.mailbox.reset();
  s.mailbox_unconsumed = false;
  s.last_shown.reset();
  s.cached_seq.reset();
}

void Pipeline::stop_source(int ordinal) {
  auto& s = source(ordinal);
  s.running = false;
  s.mailbox.reset();
  s.mailbox_unconsumed = false;
  s.cached_seq.reset();
}

void Pipeline::start(std::int64_t now_us) {
  if (running_) throw PipelineError("pipeline already running");
  running_ = true;
  start_us_ = now_us;
  now_us_ = now_us;
  out_origin_us_ = now_us;
  out_index_ = 0;
  state_ = shown_state_ = config_.initial;
  if (config_.strategy == SwitchStrategy::AllAtOnce) {
    for (int k = 1; k <= registry_.size(); ++k) start_source(k, now_us);
  } else {
    start_source(state_.primary, now_us);
  }
}

std::int64_t Pipeline::output_instant(std::uint64_t index) const {
  return out_origin_us_ + frame_time_us(index, config_.output_fps);
}

void Pipeline::deliver_until(Source& s, std::int64_t t) {
  while (s.running) {
    const std::int64_t arrive = s.capture_origin_us + frame_time_us(s.next_seq, s.fps) + s.delivery_delay_us;
    if (arrive > t) break;
    if (s.mailbox_unconsumed) ++s.stats.dropped;
    s.mailbox = s.next_seq++;
    s.mailbox_unconsumed = true;
    ++s.stats.delivered;
  }
}

const Frame& Pipeline::frame_for(int ordinal) {
  auto& s = source(ordinal);
  if (!s.mailbox) return s.placeholder;
  if (s.cached_seq != s.mailbox) {
    const auto& cap = registry_.at(ordinal).selected;
    generator_(ordinal, cap, *s.mailbox, s.capture_origin_us + frame_time_us(*s.mailbox, s.fps), s.cache);
    s.cached_seq = s.mailbox;
  }
  return *s.cache;
}

void Pipeline::begin_surgery(std::int64_t request_us, ViewState target) {
  for (int k = 1; k <= registry_.size(); ++k)
    if (source(k).running) stop_source(k);
  const std::int64_t restart = request_us + ms_to_us(config_.stop_cost_ms) + ms_to_us(config_.start_cost_ms);
  start_source(target.primary, restart);
  gap_until_ = first_delivery_us(target.primary, restart);
  projected_end_us_ = *gap_until_;
  shown_state_ = target;
}

void Pipeline::emit_at(std::int64_t instant) {
  for (auto& s : sources_) deliver_until(s, instant);

  const int n = registry_.size();
  std::vector<int> drawn;
  if (shown_state_.is_tiled()) {
    bool any = false;
    for (int k = 1; k <= n; ++k) any = any || source(k).mailbox.has_value();
    if (!any) return;
    for (int k = 1; k <= n; ++k) drawn.push_back(k);
  } else {
    if (!source(shown_state_.primary).mailbox) return;
    drawn.push_back(shown_state_.primary);
    if (config_.thumbnails_enabled)
      for (int k = 1; k <= n; ++k)
        if (k != shown_state_.primary && source(k).mailbox) drawn.push_back(k);
  }

  bool fresh = !last_emitted_state_ || *last_emitted_state_ != shown_state_;
  std::vector<SourceFrame> inputs;
  inputs.reserve(drawn.size());
  for (int k : drawn) {
    auto& s = source(k);
    if (s.mailbox && s.last_shown != s.mailbox) {
      fresh = true;
      s.last_shown = s.mailbox;
    }
    inputs.push_back({k, std::cref(frame_for(k))});
  }
  for (int k = 1; k <= n; ++k) {
    auto& s = source(k);
    if (!s.mailbox_unconsumed) continue;
    s.mailbox_unconsumed = false;
    ++s.stats.consumed;
    if (std::find(drawn.begin(), drawn.end(), k) == drawn.end()) ++s.stats.discarded;
  }

  // Recycle the previous output's storage.
  Frame canvas = latest_ ? std::move(latest_->frame) : Frame();
  if (shown_state_.is_tiled())
    compose_tiled_into(canvas, inputs, config_.canvas, config_.backend);
  else
    compose_primary_into(canvas, inputs, shown_state_.primary, config_.canvas, config_.thumbnails_enabled,
                         config_.backend);
  canvas.seq = out_seq_++;
  canvas.timestamp_us = instant - start_us_;
  last_emitted_state_ = shown_state_;
  latest_ = ComposedFrame{std::move(canvas), shown_state_, fresh, instant};
  if (collect_frames_) pending_.push_back(*latest_);
}

void Pipeline::process_until(std::int64_t t, bool inclusive) {
  auto due = [&](std::int64_t at) { return at < t || (inclusive && at == t); };
  for (;;) {
    if (gap_until_) {
      if (!due(*gap_until_)) return;
      out_origin_us_ = *gap_until_;
      out_index_ = 0;
      gap_until_.reset();
      continue;
    }
    const std::int64_t instant = output_instant(out_index_);
    if (!due(instant)) return;
    emit_at(instant);
    ++out_index_;
    if (!queued_.empty()) {
      const ViewState next = queued_.front();
      queued_.pop_front();
      begin_surgery(instant, next);
    }
  }
}

SwitchOutcome Pipeline::apply_switch(std::int64_t request_us) {
  if (!running_) throw PipelineError("apply_switch on a stopped pipeline");
  if (request_us < now_us_) throw PipelineError("apply_switch: time went backwards");
  process_until(request_us, false);
  now_us_ = request_us;

  const int n = registry_.size();
  if (config_.strategy == SwitchStrategy::AllAtOnce) {
    state_ = advance(state_, n, tiled_enabled());
    shown_state_ = state_;
    return {state_, output_instant(out_index_)};
  }

  state_ = advance(state_, n, false);
  if (gap_until_) {
    // Mid-surgery requests wait for the current switch to finish.
    queued_.push_back(state_);
    const std::int64_t restart =
        projected_end_us_ + ms_to_us(config_.stop_cost_ms) + ms_to_us(config_.start_cost_ms);
    projected_end_us_ = first_delivery_us(state_.primary, restart);
    return {state_, projected_end_us_};
  }
  begin_surgery(request_us, state_);
  return {state_, *gap_until_};
}

std::vector<ComposedFrame> Pipeline::run_until(std::int64_t now_us) {
  if (!running_) throw PipelineError("run_until on a stopped pipeline");
  if (now_us < now_us_) throw PipelineError("run_until: time went backwards");
  process_until(now_us, true);
  now_us_ = now_us;
  return std::exchange(pending_, {});
}

std::optional<ComposedFrame> Pipeline::frame_tick(std::int64_t now_us) {
  auto frames = run_until(now_us);
  if (frames.empty()) return std::nullopt;
  return std::move(frames.back());
}

std::int64_t Pipeline::next_event_us() const noexcept {
  if (!running_) return std::numeric_limits<std::int64_t>::max();
  if (gap_until_) return *gap_until_;
  return output_instant(out_index_);
}

}  // namespace multicam
