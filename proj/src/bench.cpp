#include "multicam/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>

#include "multicam/compositor.hpp"

namespace multicam {

double bandwidth_estimate(const Capability& cap) {
  return static_cast<double>(cap.resolution.width) * cap.resolution.height * 3.0 * cap.fps;
}

double bandwidth_estimate(std::span<const Capability> caps) {
  double total = 0.0;
  for (const auto& c : caps) total += bandwidth_estimate(c);
  return total;
}

namespace {

std::int64_t ms_to_us(double ms) { return static_cast<std::int64_t>(std::llround(ms * 1000.0)); }

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

class CollectionOff {
 public:
  explicit CollectionOff(Pipeline& p) : p_(p), was_(p.collect_frames()) { p_.set_collect_frames(false); }
  ~CollectionOff() { p_.set_collect_frames(was_); }
  CollectionOff(const CollectionOff&) = delete;
  CollectionOff& operator=(const CollectionOff&) = delete;

 private:
  Pipeline& p_;
  bool was_;
};

struct FrameRateRun {
  double fps = 0.0;
  std::uint64_t composed = 0;
};

FrameRateRun run_frame_rate(Pipeline& p, const FrameRateOptions& opts) {
  if (!p.running()) throw PipelineError("measure_frame_rate: pipeline not running");
  if (opts.n_frames < 2) throw std::invalid_argument("measure_frame_rate: need at least 2 frames");
  const std::int64_t burn_end = p.now_us() + ms_to_us(opts.burn_in_ms);
  const std::int64_t stall = ms_to_us(opts.stall_timeout_ms);

  FrameRateRun run;
  std::vector<std::int64_t> times;
  times.reserve(static_cast<std::size_t>(opts.n_frames));
  std::int64_t last_fresh = burn_end;
  const CollectionOff quiet(p);
  // One event per step, so at most one frame is emitted each time.
  while (static_cast<int>(times.size()) < opts.n_frames) {
    const std::int64_t t = p.next_event_us();
    if (t == std::numeric_limits<std::int64_t>::max()) throw Timeout("pipeline is idle");
    if (t - last_fresh > stall) throw Timeout("no fresh frame for " + std::to_string(opts.stall_timeout_ms) + " ms");
    p.run_until(t);
    const auto& f = p.latest();
    if (!f || f->emitted_at_us != t) continue;
    ++run.composed;
    if (!f->fresh || t < burn_end) continue;
    last_fresh = t;
    times.push_back(t);
  }
  const double span_s = static_cast<double>(times.back() - times.front()) / 1e6;
  run.fps = span_s > 0.0 ? (opts.n_frames - 1) / span_s : std::numeric_limits<double>::infinity();
  return run;
}

std::optional<Marker> read_marker(const Frame& f, const Rect& r) {
  const Point c = r.center();
  return decode_marker(f.pixel(c.x, c.y));
}

}  // namespace

double measure_frame_rate(Pipeline& pipeline, const FrameRateOptions& opts) {
  return run_frame_rate(pipeline, opts).fps;
}

void CaptureModel::validate() const {
  if (!(sampling_period_ms > 0.0)) throw ConfigError("sampling period must be positive");
}

std::int64_t CaptureModel::period_us() const { return ms_to_us(sampling_period_ms); }

std::int64_t CaptureModel::sample_at_or_after(std::int64_t t_us) const {
  const std::int64_t period = period_us();
  const std::int64_t phase = ms_to_us(phase_ms);
  return phase + (floor_div(t_us - phase + period - 1, period)) * period;
}

double measure_switch_latency(Pipeline& pipeline, const CaptureModel& capture, std::int64_t request_us) {
  capture.validate();
  if (!pipeline.running()) throw PipelineError("measure_switch_latency: pipeline not running");
  const CollectionOff quiet(pipeline);
  pipeline.apply_switch(request_us);
  const auto& before = pipeline.latest();
  if (!before) throw NoSwitchObserved("nothing displayed before the request");
  const auto pre = before->frame.pixel(0, 0);

  const std::int64_t click = capture.sample_at_or_after(request_us);
  const std::int64_t limit = click + 5'000'000;
  for (std::int64_t s = click; s <= limit; s += capture.period_us()) {
    pipeline.run_until(s);
    if (pipeline.latest()->frame.pixel(0, 0).r != pre.r) return static_cast<double>(s - click) / 1000.0;
  }
  throw NoSwitchObserved("view did not change within 5 s");
}

Pipeline make_feedback_pipeline(const FeedbackConfig& cfg) {
  if (cfg.iterations < 1) throw std::invalid_argument("feedback chain needs at least one iteration");
  const int n = cfg.iterations + 1;
  const Capability cap{cfg.source_size, PixelFormat::Rgb24, cfg.source_fps};

  std::vector<RegistryEntry> entries;
  for (int k = 1; k <= n; ++k) {
    CameraSpec spec;
    spec.name = "loop-" + std::to_string(k - 1);
    spec.capabilities = {cap};
    entries.push_back({k, spec, cap});
  }

  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  const int rows = (n + cols - 1) / cols;

  PipelineConfig pc;
  pc.strategy = SwitchStrategy::AllAtOnce;
  pc.canvas = {cols * cfg.source_size.width, rows * cfg.source_size.height};
  pc.output_fps = cfg.output_fps;
  pc.tiled_enabled = true;
  pc.initial = ViewState::Tiled();
  pc.backend = cfg.backend;
  pc.phase_offsets_us = cfg.source_phase_us;

  const std::int64_t hop = ms_to_us(cfg.hop_latency_ms);
  const std::int64_t phase = ms_to_us(cfg.counter_phase_ms);
  FrameGenerator gen = [hop, phase, backend = cfg.backend](int ordinal, const Capability& c, std::uint64_t seq, std::int64_t capture_us,
                                    std::optional<Frame>& slot) {
    const std::int64_t counter = floor_div(capture_us - (ordinal - 1) * hop - phase, 1'000'000);
    const auto g = static_cast<std::uint8_t>(((counter % 256) + 256) % 256);
    const Rgb colour{static_cast<std::uint8_t>(ordinal), g, 255};
    if (slot && slot->resolution() == c.resolution)
      fill(*slot, colour, backend);
    else
      slot = Frame(c.resolution, colour);
    slot->source_ordinal = static_cast<std::uint32_t>(ordinal);
    slot->seq = seq;
    slot->timestamp_us = capture_us;
  };

  Pipeline p(Registry(std::move(entries)), pc, std::move(gen));
  p.start(0);
  return p;
}

DisplayLatency measure_display_latency(Pipeline& pipeline, int iterations, int events,
                                       const CaptureModel& capture) {
  capture.validate();
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (events < 1 || events > 200) throw std::invalid_argument("events must be in 1..200");
  if (pipeline.registry().size() != iterations + 1)
    throw std::invalid_argument("pipeline is not a feedback chain of depth " + std::to_string(iterations));
  if (!pipeline.state().is_tiled()) throw std::invalid_argument("feedback chain must be tiled");

  std::vector<Resolution> sizes;
  for (const auto& e : pipeline.registry().entries()) sizes.push_back(e.selected.resolution);
  const auto rects = tiled_placements(sizes, pipeline.config().canvas);
  const Rect first = rects.front();
  const Rect last = rects.back();
  const int last_ordinal = iterations + 1;

  // First sampled appearance of each counter value after a visible change.
  std::vector<std::pair<int, std::int64_t>> starts;  // tile 1, in order
  std::map<int, std::int64_t> ends;                  // last tile
  std::optional<int> prev_first, prev_last;
  bool skipped_first_change = false;

  const std::int64_t period = capture.period_us();
  std::int64_t s = capture.sample_at_or_after(pipeline.now_us());
  const std::int64_t deadline = s + static_cast<std::int64_t>(events + 2) * 1'000'000 + 120'000'000;

  auto done = [&] {
    if (static_cast<int>(starts.size()) < events) return false;
    return std::all_of(starts.begin(), starts.end(), [&](const auto& st) { return ends.count(st.first) > 0; });
  };

  const CollectionOff quiet(pipeline);
  for (; !done(); s += period) {
    if (s > deadline) throw Timeout("feedback counter not observed at the end of the chain");
    pipeline.run_until(s);
    const auto& shown = pipeline.latest();
    if (!shown) continue;
    auto m0 = read_marker(shown->frame, first);
    auto m1 = read_marker(shown->frame, last);
    if (m0 && m0->ordinal == 1) {
      if (prev_first && *prev_first != m0->counter) {
        if (!skipped_first_change) {
          skipped_first_change = true;
        } else if (static_cast<int>(starts.size()) < events) {
          starts.emplace_back(m0->counter, s);
          ends.erase(m0->counter);  // a stale entry from 256 counts ago
        }
      }
      prev_first = m0->counter;
    }
    if (m1 && m1->ordinal == last_ordinal) {
      if (prev_last && *prev_last != m1->counter && !ends.count(m1->counter)) ends[m1->counter] = s;
      prev_last = m1->counter;
    }
  }

  DisplayLatency out;
  for (const auto& [value, t0] : starts)
    out.events_ms.push_back(static_cast<double>(ends.at(value) - t0) / 1000.0 / iterations);
  const double n = static_cast<double>(out.events_ms.size());
  out.mean_ms = std::accumulate(out.events_ms.begin(), out.events_ms.end(), 0.0) / n;
  if (out.events_ms.size() > 1) {
    double ss = 0.0;
    for (double v : out.events_ms) ss += (v - out.mean_ms) * (v - out.mean_ms);
    out.stddev_ms = std::sqrt(ss / (n - 1.0));
  }
  return out;
}

std::string to_string(SubsetMode m) { return m == SubsetMode::All ? "all" : "single"; }

SubsetMode parse_subset_mode(const std::string& s) {
  if (s == "all") return SubsetMode::All;
  if (s == "single") return SubsetMode::Single;
  throw ConfigError("unknown subset mode '" + s + "'");
}

std::vector<std::vector<int>> camera_subsets(int n, SubsetMode mode) {
  if (n < 0 || n > 16) throw std::invalid_argument("camera_subsets: n out of range");
  std::vector<std::vector<int>> out;
  if (mode == SubsetMode::Single) {
    for (int i = 0; i < n; ++i) out.push_back({i});
    return out;
  }
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<int> s;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) s.push_back(i);
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  return out;
}

void BenchConfig::validate() const {
  if (cameras.empty()) throw ConfigError("bench: no cameras configured");
  if (cameras.size() > 8) throw ConfigError("bench: at most 8 cameras");
  for (const auto& c : cameras) {
    c.validate();
    if (c.is_virtual) throw ConfigError("bench: camera '" + c.name + "' is virtual");
  }
  if (strategies.empty()) throw ConfigError("bench: no strategies");
  if (runs < 1) throw ConfigError("bench: runs must be >= 1");
  if (!(output_fps > 0.0)) throw ConfigError("bench: output_fps must be positive");
  if (target_height < 2) throw ConfigError("bench: target_height too small");
  if (frame_rate.n_frames < 2) throw ConfigError("bench: n_frames must be >= 2");
  if (frame_rate.burn_in_ms < 0.0) throw ConfigError("bench: burn_in_ms must be >= 0");
  if (!(capture.sampling_period_ms > 0.0)) throw ConfigError("bench: sampling_period_ms must be positive");
  if (display_iterations < 1) throw ConfigError("bench: display iterations must be >= 1");
  if (display_events < 1 || display_events > 200) throw ConfigError("bench: display events must be in 1..200");
}

BenchReport run_suite(const BenchConfig& config) {
  config.validate();
  BenchReport report;
  report.scenario = config.scenario;
  report.seed = config.seed;

  std::mt19937_64 rng(config.seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  const auto subsets = camera_subsets(static_cast<int>(config.cameras.size()), config.subsets);
  for (int run = 0; run < config.runs; ++run) {
    for (const auto& subset : subsets) {
      std::vector<CameraSpec> specs;
      for (int i : subset) specs.push_back(config.cameras[static_cast<std::size_t>(i)]);
      const Registry registry = build_registry(specs, config.target_height);

      for (SwitchStrategy strategy : config.strategies) {
        BenchRecord rec;
        rec.scenario = config.scenario;
        rec.run = run;
        rec.strategy = strategy;
        for (const auto& e : registry.entries()) rec.cameras.push_back(e.spec.name);

        PipelineConfig pc;
        pc.strategy = strategy;
        pc.canvas = canvas_for_height(config.target_height);
        pc.output_fps = config.output_fps;
        pc.stop_cost_ms = config.stop_cost_ms;
        pc.start_cost_ms = config.start_cost_ms;
        pc.backend = config.backend;
        for (const auto& e : registry.entries())
          pc.phase_offsets_us.push_back(ms_to_us(uniform(0.0, 1000.0 / e.selected.fps)));

        {
          Pipeline p(registry, pc);
          p.start(0);
          const auto t0 = std::chrono::steady_clock::now();
          const auto fr = run_frame_rate(p, config.frame_rate);
          const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
          rec.fps_measured = fr.fps;
          rec.compose_fps_wall = wall > 0.0 ? static_cast<double>(fr.composed) / wall : 0.0;
        }

        const bool view_can_change = strategy == SwitchStrategy::AllAtOnce || registry.size() > 1;
        if (view_can_change) {
          Pipeline p(registry, pc);
          p.start(0);
          CaptureModel cap = config.capture;
          cap.phase_ms = uniform(0.0, cap.sampling_period_ms);
          const auto request = ms_to_us(config.frame_rate.burn_in_ms + uniform(0.0, 1000.0));
          rec.switch_latency_ms = measure_switch_latency(p, cap, request);
        }

        {
          const auto& lead = registry.at(1);
          FeedbackConfig fc;
          fc.iterations = config.display_iterations;
          fc.hop_latency_ms = lead.spec.latency_ms +
                              (lead.selected.format == PixelFormat::Rgb24 ? 0.0 : lead.spec.conversion_latency_ms);
          fc.counter_phase_ms = uniform(0.0, 1000.0);
          fc.output_fps = config.output_fps;
          fc.backend = config.backend;
          for (int d = 0; d <= fc.iterations; ++d)
            fc.source_phase_us.push_back(ms_to_us(uniform(0.0, 1000.0 / fc.source_fps)));
          Pipeline loop = make_feedback_pipeline(fc);
          CaptureModel cap = config.capture;
          cap.phase_ms = uniform(0.0, cap.sampling_period_ms);
          const auto dl = measure_display_latency(loop, fc.iterations, config.display_events, cap);
          rec.display_latency_ms = std::max(0.0, dl.mean_ms);
          rec.display_latency_stddev_ms = dl.stddev_ms;
        }

        // One-at-a-time streams only the primary camera.
        if (strategy == SwitchStrategy::AllAtOnce) {
          for (const auto& e : registry.entries()) rec.bandwidth_bytes_per_s += bandwidth_estimate(e.selected);
        } else {
          rec.bandwidth_bytes_per_s = bandwidth_estimate(registry.at(1).selected);
        }
        report.records.push_back(std::move(rec));
      }
    }
  }
  return report;
}

namespace {

std::string num(double v, int decimals = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

void write_csv(const BenchReport& report, std::ostream& out) {
  out << kCsvHeader << "\n";
  for (const auto& r : report.records) {
    out << csv_field(r.scenario) << ',' << r.run << ',' << csv_field(join(r.cameras, "+")) << ','
        << r.cameras.size() << ',' << to_string(r.strategy) << ',' << num(r.fps_measured) << ','
        << (r.switch_latency_ms ? num(*r.switch_latency_ms) : std::string()) << ','
        << num(r.display_latency_ms) << ',' << num(r.display_latency_stddev_ms) << ','
        << num(r.bandwidth_bytes_per_s, 0) << ',' << num(r.compose_fps_wall, 1) << "\n";
  }
}

void write_text(const BenchReport& report, std::ostream& out) {
  out << "scenario: " << report.scenario << "\n"
      << "clock:    " << report.clock << "\n"
      << "seed:     " << report.seed << "\n"
      << "runs:     " << report.records.size() << "\n\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-4s %-28s %-14s %8s %10s %10s %8s %10s %9s\n", "run", "cameras", "strategy",
                "fps", "switch_ms", "disp_ms", "disp_sd", "MiB/s", "wall_fps");
  out << line;
  for (const auto& r : report.records) {
    std::snprintf(line, sizeof line, "%-4d %-28s %-14s %8.2f %10s %10.2f %8.2f %10.2f %9.1f\n", r.run,
                  join(r.cameras, "+").c_str(), to_string(r.strategy).c_str(), r.fps_measured,
                  r.switch_latency_ms ? num(*r.switch_latency_ms, 1).c_str() : "-", r.display_latency_ms,
                  r.display_latency_stddev_ms, r.bandwidth_bytes_per_s / kMiB, r.compose_fps_wall);
    out << line;
  }
}

}  // namespace multicam
