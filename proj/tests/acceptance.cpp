// Prints one PASS/FAIL line per acceptance criterion; exits non-zero on any FAIL.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "golden.hpp"
#include "multicam/bench.hpp"
#include "multicam/compositor.hpp"
#include "multicam/protocol.hpp"
#include "multicam/session.hpp"

using namespace multicam;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

CameraSpec vga(std::string name, double warm_up_ms = 0.0) {
  return CameraSpec{std::move(name), {{{640, 480}, PixelFormat::Rgb24, 30.0}}, warm_up_ms, 0.0, false, 0.0};
}

Outcome advance_cycle() {
  const auto t0 = Clock::now();
  int checked = 0;
  for (int n = 1; n <= 4; ++n) {
    for (bool tiled : {true, false}) {
      std::vector<ViewState> states;
      for (int k = 1; k <= n; ++k) states.push_back(ViewState::Primary(k));
      if (tiled) states.push_back(ViewState::Tiled());
      const int period = tiled ? n + 1 : n;
      for (const auto& start : states) {
        ViewState s = start;
        for (int i = 1; i <= period; ++i) {
          s = advance(s, n, tiled);
          if (i < period && s == start) return {false, "early return for n=" + std::to_string(n)};
        }
        if (s != start) return {false, "no return for n=" + std::to_string(n) + " from " + to_string(start)};
        ++checked;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {secs < 1.0, std::to_string(checked) + " start states, " + fmt("%.3f s", secs)};
}

Outcome golden_vectors() {
  using namespace protocol;
  const std::vector<std::string> ap2ap_strings{
      "AP2AP_PING",
      "AP2AP_PONG",
      "AP2AP_ASK_NUMCAMS",
      "AP2AP_ASK_VERSION",
      "AP2AP_ADVANCE_CAMERA",
      "AP2AP_REPLY_NUMCAMS 0",
      "AP2AP_REPLY_NUMCAMS 3",
      "AP2AP_REPLY_VERSION 1.1 0.1.0.8",
  };
  int ok = 0, total = 0;
  std::string bad;
  auto check = [&](bool c, const std::string& what) {
    ++total;
    if (c)
      ++ok;
    else if (bad.empty())
      bad = what;
  };
  for (const auto& s : ap2ap_strings) check(encode_ap2ap(decode_ap2ap(s)) == s, s);
  check(encode_ap2ap(Ap2ApMessage::reply_version()) == "AP2AP_REPLY_VERSION 1.1 0.1.0.8", "version default");

  const std::string suffix = "4AD2E57A-AF70-42AE-9A64-BC88F995B9C8";
  const std::vector<std::pair<Ap2FiltKind, std::string>> registrations{
      {Ap2FiltKind::Discover, "MulticamDiscover" + suffix}, {Ap2FiltKind::Attach, "MulticamAttach" + suffix},
      {Ap2FiltKind::AdvanceCamera, "MulticamAdvance" + suffix}, {Ap2FiltKind::Kick, "MulticamKick" + suffix},
      {Ap2FiltKind::Ping, "MulticamPing" + suffix},       {Ap2FiltKind::Pong, "MulticamPong" + suffix},
      {Ap2FiltKind::Reset, "MulticamReset" + suffix}};
  for (const auto& [kind, name] : registrations) {
    check(registration_name(kind) == name, name);
    check(decode_ap2filt({name, 5, 6}).kind == kind, name);
  }
  check(wrap_host_command("multicam", "skypeusername:1", "FOO") ==
            "ALTER APPLICATION multicam WRITE skypeusername:1 FOO",
        "host wrap");
  check(unwrap_host_command("ALTER APPLICATION multicam WRITE skypeusername:1 FOO") ==
            HostCommand{"multicam", "skypeusername:1", "FOO"},
        "host unwrap");

  for (const auto& g : load_golden(MULTICAM_GOLDEN_FILE)) {
    const auto& f = g.fields;
    if (f[0] == "ap2ap") check(encode_ap2ap(decode_ap2ap(f[1])) == f[1], f[1]);
    if (f[0] == "ap2filt") check(encode_ap2filt(decode_ap2filt({f[2], 0, 0})).registration_name == f[2], f[2]);
    if (f[0] == "host") check(wrap_host_command(f[1], f[2], f[3]) == f[4], f[4]);
  }
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + " exact" + (bad.empty() ? "" : ", first bad: " + bad)};
}

Outcome bandwidth() {
  const Capability cap{{640, 480}, PixelFormat::Rgb24, 30.0};
  const double one = bandwidth_estimate(cap) / kMiB;
  const std::vector<Capability> four(4, cap);
  const double all = bandwidth_estimate(four) / kMiB;
  const bool pass = std::abs(one - 26.0) <= 0.5 && std::abs(all - 105.0) <= 1.0;
  return {pass, fmt("1 camera %.2f MB/s (target 26 +- 0.5), 4 cameras %.2f MB/s (target 105 +- 1)", one, all)};
}

Outcome switch_latency() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  const Registry reg = build_registry({vga("a", 500.0), vga("b", 500.0)}, 480);
  double min_one = 1e9, max_all = 0, mean_one = 0, mean_all = 0;
  int ok = 0;
  constexpr int kTrials = 100;
  for (int trial = 0; trial < kTrials; ++trial) {
    CaptureModel cap;
    cap.phase_ms = std::uniform_real_distribution<double>(0.0, 22.0)(rng);
    const auto request = std::uniform_int_distribution<std::int64_t>(1'000'000, 2'000'000)(rng);
    double lat[2];
    int i = 0;
    for (auto strategy : {SwitchStrategy::AllAtOnce, SwitchStrategy::OneAtATime}) {
      PipelineConfig pc;
      pc.strategy = strategy;
      Pipeline p(reg, pc);
      p.start(0);
      lat[i++] = measure_switch_latency(p, cap, request);
    }
    max_all = std::max(max_all, lat[0]);
    min_one = std::min(min_one, lat[1]);
    mean_all += lat[0] / kTrials;
    mean_one += lat[1] / kTrials;
    if (lat[0] <= 67.0 && lat[1] >= 500.0) ++ok;
  }
  const double secs = seconds_since(t0);
  return {ok == kTrials && secs < 10.0,
          std::to_string(ok) + "/100 trials; all-at-once mean " + fmt("%.1f max %.1f ms; one-at-a-time mean %.1f min %.1f ms; ",
                                                                     mean_all, max_all, mean_one, min_one) +
              fmt("%.2f s", secs)};
}

DisplayLatency feedback_trial(double hop, int iterations, int events, std::mt19937_64& rng) {
  FeedbackConfig fc;
  fc.iterations = iterations;
  fc.hop_latency_ms = hop;
  fc.counter_phase_ms = std::uniform_real_distribution<double>(0.0, 1000.0)(rng);
  for (int d = 0; d <= iterations; ++d)
    fc.source_phase_us.push_back(std::uniform_int_distribution<std::int64_t>(0, 33'332)(rng));
  Pipeline p = make_feedback_pipeline(fc);
  CaptureModel cap;
  cap.phase_ms = std::uniform_real_distribution<double>(0.0, 22.0)(rng);
  return measure_display_latency(p, iterations, events, cap);
}

double sample_stddev(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

Outcome display_latency() {
  const double tol = 22.0 / 3.0 + 1000.0 / 30.0;
  std::mt19937_64 rng(77);
  bool pass = true;
  std::ostringstream detail;
  for (double hop : {50.0, 100.0, 300.0}) {
    double worst = 0;
    for (int trial = 0; trial < 10; ++trial) {
      const auto dl = feedback_trial(hop, 3, 10, rng);
      worst = std::max(worst, std::abs(dl.mean_ms - hop));
    }
    pass = pass && worst <= tol;
    detail << fmt("%.0f ms: worst error %.1f; ", hop, worst);
  }
  // Spread of a single-event estimate over 50 trials.
  std::vector<double> one, three;
  for (int trial = 0; trial < 50; ++trial) {
    one.push_back(feedback_trial(100.0, 1, 1, rng).mean_ms);
    three.push_back(feedback_trial(100.0, 3, 1, rng).mean_ms);
  }
  const double s1 = sample_stddev(one), s3 = sample_stddev(three);
  pass = pass && s3 <= 0.5 * s1;
  detail << fmt("tolerance %.1f ms; stddev 1 iteration %.1f ms, 3 iterations %.1f ms", tol, s1, s3);
  return {pass, detail.str()};
}

Outcome frame_rate() {
  bool pass = true;
  std::ostringstream detail;
  for (double fps : {5.0, 10.0, 15.0, 30.0}) {
    const Registry reg = build_registry({CameraSpec{"c", {{{640, 480}, PixelFormat::Rgb24, fps}}, 0, 0, false, 0}}, 480);
    Pipeline p(reg, PipelineConfig{});
    p.start(0);
    const double got = measure_frame_rate(p, FrameRateOptions{250, 1000.0, 5000.0});
    const double err = std::abs(got - fps) / fps;
    pass = pass && err < 0.02;
    detail << fmt("%.0f -> %.3f (%.2f%%); ", fps, got, 100.0 * err);
  }
  return {pass, detail.str()};
}

Outcome compositor_provenance() {
  const auto t0 = Clock::now();
  const Resolution canvas{854, 640};
  const std::vector<Resolution> sizes{{640, 480}, {320, 240}, {1280, 720}, {176, 144}};
  std::vector<Frame> src;
  for (int k = 1; k <= 4; ++k)
    src.push_back(synth_frame(k, Capability{sizes[static_cast<std::size_t>(k - 1)], PixelFormat::Rgb24, 30.0}, 7));

  int subsets = 0, checks = 0;
  for (int mask = 1; mask < 16; ++mask) {
    std::vector<SourceFrame> in;
    for (int k = 1; k <= 4; ++k)
      if (mask & (1 << (k - 1))) in.push_back({k, std::cref(src[static_cast<std::size_t>(k - 1)])});
    const int n = static_cast<int>(in.size());

    const Frame tiled = compose_tiled(in, canvas);
    if (tiled.resolution() != canvas) return {false, "tiled canvas " + to_string(tiled.resolution())};
    // Grid oracle: ceil(sqrt(n)) columns, row-major cells.
    int cols = 1;
    while (cols * cols < n) ++cols;
    const int rows = (n + cols - 1) / cols;
    const int cw = canvas.width / cols, ch = canvas.height / rows;
    for (int i = 0; i < n; ++i) {
      const int c = i % cols, r = i / cols;
      const int w = c == cols - 1 ? canvas.width - cw * (cols - 1) : cw;
      const int h = r == rows - 1 ? canvas.height - ch * (rows - 1) : ch;
      const auto got = decode_palette(tiled.pixel(c * cw + w / 2, r * ch + h / 2), 4);
      ++checks;
      if (got != in[static_cast<std::size_t>(i)].ordinal)
        return {false, "tiled mask " + std::to_string(mask) + " cell " + std::to_string(i)};
    }
    for (const auto& p : in) {
      const Frame prim = compose_primary(in, p.ordinal, canvas, true);
      if (prim.resolution() != canvas) return {false, "primary canvas " + to_string(prim.resolution())};
      ++checks;
      if (decode_palette(prim.pixel(canvas.width / 2, canvas.height / 2), 4) != p.ordinal)
        return {false, "primary " + std::to_string(p.ordinal) + " mask " + std::to_string(mask)};
    }
    ++subsets;
  }
  const double secs = seconds_since(t0);
  return {subsets == 15 && secs < 5.0,
          std::to_string(subsets) + " subsets, " + std::to_string(checks) + " pixel checks, " + fmt("%.3f s", secs)};
}

std::int64_t effective_at(const SessionEvent& e) {
  return std::stoll(e.detail.substr(e.detail.find("effective_at_us=") + 16));
}

Outcome session_end_to_end() {
  std::ostringstream detail;
  bool pass = true;

  // Remote advance timing.
  for (auto strategy : {SwitchStrategy::AllAtOnce, SwitchStrategy::OneAtATime}) {
    auto cfg = SessionConfig::defaults();
    cfg.b.strategy = strategy;
    for (auto& c : cfg.b.cameras) c.warm_up_ms = 500.0;
    auto s = create_session(cfg);
    s.step(1'234'567);
    const auto send = s.now_us();
    s.request_advance(PeerId::A, AdvanceTarget::Remote);
    const auto evs = s.step(3'000'000);
    std::optional<SessionEvent> change;
    std::optional<std::int64_t> first_frame;
    for (const auto& e : evs) {
      if (e.peer != PeerId::B) continue;
      if (e.kind == EventKind::StateChanged && !change) change = e;
      if (e.kind == EventKind::FrameEmitted && e.new_state == ViewState::Primary(2) && !first_frame)
        first_frame = e.time_us;
    }
    if (!change || !first_frame) {
      pass = false;
      detail << to_string(strategy) << ": no change; ";
      continue;
    }
    const std::int64_t arrive = send + 25'000;
    // Oracle: next 30 fps output instant at or after arrival, or the surgery gap end.
    std::int64_t expect = 0;
    if (strategy == SwitchStrategy::AllAtOnce) {
      for (std::int64_t m = 0;; ++m)
        if ((expect = m * 1'000'000 / 30) >= arrive) break;
    } else {
      expect = arrive + 25'000 + 25'000 + 500'000;
    }
    const bool ok = change->time_us == arrive && effective_at(*change) == expect && *first_frame == expect;
    pass = pass && ok;
    detail << to_string(strategy) << fmt(" switch latency %.3f ms; ", static_cast<double>(expect - arrive) / 1000.0);
  }

  // IMs: one advance per message.
  {
    auto s = create_session(SessionConfig::defaults());
    s.step(100'000);
    for (const char* text : {"a", "b", "c", "d"}) {
      s.deliver_im(PeerId::A, text);
      s.step(5'000);
    }
    const auto evs = s.step(500'000);
    int changes = 0;
    for (const auto& e : evs) changes += e.kind == EventKind::StateChanged && e.peer == PeerId::B;
    const bool ok = changes == 4 && s.state(PeerId::B) == ViewState::Primary(1);  // 3 cams + tiled
    pass = pass && ok;
    detail << "4 IMs -> " << changes << " advances; ";
  }

  // Determinism.
  auto run = [] {
    auto cfg = SessionConfig::defaults();
    cfg.randomize_phase = true;
    cfg.seed = 99;
    auto s = create_session(cfg);
    s.step(400'000);
    s.request_advance(PeerId::A, AdvanceTarget::Remote);
    s.deliver_im(PeerId::B, "x");
    s.request_advance(PeerId::B, AdvanceTarget::Local);
    s.step(1'500'000);
    std::string log;
    for (const auto& e : s.log()) log += to_string(e) + "\n";
    return std::make_tuple(log, pixel_hash(s.current_view(PeerId::A).frame), pixel_hash(s.current_view(PeerId::B).frame));
  };
  const auto r1 = run(), r2 = run();
  const bool same = r1 == r2;
  pass = pass && same;
  detail << (same ? "identical logs and frame hashes" : "runs differ");
  return {pass, detail.str()};
}

Outcome suite_rows() {
  BenchConfig c;
  c.scenario = "acceptance";
  for (int i = 1; i <= 4; ++i) {
    auto cam = vga("cam" + std::to_string(i), 500.0);
    cam.latency_ms = 100.0;
    c.cameras.push_back(cam);
  }
  c.strategies = {SwitchStrategy::AllAtOnce};
  c.frame_rate.n_frames = 100;
  c.display_events = 3;
  const auto report = run_suite(c);
  std::ostringstream os;
  write_csv(report, os);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  bool valid = line == kCsvHeader;
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    const auto commas = std::count(line.begin(), line.end(), ',');
    valid = valid && commas == 10 && line.find('"') == std::string::npos;
  }
  return {rows == 15 && valid, std::to_string(rows) + " rows" + (valid ? ", valid CSV" : ", malformed CSV")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"advance-cycle", advance_cycle},
      {"protocol-golden-vectors", golden_vectors},
      {"bandwidth-arithmetic", bandwidth},
      {"switch-latency-ordering", switch_latency},
      {"display-latency-estimator", display_latency},
      {"frame-rate-measurement", frame_rate},
      {"compositor-provenance", compositor_provenance},
      {"session-end-to-end", session_end_to_end},
      {"suite-fifteen-rows", suite_rows},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
