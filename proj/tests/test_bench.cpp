#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "multicam/bench.hpp"

using namespace multicam;

namespace {

CameraSpec cam(std::string name, double fps = 30.0, double warm_up_ms = 0.0, double latency_ms = 0.0) {
  return CameraSpec{std::move(name), {{{640, 480}, PixelFormat::Rgb24, fps}}, warm_up_ms, latency_ms, false, 0.0};
}

Pipeline make_pipeline(std::vector<CameraSpec> cams, SwitchStrategy strategy, ViewState initial = ViewState::Primary(1),
                       std::vector<std::int64_t> phases = {}) {
  PipelineConfig pc;
  pc.strategy = strategy;
  pc.initial = initial;
  pc.phase_offsets_us = std::move(phases);
  Pipeline p(build_registry(cams, 480), pc);
  p.start(0);
  return p;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, sep)) out.push_back(f);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

BenchConfig small_config(int n) {
  BenchConfig c;
  c.scenario = "t";
  for (int i = 1; i <= n; ++i) c.cameras.push_back(cam("cam" + std::to_string(i), 30.0, 500.0, 100.0));
  c.frame_rate.n_frames = 60;
  c.display_events = 3;
  return c;
}

}  // namespace

TEST(Bandwidth, Examples) {
  const Capability vga{{640, 480}, PixelFormat::Rgb24, 30.0};
  EXPECT_DOUBLE_EQ(bandwidth_estimate(vga), 27'648'000.0);
  EXPECT_NEAR(bandwidth_estimate(vga) / kMiB, 26.4, 0.05);
  const std::vector<Capability> four(4, vga);
  EXPECT_NEAR(bandwidth_estimate(four) / kMiB, 105.47, 0.01);
  EXPECT_DOUBLE_EQ(bandwidth_estimate(Capability{{1, 1}, PixelFormat::Rgb24, 1.0}), 3.0);
}

TEST(Bandwidth, MatchesProduct) {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> dim(1, 4000);
  std::uniform_real_distribution<double> fps(0.5, 120.0);
  for (int i = 0; i < 100; ++i) {
    const Capability c{{dim(rng), dim(rng)}, PixelFormat::Rgb24, fps(rng)};
    const double expect = static_cast<double>(c.resolution.width) * c.resolution.height * 3.0 * c.fps;
    EXPECT_DOUBLE_EQ(bandwidth_estimate(c), expect);
  }
}

class FrameRate : public ::testing::TestWithParam<double> {};

TEST_P(FrameRate, WithinTwoPercent) {
  const double fps = GetParam();
  auto p = make_pipeline({cam("c", fps)}, SwitchStrategy::AllAtOnce);
  const double got = measure_frame_rate(p);
  EXPECT_NEAR(got, fps, 0.02 * fps);
  EXPECT_NEAR(got, fps, 0.5);
}

INSTANTIATE_TEST_SUITE_P(Rates, FrameRate, ::testing::Values(5.0, 10.0, 15.0, 30.0));

TEST(FrameRateTiled, OutputCadence) {
  std::vector<CameraSpec> cams;
  for (int i = 1; i <= 4; ++i) cams.push_back(cam("c" + std::to_string(i), i == 2 ? 15.0 : 30.0));
  auto p = make_pipeline(cams, SwitchStrategy::AllAtOnce, ViewState::Tiled(), {0, 5000, 11000, 29000});
  EXPECT_NEAR(measure_frame_rate(p), 30.0, 0.5);
}

TEST(FrameRateTiled, StalledPipelineTimesOut) {
  auto p = make_pipeline({cam("slow", 0.1)}, SwitchStrategy::AllAtOnce);
  FrameRateOptions o;
  o.n_frames = 5;
  o.stall_timeout_ms = 2000;
  EXPECT_THROW(measure_frame_rate(p, o), Timeout);
}

TEST(Capture, SampleGrid) {
  CaptureModel c;
  EXPECT_EQ(c.sample_at_or_after(0), 0);
  EXPECT_EQ(c.sample_at_or_after(1), 22000);
  EXPECT_EQ(c.sample_at_or_after(22000), 22000);
  c.phase_ms = 5;
  EXPECT_EQ(c.sample_at_or_after(0), 5000);
  EXPECT_EQ(c.sample_at_or_after(27001), 49000);
  c.sampling_period_ms = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(SwitchLatency, AllAtOnceBound) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    auto p = make_pipeline({cam("a"), cam("b")}, SwitchStrategy::AllAtOnce);
    CaptureModel cap;
    cap.phase_ms = std::uniform_real_distribution<double>(0, 22)(rng);
    const auto r = std::uniform_int_distribution<std::int64_t>(1'000'000, 2'000'000)(rng);
    EXPECT_LE(measure_switch_latency(p, cap, r), 67.0);
  }
}

TEST(SwitchLatency, OneCameraTiledToggleIsObserved) {
  auto p = make_pipeline({cam("only")}, SwitchStrategy::AllAtOnce);
  EXPECT_LE(measure_switch_latency(p, {}, 500'000), 67.0);
}

TEST(SwitchLatency, OneCameraOneAtATimeNeverChanges) {
  auto p = make_pipeline({cam("only")}, SwitchStrategy::OneAtATime);
  EXPECT_THROW(measure_switch_latency(p, {}, 500'000), NoSwitchObserved);
}

TEST(SwitchLatency, OrderingAcrossWarmUps) {
  for (double warm : {100.0, 300.0, 500.0, 700.0}) {
    auto all = make_pipeline({cam("a", 30, warm), cam("b", 30, warm)}, SwitchStrategy::AllAtOnce);
    auto one = make_pipeline({cam("a", 30, warm), cam("b", 30, warm)}, SwitchStrategy::OneAtATime);
    const double la = measure_switch_latency(all, {}, 1'500'000);
    const double lo = measure_switch_latency(one, {}, 1'500'000);
    EXPECT_LT(la, lo) << "warm_up " << warm;
    EXPECT_GE(lo, warm);
  }
}

class DisplayLatencyCase : public ::testing::TestWithParam<double> {};

TEST_P(DisplayLatencyCase, RecoversInjectedLatency) {
  const double hop = GetParam();
  const double tol = 22.0 / 3.0 + 1000.0 / 30.0;
  std::mt19937_64 rng(static_cast<std::uint64_t>(hop));
  for (int trial = 0; trial < 5; ++trial) {
    FeedbackConfig fc;
    fc.hop_latency_ms = hop;
    fc.counter_phase_ms = std::uniform_real_distribution<double>(0, 1000)(rng);
    for (int d = 0; d <= fc.iterations; ++d)
      fc.source_phase_us.push_back(std::uniform_int_distribution<std::int64_t>(0, 33332)(rng));
    auto p = make_feedback_pipeline(fc);
    CaptureModel cap;
    cap.phase_ms = std::uniform_real_distribution<double>(0, 22)(rng);
    const auto dl = measure_display_latency(p, 3, 10, cap);
    ASSERT_EQ(dl.events_ms.size(), 10u);
    EXPECT_NEAR(dl.mean_ms, hop, tol);
  }
}

INSTANTIATE_TEST_SUITE_P(Hops, DisplayLatencyCase, ::testing::Values(50.0, 100.0, 300.0));

TEST(DisplayLatency, MoreIterationsShrinkSpread) {
  auto spread = [](int iterations) {
    std::mt19937_64 rng(11);
    std::vector<double> means;
    for (int trial = 0; trial < 30; ++trial) {
      FeedbackConfig fc;
      fc.iterations = iterations;
      fc.hop_latency_ms = 100;
      fc.counter_phase_ms = std::uniform_real_distribution<double>(0, 1000)(rng);
      for (int d = 0; d <= iterations; ++d)
        fc.source_phase_us.push_back(std::uniform_int_distribution<std::int64_t>(0, 33332)(rng));
      auto p = make_feedback_pipeline(fc);
      CaptureModel cap;
      cap.phase_ms = std::uniform_real_distribution<double>(0, 22)(rng);
      const auto dl = measure_display_latency(p, iterations, 1, cap);
      means.push_back(dl.mean_ms);
    }
    double m = 0;
    for (double v : means) m += v;
    m /= static_cast<double>(means.size());
    double ss = 0;
    for (double v : means) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(means.size() - 1));
  };
  EXPECT_LT(spread(3), spread(1));
}

TEST(Subsets, OrderAndCount) {
  const auto s = camera_subsets(3, SubsetMode::All);
  const std::vector<std::vector<int>> expect{{0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}, {0, 1, 2}};
  EXPECT_EQ(s, expect);
  EXPECT_EQ(camera_subsets(4, SubsetMode::All).size(), 15u);
  EXPECT_EQ(camera_subsets(4, SubsetMode::Single).size(), 4u);
  EXPECT_EQ(parse_subset_mode("single"), SubsetMode::Single);
  EXPECT_THROW(parse_subset_mode("some"), ConfigError);
}

TEST(Suite, FourCamerasFifteenRows) {
  auto c = small_config(4);
  c.strategies = {SwitchStrategy::AllAtOnce};
  const auto r = run_suite(c);
  ASSERT_EQ(r.records.size(), 15u);
  for (const auto& rec : r.records) {
    EXPECT_NEAR(rec.fps_measured, 30.0, 0.6);
    ASSERT_TRUE(rec.switch_latency_ms);
    EXPECT_LE(*rec.switch_latency_ms, 67.0);
    EXPECT_NEAR(rec.display_latency_ms, 100.0, 22.0 / 3.0 + 1000.0 / 30.0);
    EXPECT_DOUBLE_EQ(rec.bandwidth_bytes_per_s, 27'648'000.0 * static_cast<double>(rec.cameras.size()));
  }
}

TEST(Suite, TwoCamerasBothStrategies) {
  const auto r = run_suite(small_config(2));
  ASSERT_EQ(r.records.size(), 6u);
  int one_rows = 0;
  for (const auto& rec : r.records) {
    if (rec.strategy != SwitchStrategy::OneAtATime) continue;
    ++one_rows;
    EXPECT_DOUBLE_EQ(rec.bandwidth_bytes_per_s, 27'648'000.0);
    if (rec.cameras.size() == 1)
      EXPECT_FALSE(rec.switch_latency_ms);
    else
      EXPECT_GE(*rec.switch_latency_ms, 500.0);
  }
  EXPECT_EQ(one_rows, 3);
  auto c = small_config(2);
  c.strategies = {SwitchStrategy::OneAtATime};
  EXPECT_EQ(run_suite(c).records.size(), 3u);
}

TEST(Suite, RunsMultiplyRows) {
  auto c = small_config(2);
  c.runs = 2;
  c.subsets = SubsetMode::Single;
  c.strategies = {SwitchStrategy::AllAtOnce};
  EXPECT_EQ(run_suite(c).records.size(), 4u);
}

TEST(Suite, Deterministic) {
  auto c = small_config(2);
  auto a = run_suite(c), b = run_suite(c);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].switch_latency_ms, b.records[i].switch_latency_ms);
    EXPECT_EQ(a.records[i].display_latency_ms, b.records[i].display_latency_ms);
    EXPECT_EQ(a.records[i].fps_measured, b.records[i].fps_measured);
  }
}

TEST(Suite, ConfigErrors) {
  BenchConfig c;
  EXPECT_THROW(run_suite(c), ConfigError);
  c = small_config(2);
  c.runs = 0;
  EXPECT_THROW(run_suite(c), ConfigError);
  c = small_config(2);
  c.strategies.clear();
  EXPECT_THROW(run_suite(c), ConfigError);
  c = small_config(2);
  c.cameras[0].is_virtual = true;
  EXPECT_THROW(run_suite(c), ConfigError);
}

TEST(Report, CsvShape) {
  auto c = small_config(2);
  c.cameras[0].name = "cam, \"one\"";
  const auto r = run_suite(c);
  std::ostringstream os;
  write_csv(r, os);
  std::istringstream in(os.str());
  std::string line;
  ASSERT_TRUE(std::getline(in, line));
  EXPECT_EQ(line, kCsvHeader);
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    // Quoted camera field: strip it before splitting the rest.
    if (line.find('"') != std::string::npos) {
      const auto a = line.find('"');
      const auto b = line.rfind('"');
      line = line.substr(0, a) + "X" + line.substr(b + 1);
    }
    const auto f = split(line, ',');
    ASSERT_EQ(f.size(), 11u) << line;
    EXPECT_EQ(f[0], "t");
    for (int i : {1, 3, 5, 7, 8, 9, 10}) EXPECT_NO_THROW((void)std::stod(f[static_cast<std::size_t>(i)])) << line;
    EXPECT_TRUE(f[4] == "all-at-once" || f[4] == "one-at-a-time");
    if (!f[6].empty()) EXPECT_GE(std::stod(f[6]), 0.0);
  }
  EXPECT_EQ(rows, 6);
}

TEST(Report, TextSummary) {
  auto c = small_config(1);
  std::ostringstream os;
  write_text(run_suite(c), os);
  EXPECT_NE(os.str().find("cam1"), std::string::npos);
  EXPECT_NE(os.str().find("virtual"), std::string::npos);
}
