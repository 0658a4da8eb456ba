// Serial reference vs OpenMP kernels on the compositor's working sizes.

#include <benchmark/benchmark.h>

#include <vector>

#include "multicam/compositor.hpp"
#include "multicam/kernels.hpp"
#include "multicam/sources.hpp"

using namespace multicam;

namespace {

const Capability kVga{{640, 480}, PixelFormat::Rgb24, 30.0};
const Resolution kCanvas{854, 640};

Backend backend_of(const benchmark::State& st) { return st.range(0) ? Backend::Parallel : Backend::Serial; }

void BM_ScaleVgaToCanvas(benchmark::State& st) {
  const Frame src = synth_frame(1, kVga, 7);
  Frame dst(kCanvas);
  const Rect target = fit_centered(src.resolution(), {0, 0, kCanvas.width, kCanvas.height});
  const Backend b = backend_of(st);
  for (auto _ : st) {
    scale_into(dst, target, src, b);
    benchmark::DoNotOptimize(dst.pixels().data());
  }
  st.SetItemsProcessed(st.iterations() * target.width * target.height);
}

void BM_CopyVga(benchmark::State& st) {
  const Frame src = synth_frame(1, kVga, 7);
  Frame dst(kCanvas);
  const Backend b = backend_of(st);
  for (auto _ : st) {
    copy_at(dst, src, {107, 80}, b);
    benchmark::DoNotOptimize(dst.pixels().data());
  }
  st.SetBytesProcessed(st.iterations() * static_cast<std::int64_t>(src.pixels().size()));
}

void BM_ComposeTiled4(benchmark::State& st) {
  std::vector<Frame> frames;
  for (int k = 1; k <= 4; ++k) frames.push_back(synth_frame(k, kVga, 0));
  std::vector<SourceFrame> in;
  for (int k = 1; k <= 4; ++k) in.push_back({k, std::cref(frames[static_cast<std::size_t>(k - 1)])});
  const Backend b = backend_of(st);
  for (auto _ : st) {
    Frame out = compose_tiled(in, kCanvas, b);
    benchmark::DoNotOptimize(out.pixels().data());
  }
  st.SetItemsProcessed(st.iterations());
}

void BM_ComposePrimary4(benchmark::State& st) {
  std::vector<Frame> frames;
  for (int k = 1; k <= 4; ++k) frames.push_back(synth_frame(k, kVga, 0));
  std::vector<SourceFrame> in;
  for (int k = 1; k <= 4; ++k) in.push_back({k, std::cref(frames[static_cast<std::size_t>(k - 1)])});
  const Backend b = backend_of(st);
  for (auto _ : st) {
    Frame out = compose_primary(in, 2, kCanvas, true, b);
    benchmark::DoNotOptimize(out.pixels().data());
  }
  st.SetItemsProcessed(st.iterations());
}

}  // namespace

// Arg 0 = serial reference, 1 = OpenMP.
BENCHMARK(BM_ScaleVgaToCanvas)->Arg(0)->Arg(1);
BENCHMARK(BM_CopyVga)->Arg(0)->Arg(1);
BENCHMARK(BM_ComposeTiled4)->Arg(0)->Arg(1);
BENCHMARK(BM_ComposePrimary4)->Arg(0)->Arg(1);

BENCHMARK_MAIN();
