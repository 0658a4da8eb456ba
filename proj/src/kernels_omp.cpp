#include <algorithm>
#include <cstring>
#include <vector>

#include "multicam/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace multicam::kernels {

namespace {
// Below this many pixels the fork/join overhead dominates.
constexpr std::size_t kParallelThreshold = 64 * 64;
}  // namespace

void fill(Frame& dst, Rgb color) {
  const int h = dst.height();
  const int w = dst.width();
  const bool par = dst.resolution().pixel_count() >= kParallelThreshold;
  std::uint8_t* base = dst.pixels().data();
  const std::size_t stride = dst.stride();
  if (color.r == color.g && color.g == color.b) {
    std::memset(base, color.r, stride * static_cast<std::size_t>(h));
    return;
  }
  // Build row 0 once, then replicate it.
  for (int x = 0; x < w; ++x) {
    base[3 * x] = color.r;
    base[3 * x + 1] = color.g;
    base[3 * x + 2] = color.b;
  }
#pragma omp parallel for schedule(static) if (par)
  for (int y = 1; y < h; ++y) std::memcpy(base + static_cast<std::size_t>(y) * stride, base, stride);
}

void copy_at(Frame& dst, const Frame& src, Point origin) {
  const int h = src.height();
  const bool par = src.resolution().pixel_count() >= kParallelThreshold;
  const std::size_t src_stride = src.stride();
  const std::size_t dst_stride = dst.stride();
  const std::uint8_t* s = src.pixels().data();
  std::uint8_t* d = dst.pixels().data() + static_cast<std::size_t>(origin.x) * 3;
#pragma omp parallel for schedule(static) if (par)
  for (int y = 0; y < h; ++y) {
    std::memcpy(d + static_cast<std::size_t>(origin.y + y) * dst_stride,
                s + static_cast<std::size_t>(y) * src_stride, src_stride);
  }
}

void scale_into(Frame& dst, const Rect& target, const Frame& src) {
  const std::int64_t sw = src.width();
  const std::int64_t sh = src.height();
  const std::int64_t tw = target.width;
  const std::int64_t th = target.height;

  // Column map is shared by every row.
  std::vector<std::size_t> col(static_cast<std::size_t>(tw));
  for (std::int64_t x = 0; x < tw; ++x) col[static_cast<std::size_t>(x)] = static_cast<std::size_t>(x * sw / tw) * 3;

  const bool par = static_cast<std::size_t>(tw * th) >= kParallelThreshold;
  const std::uint8_t* s = src.pixels().data();
  std::uint8_t* d = dst.pixels().data();
  const std::size_t src_stride = src.stride();
  const std::size_t dst_stride = dst.stride();
  const std::size_t* cm = col.data();
#pragma omp parallel for schedule(static) if (par)
  for (std::int64_t y = 0; y < th; ++y) {
    const std::uint8_t* srow = s + static_cast<std::size_t>(y * sh / th) * src_stride;
    std::uint8_t* drow = d + static_cast<std::size_t>(target.y + y) * dst_stride +
                         static_cast<std::size_t>(target.x) * 3;
    for (std::int64_t x = 0; x < tw; ++x) {
      const std::uint8_t* sp = srow + cm[x];
      drow[3 * x] = sp[0];
      drow[3 * x + 1] = sp[1];
      drow[3 * x + 2] = sp[2];
    }
  }
}

}  // namespace multicam::kernels
