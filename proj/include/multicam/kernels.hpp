#pragma once

#include "multicam/frame.hpp"

// Raster kernels behind the compositor. `kernels` holds the OpenMP row-parallel
// versions; `reference` holds plain serial loops kept as the test oracle and
// the benchmark baseline. Both sets produce byte-identical output.
//
// Bounds are the caller's responsibility: every kernel assumes the target
// rectangle lies inside `dst`.

namespace multicam {

enum class Backend { Parallel, Serial };

namespace kernels {
void fill(Frame& dst, Rgb color);
void copy_at(Frame& dst, const Frame& src, Point origin);
void scale_into(Frame& dst, const Rect& target, const Frame& src);
}  // namespace kernels

namespace reference {
void fill(Frame& dst, Rgb color);
void copy_at(Frame& dst, const Frame& src, Point origin);
void scale_into(Frame& dst, const Rect& target, const Frame& src);
}  // namespace reference

inline void fill(Frame& dst, Rgb color, Backend b) {
  b == Backend::Parallel ? kernels::fill(dst, color) : reference::fill(dst, color);
}
inline void copy_at(Frame& dst, const Frame& src, Point origin, Backend b) {
  b == Backend::Parallel ? kernels::copy_at(dst, src, origin)
                         : reference::copy_at(dst, src, origin);
}
inline void scale_into(Frame& dst, const Rect& target, const Frame& src, Backend b) {
  b == Backend::Parallel ? kernels::scale_into(dst, target, src)
                         : reference::scale_into(dst, target, src);
}

}  // namespace multicam
