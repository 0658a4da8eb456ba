#include "multicam/compositor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace multicam {

Resolution canvas_for_height(int target_height) {
  if (target_height < 1) throw InvalidResolution("canvas height must be >= 1");
  const auto half_width = std::lround(target_height * 2.0 / 3.0);
  return {static_cast<int>(2 * half_width), target_height};
}

std::vector<Rect> tile_layout(int n, Resolution canvas) {
  if (n < 1) throw std::invalid_argument("tile_layout: n must be >= 1");
  if (!canvas.valid()) throw InvalidResolution("tile_layout: invalid canvas");
  int cols = 1;
  while (cols * cols < n) ++cols;
  const int rows = (n + cols - 1) / cols;
  const int cell_w = canvas.width / cols;
  const int cell_h = canvas.height / rows;

  std::vector<Rect> cells;
  cells.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int r = i / cols;
    const int c = i % cols;
    const int w = c == cols - 1 ? canvas.width - cell_w * (cols - 1) : cell_w;
    const int h = r == rows - 1 ? canvas.height - cell_h * (rows - 1) : cell_h;
    cells.push_back({c * cell_w, r * cell_h, w, h});
  }
  return cells;
}

Rect fit_centered(Resolution src, const Rect& cell) {
  const std::int64_t sw = src.width, sh = src.height;
  const std::int64_t cw = cell.width, ch = cell.height;
  std::int64_t w = 0, h = 0;
  if (sw * ch >= sh * cw) {
    w = cw;
    h = std::max<std::int64_t>(1, sh * cw / sw);
  } else {
    h = ch;
    w = std::max<std::int64_t>(1, sw * ch / sh);
  }
  return {cell.x + static_cast<int>((cw - w) / 2), cell.y + static_cast<int>((ch - h) / 2),
          static_cast<int>(w), static_cast<int>(h)};
}

std::vector<Rect> thumbnail_layout(std::span<const Resolution> sources, Resolution canvas,
                                   const ThumbnailGeometry& geo) {
  std::vector<Rect> slots;
  const int th = canvas.height / geo.height_divisor;
  if (th < 1) return slots;
  const int y = canvas.height - geo.margin - th;
  if (y < 0) return slots;
  int x = geo.margin;
  for (const auto& s : sources) {
    const int tw = std::max(1, static_cast<int>(static_cast<std::int64_t>(s.width) * th / s.height));
    if (x + tw > canvas.width) break;
    slots.push_back({x, y, tw, th});
    x += tw + geo.gap;
  }
  return slots;
}

std::vector<Rect> tiled_placements(std::span<const Resolution> sources, Resolution canvas) {
  const auto cells = tile_layout(static_cast<int>(sources.size()), canvas);
  std::vector<Rect> out;
  out.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) out.push_back(fit_centered(sources[i], cells[i]));
  return out;
}

Rect primary_placement(Resolution src, Resolution canvas) {
  if (src.width <= canvas.width && src.height <= canvas.height)
    return {(canvas.width - src.width) / 2, (canvas.height - src.height) / 2, src.width, src.height};
  return fit_centered(src, {0, 0, canvas.width, canvas.height});
}

namespace {

void place(Frame& out, const Rect& r, const Frame& src, Backend backend) {
  if (r.size() == src.resolution())
    copy_at(out, src, {r.x, r.y}, backend);
  else
    scale_into(out, r, src, backend);
}

void stamp(Frame& out, int ordinal, int counter) {
  out.set_pixel(0, 0, {static_cast<std::uint8_t>(ordinal),
                       static_cast<std::uint8_t>(counter % 256), 255});
}

void reset_canvas(Frame& out, Resolution canvas, Backend backend) {
  if (!canvas.valid()) throw InvalidResolution("invalid canvas " + to_string(canvas));
  if (out.resolution() == canvas)
    fill(out, kBlack, backend);
  else
    out = Frame(canvas);
  out.source_ordinal = 0;
  out.seq = 0;
  out.timestamp_us = 0;
}

}  // namespace

Frame compose_tiled(std::span<const SourceFrame> frames, Resolution canvas, Backend backend) {
  Frame out;
  compose_tiled_into(out, frames, canvas, backend);
  return out;
}

Frame compose_primary(std::span<const SourceFrame> frames, int primary, Resolution canvas,
                      bool thumbnails_enabled, Backend backend, const ThumbnailGeometry& geo) {
  Frame out;
  compose_primary_into(out, frames, primary, canvas, thumbnails_enabled, backend, geo);
  return out;
}

void compose_tiled_into(Frame& out, std::span<const SourceFrame> frames, Resolution canvas, Backend backend) {
  if (frames.empty()) throw std::invalid_argument("compose_tiled: no frames");
  std::vector<Resolution> sizes;
  sizes.reserve(frames.size());
  for (const auto& f : frames) sizes.push_back(f.frame.get().resolution());
  const auto rects = tiled_placements(sizes, canvas);

  reset_canvas(out, canvas, backend);
  for (std::size_t i = 0; i < frames.size(); ++i) place(out, rects[i], frames[i].frame.get(), backend);
  stamp(out, kTiledMarkerOrdinal, static_cast<int>(frames.size()));
}

void compose_primary_into(Frame& out, std::span<const SourceFrame> frames, int primary, Resolution canvas,
                          bool thumbnails_enabled, Backend backend, const ThumbnailGeometry& geo) {
  auto it = std::find_if(frames.begin(), frames.end(),
                         [&](const SourceFrame& f) { return f.ordinal == primary; });
  if (it == frames.end())
    throw UnknownPrimary("primary camera " + std::to_string(primary) + " not among inputs");

  const Frame& main = it->frame.get();
  reset_canvas(out, canvas, backend);
  place(out, primary_placement(main.resolution(), canvas), main, backend);

  if (thumbnails_enabled) {
    std::vector<SourceFrame> others;
    for (const auto& f : frames)
      if (f.ordinal != primary) others.push_back(f);
    std::stable_sort(others.begin(), others.end(),
                     [](const SourceFrame& a, const SourceFrame& b) { return a.ordinal < b.ordinal; });
    std::vector<Resolution> sizes;
    for (const auto& f : others) sizes.push_back(f.frame.get().resolution());
    const auto slots = thumbnail_layout(sizes, canvas, geo);
    for (std::size_t i = 0; i < slots.size(); ++i)
      scale_into(out, slots[i], others[i].frame.get(), backend);
  }

  stamp(out, primary, static_cast<int>(main.seq % 256));
}

}  // namespace multicam
