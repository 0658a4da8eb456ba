#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "multicam/frame.hpp"
#include "multicam/kernels.hpp"

namespace multicam {

class UnknownPrimary : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A camera frame tagged with its ordinal, as handed to the compositor.
struct SourceFrame {
  int ordinal = 0;
  std::reference_wrapper<const Frame> frame;
};

/// Output canvas for a target height: (2 * round(h * 2/3), h), 854x640 at 640.
Resolution canvas_for_height(int target_height);

/// Grid cells for `n` tiles: ceil(sqrt(n)) columns, row-major, remainder
/// pixels go to the last row and column.
std::vector<Rect> tile_layout(int n, Resolution canvas);

/// Largest aspect-preserving rectangle for `src` inside `cell`, centred.
Rect fit_centered(Resolution src, const Rect& cell);

struct ThumbnailGeometry {
  int height_divisor = 5;
  int margin = 8;
  int gap = 8;
};

/// Bottom-left thumbnail slots, left to right, for the given source sizes.
/// Slots that would run past the right edge are dropped.
std::vector<Rect> thumbnail_layout(std::span<const Resolution> sources, Resolution canvas,
                                   const ThumbnailGeometry& geo = {});

/// Where each tile's image lands on the canvas in tiled mode.
std::vector<Rect> tiled_placements(std::span<const Resolution> sources, Resolution canvas);

/// Where the primary image lands: unscaled and centred if it fits, otherwise
/// scaled down to fit and centred.
Rect primary_placement(Resolution src, Resolution canvas);

// Composed frames carry a view marker at (0,0): (primary ordinal, primary seq
// mod 256, 255) in primary mode and (0, tile count, 255) in tiled mode. It is
// the same marker convention synthetic sources use, so a downstream reader can
// tell the view from one pixel.
inline constexpr int kTiledMarkerOrdinal = 0;

Frame compose_tiled(std::span<const SourceFrame> frames, Resolution canvas,
                    Backend backend = Backend::Parallel);

Frame compose_primary(std::span<const SourceFrame> frames, int primary, Resolution canvas,
                      bool thumbnails_enabled, Backend backend = Backend::Parallel,
                      const ThumbnailGeometry& geo = {});

// In-place variants: `out` is cleared to black at `canvas` size, reusing its
// storage when the size already matches. `out` must not alias an input.
void compose_tiled_into(Frame& out, std::span<const SourceFrame> frames, Resolution canvas,
                        Backend backend = Backend::Parallel);

void compose_primary_into(Frame& out, std::span<const SourceFrame> frames, int primary, Resolution canvas,
                          bool thumbnails_enabled, Backend backend = Backend::Parallel,
                          const ThumbnailGeometry& geo = {});

}  // namespace multicam
