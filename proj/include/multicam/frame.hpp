#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace multicam {

/// Pixel dimensions of a raster. Both sides are at least one pixel.
struct Resolution {
  int width = 0;
  int height = 0;

  constexpr bool valid() const noexcept { return width >= 1 && height >= 1; }
  constexpr std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  friend constexpr bool operator==(const Resolution&, const Resolution&) = default;
};

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend constexpr bool operator==(const Rgb&, const Rgb&) = default;
};

inline constexpr Rgb kBlack{0, 0, 0};

struct Point {
  int x = 0;
  int y = 0;
  friend constexpr bool operator==(const Point&, const Point&) = default;
};

struct Rect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  constexpr Resolution size() const noexcept { return {width, height}; }
  constexpr Point center() const noexcept { return {x + width / 2, y + height / 2}; }
  constexpr bool contains(int px, int py) const noexcept {
    return px >= x && py >= y && px < x + width && py < y + height;
  }
  friend constexpr bool operator==(const Rect&, const Rect&) = default;
};

bool intersects(const Rect& a, const Rect& b) noexcept;

class OutOfBounds : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class InvalidResolution : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Owned RGB24 raster, row-major, three bytes per pixel with no row padding.
///
/// `source_ordinal` is the camera ordinal that produced the frame, or 0 for
/// composed output. `seq` and `timestamp_us` are per-source counters.
class Frame {
 public:
  Frame() = default;
  explicit Frame(Resolution res, Rgb fill = kBlack);

  const Resolution& resolution() const noexcept { return res_; }
  int width() const noexcept { return res_.width; }
  int height() const noexcept { return res_.height; }

  std::span<std::uint8_t> pixels() noexcept { return pixels_; }
  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }

  std::span<std::uint8_t> row(int y) noexcept {
    return std::span(pixels_).subspan(row_offset(y), stride());
  }
  std::span<const std::uint8_t> row(int y) const noexcept {
    return std::span(pixels_).subspan(row_offset(y), stride());
  }
  std::size_t stride() const noexcept { return static_cast<std::size_t>(res_.width) * 3; }

  Rgb pixel(int x, int y) const;
  void set_pixel(int x, int y, Rgb c);

  std::uint32_t source_ordinal = 0;
  std::uint64_t seq = 0;
  std::int64_t timestamp_us = 0;

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  std::size_t row_offset(int y) const noexcept {
    return static_cast<std::size_t>(y) * stride();
  }
  std::size_t offset(int x, int y) const;

  Resolution res_{};
  std::vector<std::uint8_t> pixels_;
};

/// Frame of `res` with every pixel set to `color`; seq and ordinal are 0.
Frame blank_frame(Resolution res, Rgb color = kBlack);

/// Returns a copy of `dst` with `src` placed at `origin`.
/// Throws OutOfBounds when the placed rectangle exceeds `dst`.
Frame blit(const Frame& dst, const Frame& src, Point origin);

/// In-place variant of blit used on hot paths.
void blit_into(Frame& dst, const Frame& src, Point origin);

/// Nearest-neighbour resample: out(x, y) = src(x * sw / tw, y * sh / th).
Frame scale_nearest(const Frame& src, Resolution target);

/// 64-bit FNV-1a over the pixel bytes. Used for determinism checks.
std::uint64_t pixel_hash(const Frame& f) noexcept;

std::string to_string(const Resolution& r);

}  // namespace multicam
