#include "multicam/kernels.hpp"

namespace multicam::reference {

void fill(Frame& dst, Rgb color) {
  for (int y = 0; y < dst.height(); ++y)
    for (int x = 0; x < dst.width(); ++x) dst.set_pixel(x, y, color);
}

void copy_at(Frame& dst, const Frame& src, Point origin) {
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < src.width(); ++x)
      dst.set_pixel(origin.x + x, origin.y + y, src.pixel(x, y));
}

void scale_into(Frame& dst, const Rect& target, const Frame& src) {
  const std::int64_t sw = src.width(), sh = src.height();
  const std::int64_t tw = target.width, th = target.height;
  for (std::int64_t y = 0; y < th; ++y) {
    for (std::int64_t x = 0; x < tw; ++x) {
      const auto sx = static_cast<int>(x * sw / tw);
      const auto sy = static_cast<int>(y * sh / th);
      dst.set_pixel(target.x + static_cast<int>(x), target.y + static_cast<int>(y),
                    src.pixel(sx, sy));
    }
  }
}

}  // namespace multicam::reference
