#include "multicam/frame.hpp"

#include "multicam/kernels.hpp"

namespace multicam {

namespace {
void require_valid(Resolution res) {
  if (!res.valid())
    throw InvalidResolution("resolution must be at least 1x1, got " + to_string(res));
}

void require_fits(const Frame& dst, const Frame& src, Point origin) {
  if (origin.x < 0 || origin.y < 0 ||
      static_cast<std::int64_t>(origin.x) + src.width() > dst.width() ||
      static_cast<std::int64_t>(origin.y) + src.height() > dst.height()) {
    throw OutOfBounds("blit of " + to_string(src.resolution()) + " at (" +
                      std::to_string(origin.x) + "," + std::to_string(origin.y) +
                      ") exceeds " + to_string(dst.resolution()));
  }
}
}  // namespace

bool intersects(const Rect& a, const Rect& b) noexcept {
  return a.x < b.x + b.width && b.x < a.x + a.width && a.y < b.y + b.height &&
         b.y < a.y + a.height;
}

Frame::Frame(Resolution res, Rgb fill) : res_(res) {
  require_valid(res);
  pixels_.resize(res.pixel_count() * 3);
  if (fill != kBlack) kernels::fill(*this, fill);
}

std::size_t Frame::offset(int x, int y) const {
  if (x < 0 || y < 0 || x >= res_.width || y >= res_.height)
    throw OutOfBounds("pixel (" + std::to_string(x) + "," + std::to_string(y) +
                      ") outside " + to_string(res_));
  return row_offset(y) + static_cast<std::size_t>(x) * 3;
}

Rgb Frame::pixel(int x, int y) const {
  const auto o = offset(x, y);
  return {pixels_[o], pixels_[o + 1], pixels_[o + 2]};
}

void Frame::set_pixel(int x, int y, Rgb c) {
  const auto o = offset(x, y);
  pixels_[o] = c.r;
  pixels_[o + 1] = c.g;
  pixels_[o + 2] = c.b;
}

Frame blank_frame(Resolution res, Rgb color) { return Frame(res, color); }

Frame blit(const Frame& dst, const Frame& src, Point origin) {
  Frame out = dst;
  blit_into(out, src, origin);
  return out;
}

void blit_into(Frame& dst, const Frame& src, Point origin) {
  require_fits(dst, src, origin);
  kernels::copy_at(dst, src, origin);
}

Frame scale_nearest(const Frame& src, Resolution target) {
  require_valid(target);
  Frame out(target);
  out.source_ordinal = src.source_ordinal;
  out.seq = src.seq;
  out.timestamp_us = src.timestamp_us;
  if (target == src.resolution()) {
    kernels::copy_at(out, src, {0, 0});
  } else {
    kernels::scale_into(out, {0, 0, target.width, target.height}, src);
  }
  return out;
}

std::uint64_t pixel_hash(const Frame& f) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : f.pixels()) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_string(const Resolution& r) {
  return std::to_string(r.width) + "x" + std::to_string(r.height);
}

}  // namespace multicam
