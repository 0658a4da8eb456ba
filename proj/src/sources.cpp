#include "multicam/sources.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace multicam {

void CameraSpec::validate() const {
  if (capabilities.empty()) throw ConfigError("camera '" + name + "' has no capabilities");
  for (const auto& c : capabilities) {
    if (!c.resolution.valid())
      throw ConfigError("camera '" + name + "' has invalid resolution " + to_string(c.resolution));
    if (!(c.fps > 0.0)) throw ConfigError("camera '" + name + "' has non-positive fps");
  }
  if (warm_up_ms < 0.0 || latency_ms < 0.0 || conversion_latency_ms < 0.0)
    throw ConfigError("camera '" + name + "' has a negative delay");
}

Registry::Registry(std::vector<RegistryEntry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].ordinal != static_cast<int>(i) + 1)
      throw ConfigError("registry ordinals must be 1..N in order");
  }
}

const RegistryEntry& Registry::at(int ordinal) const {
  if (ordinal < 1 || ordinal > size())
    throw std::out_of_range("no camera with ordinal " + std::to_string(ordinal));
  return entries_[static_cast<std::size_t>(ordinal - 1)];
}

const std::vector<Capability>& enumerate_capabilities(const CameraSpec& spec) {
  return spec.capabilities;
}

namespace {
bool is_preferred_rate(double fps) { return std::abs(fps - kPreferredFps) < 1e-9; }

auto preference_key(const Capability& c) {
  return std::make_tuple(c.format == PixelFormat::Rgb24, is_preferred_rate(c.fps), c.fps);
}
}  // namespace

Capability select_capability(const std::vector<Capability>& caps, int target_height) {
  if (caps.empty()) throw ConfigError("select_capability: empty capability list");
  if (target_height < 1) throw ConfigError("select_capability: target height must be >= 1");

  bool any_fits = std::any_of(caps.begin(), caps.end(), [&](const Capability& c) {
    return c.resolution.height <= target_height;
  });

  int chosen_height = 0;
  if (any_fits) {
    for (const auto& c : caps)
      if (c.resolution.height <= target_height)
        chosen_height = std::max(chosen_height, c.resolution.height);
  } else {
    chosen_height = caps.front().resolution.height;
    for (const auto& c : caps) chosen_height = std::min(chosen_height, c.resolution.height);
  }

  const Capability* best = nullptr;
  for (const auto& c : caps) {
    if (c.resolution.height != chosen_height) continue;
    // Strictly greater keeps the first declared among equals.
    if (best == nullptr || preference_key(c) > preference_key(*best)) best = &c;
  }
  return *best;
}

Registry build_registry(const std::vector<CameraSpec>& specs, int target_height,
                        const std::vector<std::string>& whitelist) {
  std::vector<RegistryEntry> entries;
  for (const auto& spec : specs) {
    spec.validate();
    if (spec.is_virtual &&
        std::find(whitelist.begin(), whitelist.end(), spec.name) == whitelist.end())
      continue;
    const int ordinal = static_cast<int>(entries.size()) + 1;
    entries.push_back({ordinal, spec, select_capability(spec.capabilities, target_height)});
  }
  if (entries.empty()) throw NoUsableCameras("no usable cameras after virtual-camera exclusion");
  return Registry(std::move(entries));
}

Rgb palette_color(int ordinal) {
  // Hue byte -> fully saturated colour at value 200.
  const int hue = (ordinal * 75) % 256;
  constexpr int v = 200;
  const int region = hue / 43;
  const int rem = (hue - region * 43) * 6;
  const auto q = static_cast<std::uint8_t>(v * (255 - rem) / 255);
  const auto t = static_cast<std::uint8_t>(v * rem / 255);
  const auto V = static_cast<std::uint8_t>(v);
  switch (region) {
    case 0: return {V, t, 0};
    case 1: return {q, V, 0};
    case 2: return {0, V, t};
    case 3: return {0, q, V};
    case 4: return {t, 0, V};
    default: return {V, 0, q};
  }
}

std::optional<int> decode_palette(Rgb c, int max_ordinal) {
  for (int k = 1; k <= max_ordinal; ++k)
    if (palette_color(k) == c) return k;
  return std::nullopt;
}

std::optional<Marker> decode_marker(Rgb c) {
  if (c.b != 255) return std::nullopt;
  return Marker{c.r, c.g};
}

std::int64_t frame_time_us(std::uint64_t seq, double fps) {
  return static_cast<std::int64_t>(std::floor(static_cast<double>(seq) * 1e6 / fps));
}

Frame synth_frame(int ordinal, const Capability& cap, std::uint64_t seq) {
  if (ordinal < 1) throw std::invalid_argument("synth_frame: ordinal must be >= 1");
  Frame f(cap.resolution, palette_color(ordinal));
  f.set_pixel(0, 0, {static_cast<std::uint8_t>(ordinal), static_cast<std::uint8_t>(seq % 256), 255});
  f.source_ordinal = static_cast<std::uint32_t>(ordinal);
  f.seq = seq;
  f.timestamp_us = frame_time_us(seq, cap.fps);
  return f;
}

std::string to_string(PixelFormat f) { return f == PixelFormat::Rgb24 ? "RGB24" : "OTHER"; }

PixelFormat parse_pixel_format(const std::string& s) {
  if (s == "RGB24" || s == "rgb24") return PixelFormat::Rgb24;
  if (s == "OTHER" || s == "other") return PixelFormat::Other;
  throw ConfigError("unknown pixel format '" + s + "'");
}

}  // namespace multicam
