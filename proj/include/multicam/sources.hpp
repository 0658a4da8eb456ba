#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "multicam/frame.hpp"

namespace multicam {

enum class PixelFormat { Rgb24, Other };

/// One configuration a camera can be opened in.
struct Capability {
  Resolution resolution;
  PixelFormat format = PixelFormat::Rgb24;
  double fps = 30.0;

  friend bool operator==(const Capability&, const Capability&) = default;
};

inline constexpr int kDefaultTargetHeight = 640;
inline constexpr double kPreferredFps = 30.0;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoUsableCameras : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CameraSpec {
  std::string name;
  std::vector<Capability> capabilities;
  double warm_up_ms = 0.0;
  double latency_ms = 0.0;
  bool is_virtual = false;
  // Extra per-frame latency standing in for an inserted format converter
  // when the selected capability is not RGB24.
  double conversion_latency_ms = 0.0;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

struct RegistryEntry {
  int ordinal = 0;
  CameraSpec spec;
  Capability selected;
};

/// Cameras in enumeration order with ordinals 1..N.
class Registry {
 public:
  Registry() = default;
  explicit Registry(std::vector<RegistryEntry> entries);

  int size() const noexcept { return static_cast<int>(entries_.size()); }
  bool empty() const noexcept { return entries_.empty(); }
  const RegistryEntry& at(int ordinal) const;
  const std::vector<RegistryEntry>& entries() const noexcept { return entries_; }

 private:
  std::vector<RegistryEntry> entries_;
};

const std::vector<Capability>& enumerate_capabilities(const CameraSpec& spec);

/// Largest height not exceeding `target_height`, then RGB24 at 30 fps, then
/// the remaining (format, fps) preference. Falls back to the smallest height
/// when nothing fits. Ties keep declared order.
Capability select_capability(const std::vector<Capability>& caps,
                             int target_height = kDefaultTargetHeight);

/// Builds the registry, dropping virtual cameras that are not whitelisted.
Registry build_registry(const std::vector<CameraSpec>& specs,
                        int target_height = kDefaultTargetHeight,
                        const std::vector<std::string>& whitelist = {});

// ---------------------------------------------------------------------------
// Synthetic test pattern.
//
// Every synthetic frame is a solid background taken from a per-ordinal palette
// with a marker pixel at (0,0) = (ordinal, seq mod 256, 255). Palette colours
// never reach 255 in any channel, so a marker can never be mistaken for
// background and vice versa.

Rgb palette_color(int ordinal);

/// Ordinal whose palette colour equals `c`, searching 1..max_ordinal.
std::optional<int> decode_palette(Rgb c, int max_ordinal = 64);

struct Marker {
  int ordinal = 0;
  int counter = 0;
};

/// Decodes a marker pixel, if `c` is one.
std::optional<Marker> decode_marker(Rgb c);

Frame synth_frame(int ordinal, const Capability& cap, std::uint64_t seq);

/// Timestamp of frame `seq` for a source running at `fps`.
std::int64_t frame_time_us(std::uint64_t seq, double fps);

std::string to_string(PixelFormat f);
PixelFormat parse_pixel_format(const std::string& s);

}  // namespace multicam
