#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "multicam/runner.hpp"
#include "multicam/session.hpp"

namespace httplib {
class Server;
}

namespace multicam {

// ---------------------------------------------------------------------------
// FrameMessage wire format, all integers big-endian:
//
//   offset size field
//        0    4 magic "MCAM"
//        4    1 version (1)
//        5    1 peer id ('A' or 'B')
//        6    2 width
//        8    2 height
//       10    4 seq (low 32 bits)
//       14    8 timestamp_us
//       22    - width * height * 3 bytes RGB24, row-major

inline constexpr std::size_t kFrameHeaderSize = 22;
inline constexpr std::uint8_t kFrameMessageVersion = 1;

class MalformedFrameMessage : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct DecodedFrameMessage {
  PeerId peer = PeerId::A;
  Frame frame;
};

std::vector<std::uint8_t> encode_frame_message(PeerId peer, const Frame& frame);
DecodedFrameMessage decode_frame_message(std::span<const std::uint8_t> bytes);

// ---------------------------------------------------------------------------
// JSON bodies.

/// {"peer":"A","mode":"primary","primary_ordinal":1,"num_cams":2,"strategy":"all-at-once",...}
/// primary_ordinal is absent in tiled mode.
nlohmann::json state_json(const Session& s, PeerId p);
/// [{"ordinal":1,"name":...,"selected":{"width":..,"height":..,"format":..,"fps":..},...}]
nlohmann::json cameras_json(const Session& s, PeerId p);
nlohmann::json peers_json(const Session& s);

class BindError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GatewayOptions {
  double stream_fps = 10.0;  // view stream downsampling
};

/// HTTP front end for a running session:
///   GET  /api/peers
///   GET  /api/{peer}/state
///   GET  /api/{peer}/cameras
///   GET  /api/{peer}/frame           one FrameMessage
///   GET  /api/{peer}/view            chunked stream of FrameMessages
///   POST /api/{peer}/advance/local
///   POST /api/{peer}/advance/remote
///   POST /api/{peer}/im              {"text": "..."}
class Gateway {
 public:
  Gateway(SessionRunner& runner, GatewayOptions options = {});
  ~Gateway();

  /// Binds and starts serving on a background thread. Port 0 picks a free
  /// port. Throws BindError.
  int start(const std::string& host, int port);
  void stop();
  int port() const noexcept { return port_; }

  /// Serves on the calling thread until stop().
  void serve_blocking(const std::string& host, int port);

 private:
  void install_routes();

  SessionRunner& runner_;
  GatewayOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::atomic<bool> stopping_{false};
  int port_ = 0;
};

}  // namespace multicam
