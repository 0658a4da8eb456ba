#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "multicam/protocol.hpp"
#include "multicam/sources.hpp"
#include "multicam/switch_engine.hpp"

namespace multicam {

enum class PeerId { A, B };

std::string to_string(PeerId p);
std::optional<PeerId> parse_peer(std::string_view s);
inline PeerId other(PeerId p) { return p == PeerId::A ? PeerId::B : PeerId::A; }

enum class ClockMode { Virtual, Wall };

struct PeerConfig {
  std::string username;
  bool has_app = true;
  std::vector<CameraSpec> cameras;
  std::vector<std::string> whitelist;
  SwitchStrategy strategy = SwitchStrategy::AllAtOnce;
  bool tiled_enabled = true;
  bool thumbnails_enabled = true;
  protocol::ImSettings im;
};

struct SessionConfig {
  PeerConfig a;
  PeerConfig b;
  double delay_a_to_b_ms = 25.0;
  double delay_b_to_a_ms = 25.0;
  int target_height = kDefaultTargetHeight;
  double output_fps = 30.0;
  double stop_cost_ms = 25.0;
  double start_cost_ms = 25.0;
  ClockMode clock = ClockMode::Virtual;
  std::uint64_t seed = 1;
  bool randomize_phase = false;  // seed-derived capture phase per camera
  std::string connection = std::string(protocol::kDefaultConnection);

  /// Two 640x480@30 cameras on A ("alice"), three on B ("bob"), 25 ms each way.
  static SessionConfig defaults();
  const PeerConfig& peer(PeerId p) const { return p == PeerId::A ? a : b; }
};

enum class EventKind { MessageSent, MessageDelivered, StateChanged, FrameEmitted, Warning };

std::string to_string(EventKind k);

struct SessionEvent {
  std::int64_t time_us = 0;
  EventKind kind = EventKind::Warning;
  PeerId peer = PeerId::A;
  std::uint64_t message_id = 0;  // Sent/Delivered pairs share an id
  std::string detail;
  ViewState old_state;
  ViewState new_state;
  std::uint64_t seq = 0;  // FrameEmitted

  friend bool operator==(const SessionEvent&, const SessionEvent&) = default;
};

/// One canonical text line per event; used for logs and determinism checks.
std::string to_string(const SessionEvent& e);

enum class AdvanceTarget { Local, Remote };
enum class InputMethod { Button, Keystroke };

class NoFrameYet : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two chat peers in one process. Each peer has a virtual-camera filter
/// (the pipeline), optionally a MultiCam application, and a host-chat stub
/// that forwards Ap2Ap commands and instant messages over a delayed FIFO link.
///
/// Not thread-safe; SessionRunner serialises access for wall-clock use.
class Session {
 public:
  explicit Session(SessionConfig config);
  ~Session();
  Session(Session&&) noexcept;
  Session& operator=(Session&&) noexcept;

  /// Advances the clock by `dt_us` and returns the events produced since the
  /// previous step, in time order.
  std::vector<SessionEvent> step(std::int64_t dt_us);

  /// Returns false (and logs a warning) when there is no control path.
  bool request_advance(PeerId actor, AdvanceTarget target, InputMethod method = InputMethod::Button);
  bool can_advance(PeerId actor, AdvanceTarget target) const;

  /// Sends an instant message from `from` to the other peer.
  void deliver_im(PeerId from, std::string text);

  /// Reinitialises a peer's filter as an Ap2Filt Reset would.
  void reset_filter(PeerId peer);

  const ComposedFrame& current_view(PeerId peer) const;
  Frame local_view_thumbnail(PeerId peer, Resolution size) const;

  ViewState state(PeerId peer) const;
  const Registry& registry(PeerId peer) const;
  const Pipeline& pipeline(PeerId peer) const;
  SwitchStrategy strategy(PeerId peer) const;
  bool attached(PeerId peer) const;  // filter Attached and application Bound
  bool has_app(PeerId peer) const;
  std::optional<int> remote_num_cams(PeerId peer) const;  // as learnt over Ap2Ap
  std::optional<std::string> remote_version(PeerId peer) const;

  std::int64_t now_us() const noexcept { return now_us_; }
  const std::vector<SessionEvent>& log() const noexcept { return log_; }
  const SessionConfig& config() const noexcept { return config_; }

 private:
  struct Peer;
  struct LinkMessage {
    std::uint64_t id = 0;
    PeerId from = PeerId::A;
    std::int64_t deliver_at_us = 0;
    bool is_im = false;
    std::string text;
  };

  Peer& peer(PeerId p);
  const Peer& peer(PeerId p) const;
  void build_filter(Peer& p);
  void record(SessionEvent e);
  void send_link(PeerId from, bool is_im, std::string text);
  void send_ap2ap(PeerId from, const protocol::Ap2ApMessage& msg);
  void deliver_link(const LinkMessage& m);
  void post_local(Peer& p, protocol::Endpoint from, const protocol::Outgoing& out);
  void pump_local(Peer& p);
  void on_filter_event(Peer& p, const protocol::HandshakeEvent& ev);
  void on_app_event(Peer& p, const protocol::HandshakeEvent& ev);
  void run_app_actions(Peer& p, const std::vector<protocol::Action>& actions);
  void advance_filter(Peer& p);
  void collect_frames(Peer& p, std::int64_t t);

  SessionConfig config_;
  std::unique_ptr<Peer> a_;
  std::unique_ptr<Peer> b_;
  std::vector<LinkMessage> in_flight_;
  std::uint64_t next_message_id_ = 1;
  std::int64_t now_us_ = 0;
  std::vector<SessionEvent> log_;
  std::size_t unreported_ = 0;  // index into log_ of the first event not yet returned by step()
};

/// Builds a session with both pipelines running and handshakes complete.
/// Throws ConfigError on invalid configuration.
Session create_session(SessionConfig config);

}  // namespace multicam
