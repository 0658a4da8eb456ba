#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

// Control protocols between MultiCam components.
//
// Ap2Ap: UTF-8 strings exchanged between the two peers' applications through
// the host chat program's application-to-application channel.
//
// Ap2Filt: local messages between an application and its virtual-camera
// filter. Each message type is identified by a registration name; the two
// parameters mirror the (wParam, lParam) pair of a window message.

namespace multicam::protocol {

class MalformedMessage : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class MalformedCommand : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UnknownRegistrationName : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr std::string_view kProtocolVersion = "1.1";
inline constexpr std::string_view kAppVersion = "0.1.0.8";
inline constexpr std::string_view kDefaultConnection = "multicam";

// ---------------------------------------------------------------------------
// Ap2Ap

struct Ap2ApMessage {
  enum class Kind { Ping, Pong, AskNumCams, ReplyNumCams, AskVersion, ReplyVersion, AdvanceCamera };

  Kind kind = Kind::Ping;
  int num_cams = 0;              // ReplyNumCams
  std::string protocol_version;  // ReplyVersion, "d.d"
  std::string app_version;       // ReplyVersion, "d.d.d.d"

  static Ap2ApMessage ping() { return {Kind::Ping}; }
  static Ap2ApMessage pong() { return {Kind::Pong}; }
  static Ap2ApMessage ask_num_cams() { return {Kind::AskNumCams}; }
  static Ap2ApMessage reply_num_cams(int n) { return {Kind::ReplyNumCams, n}; }
  static Ap2ApMessage ask_version() { return {Kind::AskVersion}; }
  static Ap2ApMessage reply_version(std::string protocol = std::string(kProtocolVersion),
                                    std::string app = std::string(kAppVersion)) {
    return {Kind::ReplyVersion, 0, std::move(protocol), std::move(app)};
  }
  static Ap2ApMessage advance_camera() { return {Kind::AdvanceCamera}; }

  friend bool operator==(const Ap2ApMessage&, const Ap2ApMessage&) = default;
};

std::string encode_ap2ap(const Ap2ApMessage& msg);
Ap2ApMessage decode_ap2ap(std::string_view s);

/// True for "d.d" (digits = 2) or "d.d.d.d" (digits = 4) with single digits.
bool is_version_pattern(std::string_view s, int digits);

// Host chat command wrapping: "ALTER APPLICATION <conn> WRITE <stream> <payload>".
struct HostCommand {
  std::string connection;
  std::string stream;
  std::string payload;
  friend bool operator==(const HostCommand&, const HostCommand&) = default;
};

std::string wrap_host_command(std::string_view connection, std::string_view stream,
                              std::string_view payload);
HostCommand unwrap_host_command(std::string_view command);

// ---------------------------------------------------------------------------
// Ap2Filt

using Endpoint = std::uint64_t;
inline constexpr Endpoint kBroadcast = 0xFFFF;

enum class Ap2FiltKind { Discover, Attach, Kick, Ping, Pong, AdvanceCamera, Reset };

struct Ap2FiltMessage {
  Ap2FiltKind kind = Ap2FiltKind::Ping;
  Endpoint endpoint = 0;  // Discover: filter window, Attach: application window
  std::uint64_t num_cams = 0;  // Discover only

  static Ap2FiltMessage discover(Endpoint filter, std::uint64_t cams) {
    return {Ap2FiltKind::Discover, filter, cams};
  }
  static Ap2FiltMessage attach(Endpoint app) { return {Ap2FiltKind::Attach, app, 0}; }
  static Ap2FiltMessage of(Ap2FiltKind k) { return {k, 0, 0}; }

  friend bool operator==(const Ap2FiltMessage&, const Ap2FiltMessage&) = default;
};

struct WireRecord {
  std::string registration_name;
  std::uint64_t param_a = 0;
  std::uint64_t param_b = 0;
  friend bool operator==(const WireRecord&, const WireRecord&) = default;
};

inline constexpr std::string_view kRegistrationSuffix = "4AD2E57A-AF70-42AE-9A64-BC88F995B9C8";

std::string registration_name(Ap2FiltKind kind);
std::string to_string(Ap2FiltKind kind);
WireRecord encode_ap2filt(const Ap2FiltMessage& msg);
Ap2FiltMessage decode_ap2filt(const WireRecord& rec);

// ---------------------------------------------------------------------------
// Actions produced by the application-side handlers.

struct SendAp2Ap {
  Ap2ApMessage msg;
  friend bool operator==(const SendAp2Ap&, const SendAp2Ap&) = default;
};
struct SendAp2Filt {
  Ap2FiltMessage msg;
  friend bool operator==(const SendAp2Filt&, const SendAp2Filt&) = default;
};
struct RecordRemote {
  Ap2ApMessage msg;
  friend bool operator==(const RecordRemote&, const RecordRemote&) = default;
};
struct AdvanceLocalCamera {
  friend bool operator==(const AdvanceLocalCamera&, const AdvanceLocalCamera&) = default;
};

using Action = std::variant<SendAp2Ap, SendAp2Filt, RecordRemote, AdvanceLocalCamera>;

struct AppContext {
  bool filter_attached = false;
  int num_cams = 0;
};

std::vector<Action> handle_ap2ap(const Ap2ApMessage& msg, const AppContext& ctx);

struct ImSettings {
  bool im_switch_enabled = true;
  bool keystroke_switch_enabled = true;
};

/// Any received instant message advances the local camera when enabled.
std::vector<Action> handle_im(const ImSettings& settings, std::string_view im_text);

// ---------------------------------------------------------------------------
// Discover / Attach / Kick handshake.

enum class Lifecycle { FilterCreated, AppStarted };

using HandshakeEvent = std::variant<Lifecycle, Ap2FiltMessage>;

/// Filter side: Unattached when `app` is empty.
struct FilterAttach {
  std::optional<Endpoint> app;
  friend bool operator==(const FilterAttach&, const FilterAttach&) = default;
};

/// Application side: Unbound when `filter` is empty.
struct AppBinding {
  std::optional<Endpoint> filter;
  friend bool operator==(const AppBinding&, const AppBinding&) = default;
};

struct Outgoing {
  Endpoint to = kBroadcast;
  Ap2FiltMessage msg;
  friend bool operator==(const Outgoing&, const Outgoing&) = default;
};

struct FilterStep {
  FilterAttach state;
  std::vector<Outgoing> out;
  bool advance = false;  // AdvanceCamera received
  bool reset = false;    // Reset received; caller reinitialises and re-announces
};

struct AppStep {
  AppBinding state;
  std::vector<Outgoing> out;
};

struct FilterIdentity {
  Endpoint self = 0;
  std::uint64_t num_cams = 0;
};

FilterStep filter_step(const FilterIdentity& me, const FilterAttach& state, const HandshakeEvent& ev);
AppStep app_step(Endpoint self, const AppBinding& state, const HandshakeEvent& ev);

}  // namespace multicam::protocol
