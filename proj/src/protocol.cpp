#include "multicam/protocol.hpp"

#include <array>
#include <charconv>
#include <limits>

namespace multicam::protocol {

namespace {

constexpr std::string_view kPing = "AP2AP_PING";
constexpr std::string_view kPong = "AP2AP_PONG";
constexpr std::string_view kAskNumCams = "AP2AP_ASK_NUMCAMS";
constexpr std::string_view kReplyNumCams = "AP2AP_REPLY_NUMCAMS";
constexpr std::string_view kAskVersion = "AP2AP_ASK_VERSION";
constexpr std::string_view kReplyVersion = "AP2AP_REPLY_VERSION";
constexpr std::string_view kAdvanceCamera = "AP2AP_ADVANCE_CAMERA";

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::vector<std::string_view> split_spaces(std::string_view s) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(' ', start);
    parts.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

int parse_count(std::string_view digits, std::string_view whole) {
  const bool canonical = !digits.empty() && is_digit(digits.front()) &&
                         (digits.size() == 1 || digits.front() != '0');
  int n = 0;
  if (canonical) {
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (ec == std::errc() && ptr == digits.data() + digits.size()) return n;
  }
  throw MalformedMessage("bad camera count in '" + std::string(whole) + "'");
}

}  // namespace

bool is_version_pattern(std::string_view s, int digits) {
  if (s.size() != static_cast<std::size_t>(2 * digits - 1)) return false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i % 2 == 0 ? !is_digit(s[i]) : s[i] != '.') return false;
  }
  return true;
}

std::string encode_ap2ap(const Ap2ApMessage& msg) {
  using K = Ap2ApMessage::Kind;
  switch (msg.kind) {
    case K::Ping: return std::string(kPing);
    case K::Pong: return std::string(kPong);
    case K::AskNumCams: return std::string(kAskNumCams);
    case K::ReplyNumCams:
      if (msg.num_cams < 0) throw MalformedMessage("ReplyNumCams count must be non-negative");
      return std::string(kReplyNumCams) + " " + std::to_string(msg.num_cams);
    case K::AskVersion: return std::string(kAskVersion);
    case K::ReplyVersion:
      if (!is_version_pattern(msg.protocol_version, 2) || !is_version_pattern(msg.app_version, 4))
        throw MalformedMessage("ReplyVersion needs d.d and d.d.d.d version strings");
      return std::string(kReplyVersion) + " " + msg.protocol_version + " " + msg.app_version;
    case K::AdvanceCamera: return std::string(kAdvanceCamera);
  }
  throw MalformedMessage("unknown Ap2Ap kind");
}

Ap2ApMessage decode_ap2ap(std::string_view s) {
  if (s == kPing) return Ap2ApMessage::ping();
  if (s == kPong) return Ap2ApMessage::pong();
  if (s == kAskNumCams) return Ap2ApMessage::ask_num_cams();
  if (s == kAskVersion) return Ap2ApMessage::ask_version();
  if (s == kAdvanceCamera) return Ap2ApMessage::advance_camera();

  const auto parts = split_spaces(s);
  if (parts.size() == 2 && parts[0] == kReplyNumCams)
    return Ap2ApMessage::reply_num_cams(parse_count(parts[1], s));
  if (parts.size() == 3 && parts[0] == kReplyVersion) {
    if (!is_version_pattern(parts[1], 2) || !is_version_pattern(parts[2], 4))
      throw MalformedMessage("bad version pattern in '" + std::string(s) + "'");
    return Ap2ApMessage::reply_version(std::string(parts[1]), std::string(parts[2]));
  }
  throw MalformedMessage("unrecognised Ap2Ap message '" + std::string(s) + "'");
}

std::string wrap_host_command(std::string_view connection, std::string_view stream,
                              std::string_view payload) {
  if (connection.empty() || stream.empty() || connection.find(' ') != std::string_view::npos ||
      stream.find(' ') != std::string_view::npos)
    throw MalformedCommand("connection and stream names must be non-empty and space-free");
  std::string out = "ALTER APPLICATION ";
  out.append(connection).append(" WRITE ").append(stream).append(" ").append(payload);
  return out;
}

HostCommand unwrap_host_command(std::string_view command) {
  std::array<std::string_view, 5> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const auto pos = command.find(' ', start);
    if (pos == std::string_view::npos)
      throw MalformedCommand("host command too short: '" + std::string(command) + "'");
    fields[i] = command.substr(start, pos - start);
    start = pos + 1;
  }
  if (fields[0] != "ALTER" || fields[1] != "APPLICATION" || fields[3] != "WRITE" ||
      fields[2].empty() || fields[4].empty())
    throw MalformedCommand("not an ALTER APPLICATION ... WRITE command: '" + std::string(command) + "'");
  return {std::string(fields[2]), std::string(fields[4]), std::string(command.substr(start))};
}

std::string to_string(Ap2FiltKind kind) {
  switch (kind) {
    case Ap2FiltKind::Discover: return "Discover";
    case Ap2FiltKind::Attach: return "Attach";
    case Ap2FiltKind::Kick: return "Kick";
    case Ap2FiltKind::Ping: return "Ping";
    case Ap2FiltKind::Pong: return "Pong";
    case Ap2FiltKind::AdvanceCamera: return "AdvanceCamera";
    case Ap2FiltKind::Reset: return "Reset";
  }
  return "?";
}

std::string registration_name(Ap2FiltKind kind) {
  // AdvanceCamera registers under the shorter "Advance" stem.
  const std::string stem = kind == Ap2FiltKind::AdvanceCamera ? "Advance" : to_string(kind);
  return "Multicam" + stem + std::string(kRegistrationSuffix);
}

WireRecord encode_ap2filt(const Ap2FiltMessage& msg) {
  switch (msg.kind) {
    case Ap2FiltKind::Discover: return {registration_name(msg.kind), msg.endpoint, msg.num_cams};
    case Ap2FiltKind::Attach: return {registration_name(msg.kind), msg.endpoint, 0};
    default: return {registration_name(msg.kind), 0, 0};
  }
}

Ap2FiltMessage decode_ap2filt(const WireRecord& rec) {
  constexpr std::array kinds{Ap2FiltKind::Discover, Ap2FiltKind::Attach, Ap2FiltKind::Kick,
                             Ap2FiltKind::Ping,     Ap2FiltKind::Pong,   Ap2FiltKind::AdvanceCamera,
                             Ap2FiltKind::Reset};
  for (auto k : kinds) {
    if (rec.registration_name != registration_name(k)) continue;
    switch (k) {
      case Ap2FiltKind::Discover: return Ap2FiltMessage::discover(rec.param_a, rec.param_b);
      case Ap2FiltKind::Attach: return Ap2FiltMessage::attach(rec.param_a);
      default: return Ap2FiltMessage::of(k);
    }
  }
  throw UnknownRegistrationName("unknown Ap2Filt registration name '" + rec.registration_name + "'");
}

std::vector<Action> handle_ap2ap(const Ap2ApMessage& msg, const AppContext& ctx) {
  using K = Ap2ApMessage::Kind;
  switch (msg.kind) {
    case K::Ping: return {SendAp2Ap{Ap2ApMessage::pong()}};
    case K::AskNumCams:
      return {SendAp2Ap{Ap2ApMessage::reply_num_cams(ctx.filter_attached ? ctx.num_cams : 0)}};
    case K::AskVersion: return {SendAp2Ap{Ap2ApMessage::reply_version()}};
    case K::AdvanceCamera:
      if (!ctx.filter_attached) return {};
      return {SendAp2Filt{Ap2FiltMessage::of(Ap2FiltKind::AdvanceCamera)}};
    case K::Pong:
    case K::ReplyNumCams:
    case K::ReplyVersion: return {RecordRemote{msg}};
  }
  return {};
}

std::vector<Action> handle_im(const ImSettings& settings, std::string_view) {
  if (!settings.im_switch_enabled) return {};
  return {AdvanceLocalCamera{}};
}

FilterStep filter_step(const FilterIdentity& me, const FilterAttach& state, const HandshakeEvent& ev) {
  FilterStep step{state, {}};
  const auto announce = Outgoing{kBroadcast, Ap2FiltMessage::discover(me.self, me.num_cams)};
  if (const auto* life = std::get_if<Lifecycle>(&ev)) {
    if (*life == Lifecycle::FilterCreated) step.out.push_back(announce);
    return step;
  }
  const auto& msg = std::get<Ap2FiltMessage>(ev);
  switch (msg.kind) {
    case Ap2FiltKind::Kick: step.out.push_back(announce); break;
    case Ap2FiltKind::Attach: step.state.app = msg.endpoint; break;
    case Ap2FiltKind::Ping:
      if (state.app) step.out.push_back({*state.app, Ap2FiltMessage::of(Ap2FiltKind::Pong)});
      break;
    case Ap2FiltKind::AdvanceCamera: step.advance = true; break;
    case Ap2FiltKind::Reset:
      step.state.app.reset();
      step.reset = true;
      break;
    default: break;
  }
  return step;
}

AppStep app_step(Endpoint self, const AppBinding& state, const HandshakeEvent& ev) {
  AppStep step{state, {}};
  if (const auto* life = std::get_if<Lifecycle>(&ev)) {
    if (*life == Lifecycle::AppStarted)
      step.out.push_back({kBroadcast, Ap2FiltMessage::of(Ap2FiltKind::Kick)});
    return step;
  }
  const auto& msg = std::get<Ap2FiltMessage>(ev);
  if (msg.kind == Ap2FiltKind::Discover) {
    step.state.filter = msg.endpoint;
    step.out.push_back({msg.endpoint, Ap2FiltMessage::attach(self)});
  }
  return step;
}

}  // namespace multicam::protocol
