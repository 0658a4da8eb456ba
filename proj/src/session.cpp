#include "multicam/session.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <sstream>

namespace multicam {

using protocol::Ap2ApMessage;
using protocol::Ap2FiltKind;
using protocol::Ap2FiltMessage;
using protocol::Endpoint;
using protocol::Outgoing;

std::string to_string(PeerId p) { return p == PeerId::A ? "A" : "B"; }

std::optional<PeerId> parse_peer(std::string_view s) {
  if (s == "A" || s == "a") return PeerId::A;
  if (s == "B" || s == "b") return PeerId::B;
  return std::nullopt;
}

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::MessageSent: return "MessageSent";
    case EventKind::MessageDelivered: return "MessageDelivered";
    case EventKind::StateChanged: return "StateChanged";
    case EventKind::FrameEmitted: return "FrameEmitted";
    case EventKind::Warning: return "Warning";
  }
  return "?";
}

std::string to_string(const SessionEvent& e) {
  std::ostringstream os;
  os << e.time_us << ' ' << to_string(e.kind) << ' ' << to_string(e.peer);
  switch (e.kind) {
    case EventKind::MessageSent:
    case EventKind::MessageDelivered: os << " #" << e.message_id; break;
    case EventKind::StateChanged:
      os << ' ' << to_string(e.old_state) << " -> " << to_string(e.new_state);
      break;
    case EventKind::FrameEmitted: os << " seq=" << e.seq << ' ' << to_string(e.new_state); break;
    case EventKind::Warning: break;
  }
  if (!e.detail.empty()) os << " | " << e.detail;
  return os.str();
}

SessionConfig SessionConfig::defaults() {
  auto cam = [](std::string name) {
    return CameraSpec{std::move(name), {{{640, 480}, PixelFormat::Rgb24, 30.0}}, 0.0, 0.0, false, 0.0};
  };
  SessionConfig c;
  c.a.username = "alice";
  c.a.cameras = {cam("alice-cam-1"), cam("alice-cam-2")};
  c.b.username = "bob";
  c.b.cameras = {cam("bob-cam-1"), cam("bob-cam-2"), cam("bob-cam-3")};
  return c;
}

struct Session::Peer {
  PeerId id = PeerId::A;
  PeerConfig cfg;
  Registry registry;
  std::unique_ptr<Pipeline> pipeline;
  Endpoint filter_ep = 0;
  Endpoint app_ep = 0;
  bool app_running = false;
  protocol::FilterAttach filter;
  protocol::AppBinding app;
  std::deque<std::pair<Endpoint, Outgoing>> bus;
  bool pumping = false;
  std::optional<int> remote_num_cams;
  std::optional<std::string> remote_version;
  std::uint64_t pongs = 0;
  std::optional<ComposedFrame> last_view;
};

Session::Session(SessionConfig config) : config_(std::move(config)) {
  if (config_.delay_a_to_b_ms < 0 || config_.delay_b_to_a_ms < 0)
    throw ConfigError("link delays must be non-negative");
  if (!(config_.output_fps > 0)) throw ConfigError("output fps must be positive");
  if (config_.target_height < 1) throw ConfigError("target height must be >= 1");

  a_ = std::make_unique<Peer>();
  b_ = std::make_unique<Peer>();
  a_->id = PeerId::A;
  b_->id = PeerId::B;
  a_->cfg = config_.a;
  b_->cfg = config_.b;
  a_->filter_ep = 0x1001;
  a_->app_ep = 0x1002;
  b_->filter_ep = 0x2001;
  b_->app_ep = 0x2002;

  for (Peer* p : {a_.get(), b_.get()}) {
    if (p->cfg.cameras.empty())
      throw ConfigError("peer " + to_string(p->id) + " has no cameras");
    if (p->cfg.username.empty() || p->cfg.username.find(' ') != std::string::npos)
      throw ConfigError("peer " + to_string(p->id) + " needs a space-free username");
    try {
      build_filter(*p);
    } catch (const NoUsableCameras& e) {
      throw ConfigError("peer " + to_string(p->id) + ": " + e.what());
    } catch (const PipelineError& e) {
      throw ConfigError("peer " + to_string(p->id) + ": " + e.what());
    }
  }

  // The chat program creates the filter; the application starts afterwards
  // and kicks off the Discover/Attach exchange.
  for (Peer* p : {a_.get(), b_.get()}) {
    on_filter_event(*p, protocol::Lifecycle::FilterCreated);
    pump_local(*p);
    if (p->cfg.has_app) {
      p->app_running = true;
      on_app_event(*p, protocol::Lifecycle::AppStarted);
      pump_local(*p);
    }
  }

  // Unsolicited ReplyNumCams once the Ap2Ap connection exists.
  if (a_->cfg.has_app && b_->cfg.has_app) {
    for (Peer* p : {a_.get(), b_.get()})
      send_ap2ap(p->id, Ap2ApMessage::reply_num_cams(p->app.filter ? p->registry.size() : 0));
  }
}

Session::~Session() = default;
Session::Session(Session&&) noexcept = default;
Session& Session::operator=(Session&&) noexcept = default;

Session create_session(SessionConfig config) { return Session(std::move(config)); }

Session::Peer& Session::peer(PeerId p) { return p == PeerId::A ? *a_ : *b_; }
const Session::Peer& Session::peer(PeerId p) const { return p == PeerId::A ? *a_ : *b_; }

void Session::build_filter(Peer& p) {
  p.registry = build_registry(p.cfg.cameras, config_.target_height, p.cfg.whitelist);

  PipelineConfig pc;
  pc.strategy = p.cfg.strategy;
  pc.canvas = canvas_for_height(config_.target_height);
  pc.output_fps = config_.output_fps;
  pc.stop_cost_ms = config_.stop_cost_ms;
  pc.start_cost_ms = config_.start_cost_ms;
  pc.tiled_enabled = p.cfg.tiled_enabled;
  pc.thumbnails_enabled = p.cfg.thumbnails_enabled;
  if (config_.randomize_phase) {
    std::mt19937_64 rng(config_.seed * 2 + (p.id == PeerId::A ? 0 : 1));
    for (const auto& e : p.registry.entries()) {
      std::uniform_int_distribution<std::int64_t> phase(0, frame_time_us(1, e.selected.fps) - 1);
      pc.phase_offsets_us.push_back(phase(rng));
    }
  }
  p.pipeline = std::make_unique<Pipeline>(p.registry, pc);
  p.pipeline->start(now_us_);
  p.filter = {};
}

void Session::record(SessionEvent e) { log_.push_back(std::move(e)); }

void Session::send_link(PeerId from, bool is_im, std::string text) {
  const double delay_ms = from == PeerId::A ? config_.delay_a_to_b_ms : config_.delay_b_to_a_ms;
  LinkMessage m;
  m.id = next_message_id_++;
  m.from = from;
  m.deliver_at_us = now_us_ + static_cast<std::int64_t>(std::llround(delay_ms * 1000.0));
  m.is_im = is_im;
  m.text = std::move(text);
  record({now_us_, EventKind::MessageSent, from, m.id, (is_im ? "im " : "host ") + m.text});
  in_flight_.push_back(std::move(m));
}

void Session::send_ap2ap(PeerId from, const Ap2ApMessage& msg) {
  const auto& to = peer(other(from));
  send_link(from, false,
            protocol::wrap_host_command(config_.connection, to.cfg.username + ":1",
                                        protocol::encode_ap2ap(msg)));
}

void Session::deliver_link(const LinkMessage& m) {
  Peer& to = peer(other(m.from));
  record({now_us_, EventKind::MessageDelivered, to.id, m.id, (m.is_im ? "im " : "host ") + m.text});

  if (m.is_im) {
    if (!to.app_running) {
      record({now_us_, EventKind::Warning, to.id, 0, "instant message shown; no MultiCam application"});
      return;
    }
    const auto actions = protocol::handle_im(to.cfg.im, m.text);
    if (actions.empty()) record({now_us_, EventKind::Warning, to.id, 0, "IM switching disabled; no advance"});
    run_app_actions(to, actions);
    return;
  }

  if (!to.app_running) return;  // no application to receive Ap2Ap traffic
  try {
    const auto cmd = protocol::unwrap_host_command(m.text);
    const auto msg = protocol::decode_ap2ap(cmd.payload);
    const protocol::AppContext ctx{to.app.filter.has_value(), to.registry.size()};
    run_app_actions(to, protocol::handle_ap2ap(msg, ctx));
  } catch (const std::invalid_argument& e) {
    record({now_us_, EventKind::Warning, to.id, 0, std::string("dropped malformed Ap2Ap: ") + e.what()});
  }
}

void Session::run_app_actions(Peer& p, const std::vector<protocol::Action>& actions) {
  for (const auto& action : actions) {
    if (const auto* s = std::get_if<protocol::SendAp2Ap>(&action)) {
      if (peer(other(p.id)).cfg.has_app) send_ap2ap(p.id, s->msg);
    } else if (const auto* f = std::get_if<protocol::SendAp2Filt>(&action)) {
      if (p.app.filter) post_local(p, p.app_ep, {*p.app.filter, f->msg});
    } else if (const auto* r = std::get_if<protocol::RecordRemote>(&action)) {
      using K = Ap2ApMessage::Kind;
      if (r->msg.kind == K::ReplyNumCams) p.remote_num_cams = r->msg.num_cams;
      if (r->msg.kind == K::ReplyVersion) p.remote_version = r->msg.protocol_version + " " + r->msg.app_version;
      if (r->msg.kind == K::Pong) ++p.pongs;
    } else if (std::holds_alternative<protocol::AdvanceLocalCamera>(action)) {
      if (p.app.filter)
        post_local(p, p.app_ep, {*p.app.filter, Ap2FiltMessage::of(Ap2FiltKind::AdvanceCamera)});
      else
        record({now_us_, EventKind::Warning, p.id, 0, "application not attached to filter"});
    }
  }
  pump_local(p);
}

void Session::post_local(Peer& p, Endpoint from, const Outgoing& out) {
  p.bus.emplace_back(from, out);
}

void Session::pump_local(Peer& p) {
  if (p.pumping) return;
  p.pumping = true;
  while (!p.bus.empty()) {
    auto [from, out] = p.bus.front();
    p.bus.pop_front();
    const auto wire = protocol::encode_ap2filt(out.msg);
    const std::uint64_t id = next_message_id_++;
    std::ostringstream detail;
    detail << "ap2filt " << protocol::to_string(out.msg.kind) << ' ' << wire.registration_name << ' '
           << wire.param_a << ' ' << wire.param_b;
    record({now_us_, EventKind::MessageSent, p.id, id, detail.str()});

    std::vector<Endpoint> recipients;
    if (out.to == protocol::kBroadcast) {
      if (from != p.filter_ep && p.pipeline) recipients.push_back(p.filter_ep);
      if (from != p.app_ep && p.app_running) recipients.push_back(p.app_ep);
    } else if ((out.to == p.filter_ep && p.pipeline) || (out.to == p.app_ep && p.app_running)) {
      recipients.push_back(out.to);
    }
    for (Endpoint r : recipients) {
      record({now_us_, EventKind::MessageDelivered, p.id, id, detail.str()});
      const auto msg = protocol::decode_ap2filt(wire);
      if (r == p.filter_ep)
        on_filter_event(p, msg);
      else
        on_app_event(p, msg);
    }
  }
  p.pumping = false;
}

void Session::on_filter_event(Peer& p, const protocol::HandshakeEvent& ev) {
  const protocol::FilterIdentity me{p.filter_ep, static_cast<std::uint64_t>(p.registry.size())};
  auto step = protocol::filter_step(me, p.filter, ev);
  p.filter = step.state;
  for (const auto& out : step.out) post_local(p, p.filter_ep, out);
  if (step.advance) advance_filter(p);
  if (step.reset) {
    collect_frames(p, now_us_);
    build_filter(p);
    record({now_us_, EventKind::StateChanged, p.id, 0, "filter reset", p.pipeline->state(),
            p.pipeline->state()});
    on_filter_event(p, protocol::Lifecycle::FilterCreated);
  }
}

void Session::on_app_event(Peer& p, const protocol::HandshakeEvent& ev) {
  auto step = protocol::app_step(p.app_ep, p.app, ev);
  p.app = step.state;
  for (const auto& out : step.out) post_local(p, p.app_ep, out);
  if (const auto* msg = std::get_if<Ap2FiltMessage>(&ev); msg && msg->kind == Ap2FiltKind::Pong) ++p.pongs;
}

void Session::advance_filter(Peer& p) {
  const ViewState before = p.pipeline->state();
  const auto outcome = p.pipeline->apply_switch(now_us_);
  record({now_us_, EventKind::StateChanged, p.id, 0,
          "effective_at_us=" + std::to_string(outcome.effective_at_us), before, outcome.new_state});
}

void Session::collect_frames(Peer& p, std::int64_t t) {
  auto frames = p.pipeline->run_until(t);
  for (auto& f : frames) {
    const Rgb marker = f.frame.pixel(0, 0);
    SessionEvent e{f.emitted_at_us, EventKind::FrameEmitted, p.id, 0,
                   "marker=" + std::to_string(marker.r) + "," + std::to_string(marker.g)};
    e.new_state = f.state;
    e.old_state = f.state;
    e.seq = f.frame.seq;
    record(std::move(e));
  }
  if (!frames.empty()) p.last_view = std::move(frames.back());
}

std::vector<SessionEvent> Session::step(std::int64_t dt_us) {
  if (dt_us < 0) throw std::invalid_argument("step: dt must be non-negative");
  const std::int64_t target = now_us_ + dt_us;
  for (;;) {
    std::int64_t next = std::min(a_->pipeline->next_event_us(), b_->pipeline->next_event_us());
    for (const auto& m : in_flight_) next = std::min(next, m.deliver_at_us);
    if (next > target) break;
    now_us_ = std::max(now_us_, next);

    // FIFO per direction: ids increase with send time and delays are fixed.
    std::vector<LinkMessage> due;
    auto split = std::stable_partition(in_flight_.begin(), in_flight_.end(),
                                       [&](const LinkMessage& m) { return m.deliver_at_us > now_us_; });
    due.assign(std::make_move_iterator(split), std::make_move_iterator(in_flight_.end()));
    in_flight_.erase(split, in_flight_.end());
    std::sort(due.begin(), due.end(), [](const auto& x, const auto& y) { return x.id < y.id; });
    for (const auto& m : due) deliver_link(m);

    collect_frames(*a_, now_us_);
    collect_frames(*b_, now_us_);
  }
  now_us_ = target;
  collect_frames(*a_, now_us_);
  collect_frames(*b_, now_us_);

  std::vector<SessionEvent> out(log_.begin() + static_cast<std::ptrdiff_t>(unreported_), log_.end());
  unreported_ = log_.size();
  return out;
}

bool Session::can_advance(PeerId actor, AdvanceTarget target) const {
  const Peer& p = peer(actor);
  if (!p.app_running || !p.app.filter) return false;
  if (target == AdvanceTarget::Local) return true;
  return peer(other(actor)).app_running;
}

bool Session::request_advance(PeerId actor, AdvanceTarget target, InputMethod method) {
  Peer& p = peer(actor);
  if (method == InputMethod::Keystroke && !p.cfg.im.keystroke_switch_enabled) {
    record({now_us_, EventKind::Warning, actor, 0, "keystroke switching disabled"});
    return false;
  }
  if (!can_advance(actor, target)) {
    record({now_us_, EventKind::Warning, actor, 0,
            target == AdvanceTarget::Local ? "no application attached to the local filter"
                                           : "remote peer has no MultiCam application; cannot advance"});
    return false;
  }
  if (target == AdvanceTarget::Local) {
    post_local(p, p.app_ep, {*p.app.filter, Ap2FiltMessage::of(Ap2FiltKind::AdvanceCamera)});
    pump_local(p);
  } else {
    send_ap2ap(actor, Ap2ApMessage::advance_camera());
  }
  return true;
}

void Session::deliver_im(PeerId from, std::string text) { send_link(from, true, std::move(text)); }

void Session::reset_filter(PeerId id) {
  Peer& p = peer(id);
  if (p.app.filter) {
    post_local(p, p.app_ep, {*p.app.filter, Ap2FiltMessage::of(Ap2FiltKind::Reset)});
  } else {
    on_filter_event(p, Ap2FiltMessage::of(Ap2FiltKind::Reset));
  }
  pump_local(p);
}

const ComposedFrame& Session::current_view(PeerId id) const {
  const auto& v = peer(id).last_view;
  if (!v) throw NoFrameYet("peer " + to_string(id) + " has not emitted a frame yet");
  return *v;
}

Frame Session::local_view_thumbnail(PeerId id, Resolution size) const {
  return scale_nearest(current_view(id).frame, size);
}

ViewState Session::state(PeerId id) const { return peer(id).pipeline->state(); }
const Registry& Session::registry(PeerId id) const { return peer(id).registry; }
const Pipeline& Session::pipeline(PeerId id) const { return *peer(id).pipeline; }
SwitchStrategy Session::strategy(PeerId id) const { return peer(id).cfg.strategy; }
bool Session::attached(PeerId id) const {
  const Peer& p = peer(id);
  return p.filter.app.has_value() && p.app.filter.has_value();
}
bool Session::has_app(PeerId id) const { return peer(id).cfg.has_app; }
std::optional<int> Session::remote_num_cams(PeerId id) const { return peer(id).remote_num_cams; }
std::optional<std::string> Session::remote_version(PeerId id) const { return peer(id).remote_version; }

}  // namespace multicam
