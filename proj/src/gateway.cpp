#include "multicam/gateway.hpp"

#include <chrono>
#include <cstring>

#include "httplib.h"

namespace multicam {

namespace {

void put_be(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int i = bytes - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_be(std::span<const std::uint8_t> b, std::size_t off, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v = (v << 8) | b[off + i];
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_frame_message(PeerId peer, const Frame& frame) {
  if (frame.width() > 0xFFFF || frame.height() > 0xFFFF)
    throw std::invalid_argument("frame too large for FrameMessage");
  std::vector<std::uint8_t> out;
  out.reserve(kFrameHeaderSize + frame.pixels().size());
  for (char c : {'M', 'C', 'A', 'M'}) out.push_back(static_cast<std::uint8_t>(c));
  out.push_back(kFrameMessageVersion);
  out.push_back(peer == PeerId::A ? 'A' : 'B');
  put_be(out, static_cast<std::uint64_t>(frame.width()), 2);
  put_be(out, static_cast<std::uint64_t>(frame.height()), 2);
  put_be(out, frame.seq & 0xFFFFFFFFu, 4);
  put_be(out, static_cast<std::uint64_t>(frame.timestamp_us), 8);
  out.insert(out.end(), frame.pixels().begin(), frame.pixels().end());
  return out;
}

DecodedFrameMessage decode_frame_message(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFrameHeaderSize) throw MalformedFrameMessage("short header");
  if (std::memcmp(bytes.data(), "MCAM", 4) != 0) throw MalformedFrameMessage("bad magic");
  if (bytes[4] != kFrameMessageVersion) throw MalformedFrameMessage("unsupported version");
  DecodedFrameMessage d;
  if (bytes[5] == 'A') {
    d.peer = PeerId::A;
  } else if (bytes[5] == 'B') {
    d.peer = PeerId::B;
  } else {
    throw MalformedFrameMessage("bad peer id");
  }
  const auto w = static_cast<int>(get_be(bytes, 6, 2));
  const auto h = static_cast<int>(get_be(bytes, 8, 2));
  if (w == 0 || h == 0) throw MalformedFrameMessage("empty frame");
  const std::size_t payload = static_cast<std::size_t>(w) * h * 3;
  if (bytes.size() != kFrameHeaderSize + payload) throw MalformedFrameMessage("payload size mismatch");
  d.frame = Frame(Resolution{w, h});
  d.frame.seq = get_be(bytes, 10, 4);
  d.frame.timestamp_us = static_cast<std::int64_t>(get_be(bytes, 14, 8));
  std::memcpy(d.frame.pixels().data(), bytes.data() + kFrameHeaderSize, payload);
  return d;
}

nlohmann::json state_json(const Session& s, PeerId p) {
  const ViewState v = s.state(p);
  nlohmann::json j = {
      {"peer", to_string(p)},
      {"mode", v.is_tiled() ? "tiled" : "primary"},
      {"num_cams", s.registry(p).size()},
      {"strategy", to_string(s.strategy(p))},
      {"attached", s.attached(p)},
      {"has_app", s.has_app(p)},
  };
  if (!v.is_tiled()) j["primary_ordinal"] = v.primary;
  if (auto n = s.remote_num_cams(p)) j["remote_num_cams"] = *n;
  return j;
}

nlohmann::json cameras_json(const Session& s, PeerId p) {
  auto arr = nlohmann::json::array();
  for (const auto& e : s.registry(p).entries()) {
    arr.push_back({
        {"ordinal", e.ordinal},
        {"name", e.spec.name},
        {"selected",
         {{"width", e.selected.resolution.width},
          {"height", e.selected.resolution.height},
          {"format", to_string(e.selected.format)},
          {"fps", e.selected.fps}}},
    });
  }
  return arr;
}

nlohmann::json peers_json(const Session& s) {
  auto arr = nlohmann::json::array();
  for (PeerId p : {PeerId::A, PeerId::B}) {
    arr.push_back({{"peer", to_string(p)},
                   {"username", s.config().peer(p).username},
                   {"num_cams", s.registry(p).size()},
                   {"has_app", s.has_app(p)}});
  }
  return arr;
}

Gateway::Gateway(SessionRunner& runner, GatewayOptions options)
    : runner_(runner), options_(options), server_(std::make_unique<httplib::Server>()) {
  // httplib's default also sets SO_REUSEPORT, which lets a second server share the port.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  install_routes();
}

Gateway::~Gateway() { stop(); }

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& msg) {
  send_json(res, status, {{"error", msg}});
}

}  // namespace

void Gateway::install_routes() {
  auto& srv = *server_;

  // Resolves the {peer} capture or answers 404.
  auto with_peer = [](auto handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
      auto p = parse_peer(req.matches[1].str());
      if (!p) {
        send_error(res, 404, "unknown peer '" + req.matches[1].str() + "'");
        return;
      }
      handler(*p, req, res);
    };
  };

  srv.Get("/api/peers", [this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, runner_.call([](Session& s) { return peers_json(s); }));
  });

  srv.Get(R"(/api/([^/]+)/state)", with_peer([this](PeerId p, const auto&, auto& res) {
            send_json(res, 200, runner_.call([p](Session& s) { return state_json(s, p); }));
          }));

  srv.Get(R"(/api/([^/]+)/cameras)", with_peer([this](PeerId p, const auto&, auto& res) {
            send_json(res, 200, runner_.call([p](Session& s) { return cameras_json(s, p); }));
          }));

  srv.Get(R"(/api/([^/]+)/frame)", with_peer([this](PeerId p, const auto&, auto& res) {
            auto snap = runner_.frames(p).latest();
            if (!snap.value) {
              send_error(res, 503, "no frame yet");
              return;
            }
            auto bytes = encode_frame_message(p, snap.value->frame);
            res.status = 200;
            res.set_content(std::string(bytes.begin(), bytes.end()), "application/octet-stream");
          }));

  srv.Get(R"(/api/([^/]+)/view)", with_peer([this](PeerId p, const auto&, auto& res) {
            struct Cursor {
              std::uint64_t seen = 0;
              std::chrono::steady_clock::time_point next{};
            };
            auto cur = std::make_shared<Cursor>();
            const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                std::chrono::duration<double>(1.0 / options_.stream_fps));
            res.set_chunked_content_provider(
                "application/octet-stream",
                [this, p, cur, period](std::size_t, httplib::DataSink& sink) {
                  if (stopping_) return false;
                  std::this_thread::sleep_until(cur->next);
                  auto snap = runner_.frames(p).wait_newer(cur->seen, std::chrono::milliseconds(200));
                  if (stopping_) return false;
                  if (!snap || !snap->value) return sink.is_writable();
                  cur->seen = snap->version;
                  cur->next = std::chrono::steady_clock::now() + period;
                  auto bytes = encode_frame_message(p, snap->value->frame);
                  return sink.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
                });
          }));

  auto advance = [this](AdvanceTarget target) {
    return [this, target](PeerId p, const httplib::Request&, httplib::Response& res) {
      const bool ok = runner_.call([p, target](Session& s) { return s.request_advance(p, target); });
      if (ok) {
        send_json(res, 202, {{"accepted", true}});
      } else {
        send_error(res, 409, "no control path for this advance");
      }
    };
  };
  srv.Post(R"(/api/([^/]+)/advance/local)", with_peer(advance(AdvanceTarget::Local)));
  srv.Post(R"(/api/([^/]+)/advance/remote)", with_peer(advance(AdvanceTarget::Remote)));

  srv.Post(R"(/api/([^/]+)/im)", with_peer([this](PeerId p, const httplib::Request& req, auto& res) {
             auto body = nlohmann::json::parse(req.body, nullptr, false);
             if (body.is_discarded() || !body.is_object() || !body.contains("text") ||
                 !body["text"].is_string()) {
               send_error(res, 400, "expected {\"text\": string}");
               return;
             }
             std::string text = body["text"];
             runner_.call([p, text = std::move(text)](Session& s) mutable { s.deliver_im(p, std::move(text)); });
             send_json(res, 202, {{"accepted", true}});
           }));
}

int Gateway::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
    if (bound < 0) throw BindError("cannot bind " + host);
  } else if (!server_->bind_to_port(host, port)) {
    throw BindError("cannot bind " + host + ":" + std::to_string(port));
  }
  port_ = bound;
  stopping_ = false;
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void Gateway::serve_blocking(const std::string& host, int port) {
  if (!server_->bind_to_port(host, port)) throw BindError("cannot bind " + host + ":" + std::to_string(port));
  port_ = port;
  server_->listen_after_bind();
}

void Gateway::stop() {
  stopping_ = true;
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace multicam
