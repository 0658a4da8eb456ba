#include "multicam/runner.hpp"

namespace multicam {

SessionRunner::SessionRunner(SessionConfig config, std::chrono::microseconds tick)
    : session_(std::move(config)), tick_(tick), origin_(std::chrono::steady_clock::now()) {
  thread_ = std::jthread([this](std::stop_token st) { loop(st); });
}

SessionRunner::~SessionRunner() {
  thread_.request_stop();
  cv_.notify_all();
  if (thread_.joinable()) thread_.join();
  frames_a_.close();
  frames_b_.close();
}

void SessionRunner::step_to_now() {
  const auto elapsed = std::chrono::duration_cast<std::chrono::microseconds>(
                           std::chrono::steady_clock::now() - origin_)
                           .count();
  if (elapsed > session_.now_us()) session_.step(elapsed - session_.now_us());
}

void SessionRunner::publish() {
  for (PeerId p : {PeerId::A, PeerId::B}) {
    auto& last = p == PeerId::A ? published_a_ : published_b_;
    try {
      const auto& view = session_.current_view(p);
      if (view.frame.seq != last) {
        last = view.frame.seq;
        frames(p).publish(view);
      }
    } catch (const NoFrameYet&) {
    }
  }
}

void SessionRunner::loop(std::stop_token stop) {
  while (true) {
    std::deque<std::function<void(Session&)>> work;
    {
      std::unique_lock lock(mu_);
      cv_.wait_for(lock, stop, tick_, [&] { return !queue_.empty(); });
      work.swap(queue_);
    }
    step_to_now();
    for (auto& job : work) job(session_);
    publish();
    if (stop.stop_requested()) {
      std::lock_guard lock(mu_);
      if (queue_.empty()) break;
    }
  }
}

}  // namespace multicam
