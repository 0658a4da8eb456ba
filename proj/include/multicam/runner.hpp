#pragma once

#include <chrono>
#include <deque>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <thread>
#include <type_traits>

#include "multicam/mailbox.hpp"
#include "multicam/session.hpp"

namespace multicam {

/// Drives a Session against the wall clock on a private thread. Every access
/// to the session goes through call(), which runs on that thread after the
/// session has been stepped to the current time, so reads observe all earlier
/// commands. Composed frames fan out through per-peer latest-wins slots.
class SessionRunner {
 public:
  explicit SessionRunner(SessionConfig config,
                         std::chrono::microseconds tick = std::chrono::milliseconds(5));
  ~SessionRunner();

  SessionRunner(const SessionRunner&) = delete;
  SessionRunner& operator=(const SessionRunner&) = delete;

  template <class F>
  auto call(F&& f) -> std::invoke_result_t<F, Session&> {
    using R = std::invoke_result_t<F, Session&>;
    auto task = std::make_shared<std::packaged_task<R(Session&)>>(std::forward<F>(f));
    auto fut = task->get_future();
    {
      std::lock_guard lock(mu_);
      queue_.emplace_back([task](Session& s) { (*task)(s); });
    }
    cv_.notify_one();
    return fut.get();
  }

  LatestSlot<ComposedFrame>& frames(PeerId p) { return p == PeerId::A ? frames_a_ : frames_b_; }

 private:
  void loop(std::stop_token stop);
  void step_to_now();
  void publish();

  Session session_;
  std::chrono::microseconds tick_;
  std::chrono::steady_clock::time_point origin_;
  std::mutex mu_;
  std::condition_variable_any cv_;
  std::deque<std::function<void(Session&)>> queue_;
  LatestSlot<ComposedFrame> frames_a_;
  LatestSlot<ComposedFrame> frames_b_;
  std::uint64_t published_a_ = ~0ULL;
  std::uint64_t published_b_ = ~0ULL;
  std::jthread thread_;
};

}  // namespace multicam
