#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>

namespace multicam {

/// Single-slot latest-wins hand-off. Writers never block on readers: a new
/// value replaces whatever is in the slot. Readers remember the last version
/// they saw and can wait for a newer one.
template <class T>
class LatestSlot {
 public:
  struct Snapshot {
    std::shared_ptr<const T> value;
    std::uint64_t version = 0;
  };

  void publish(T value) {
    auto p = std::make_shared<const T>(std::move(value));
    {
      std::lock_guard lock(mu_);
      if (value_ && !consumed_) ++overwritten_;
      value_ = std::move(p);
      consumed_ = false;
      ++version_;
    }
    cv_.notify_all();
  }

  Snapshot latest() const {
    std::lock_guard lock(mu_);
    return {value_, version_};
  }

  /// Waits until the version exceeds `seen` or the timeout elapses.
  template <class Rep, class Period>
  std::optional<Snapshot> wait_newer(std::uint64_t seen, std::chrono::duration<Rep, Period> timeout) {
    std::unique_lock lock(mu_);
    if (!cv_.wait_for(lock, timeout, [&] { return version_ > seen || closed_; })) return std::nullopt;
    if (version_ <= seen) return std::nullopt;
    consumed_ = true;
    return Snapshot{value_, version_};
  }

  void close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }

  std::uint64_t overwritten() const {
    std::lock_guard lock(mu_);
    return overwritten_;
  }

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::shared_ptr<const T> value_;
  std::uint64_t version_ = 0;
  std::uint64_t overwritten_ = 0;
  bool consumed_ = true;
  bool closed_ = false;
};

}  // namespace multicam
