#pragma once

#include <coroutine>
#include <deque>
#include <optional>
#include <utility>
#include <vector>

#include "vfab/sim/kernel.hpp"

namespace vfab::sim {

/// Wakes every current waiter (in wait order) at the notifying timestep.
class Notifier {
 public:
  explicit Notifier(Kernel& kernel) : kernel_(kernel) {}

  struct Awaiter {
    Notifier& n;
    bool await_ready() const noexcept { return false; }
    void await_suspend(std::coroutine_handle<> h) {
      n.waiters_.emplace_back(h, n.kernel_.current_process());
    }
    void await_resume() const noexcept {}
  };
  Awaiter wait() { return Awaiter{*this}; }

  void notify() {
    auto waiters = std::move(waiters_);
    waiters_.clear();
    for (auto& [h, pid] : waiters) kernel_.schedule_resume(h, pid, SimTime{});
  }
  std::size_t waiting() const { return waiters_.size(); }

 private:
  Kernel& kernel_;
  std::vector<std::pair<std::coroutine_handle<>, ProcessId>> waiters_;
};

/// FIFO-fair lock. Ownership passes directly to the oldest waiter.
class Mutex {
 public:
  explicit Mutex(Kernel& kernel) : kernel_(kernel) {}

  struct Awaiter {
    Mutex& m;
    bool await_ready() noexcept {
      if (m.locked_) return false;
      m.locked_ = true;
      return true;
    }
    void await_suspend(std::coroutine_handle<> h) {
      m.waiters_.emplace_back(h, m.kernel_.current_process());
    }
    void await_resume() const noexcept {}
  };
  Awaiter lock() { return Awaiter{*this}; }

  void unlock() {
    if (waiters_.empty()) {
      locked_ = false;
      return;
    }
    auto [h, pid] = waiters_.front();
    waiters_.pop_front();
    kernel_.schedule_resume(h, pid, SimTime{});
  }
  bool locked() const { return locked_; }

 private:
  Kernel& kernel_;
  bool locked_ = false;
  std::deque<std::pair<std::coroutine_handle<>, ProcessId>> waiters_;
};

/// Unbounded single-consumer queue with a suspending get().
template <typename T>
class Fifo {
 public:
  explicit Fifo(Kernel& kernel) : ready_(kernel) {}

  void put(T item) {
    items_.push_back(std::move(item));
    ready_.notify();
  }
  Task<T> get() {
    while (items_.empty()) co_await ready_.wait();
    T item = std::move(items_.front());
    items_.pop_front();
    co_return item;
  }
  std::optional<T> try_get() {
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    return item;
  }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

 private:
  Notifier ready_;
  std::deque<T> items_;
};

}  // namespace vfab::sim
