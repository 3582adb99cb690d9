#pragma once

#include <coroutine>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vfab/sim/task.hpp"
#include "vfab/sim/time.hpp"

namespace vfab::sim {

class Kernel;

/// Raised when a caller breaks an operation's precondition (e.g. driving a
/// value wider than the signal).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

using EventId = std::uint64_t;
using ProcessId = std::uint32_t;
inline constexpr ProcessId kNoProcess = 0;

enum class Edge { kRising, kFalling, kAny };

/// Two-state wire of 1..64 bits. Updates go through the kernel queue so that
/// every process woken by a clock edge observes pre-edge values.
class Signal {
 public:
  Signal(Kernel& kernel, std::string name, unsigned width, std::uint64_t init);
  Signal(const Signal&) = delete;
  Signal& operator=(const Signal&) = delete;

  const std::string& name() const { return name_; }
  unsigned width() const { return width_; }
  std::uint64_t read() const { return value_; }
  bool high() const { return value_ != 0; }
  SimTime last_change() const { return last_change_; }
  /// Number of actual value changes so far.
  std::uint64_t change_count() const { return changes_; }
  std::uint64_t mask() const {
    return width_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width_) - 1;
  }

  /// Schedules `value` to appear after `delay`; last writer in a timestep wins.
  void drive(std::uint64_t value, SimTime delay = {});

  struct EdgeAwaiter {
    Signal& signal;
    Edge edge;
    bool await_ready() const noexcept { return false; }
    void await_suspend(std::coroutine_handle<> h);
    void await_resume() const noexcept {}
  };
  EdgeAwaiter edge(Edge e) { return EdgeAwaiter{*this, e}; }
  EdgeAwaiter posedge() { return edge(Edge::kRising); }
  EdgeAwaiter negedge() { return edge(Edge::kFalling); }
  EdgeAwaiter change() { return edge(Edge::kAny); }

 private:
  friend class Kernel;
  friend class Clock;

  struct Waiter {
    Edge edge;
    std::coroutine_handle<> handle;
    ProcessId pid;
  };

  void apply(std::uint64_t value);

  Kernel& kernel_;
  std::string name_;
  unsigned width_;
  std::uint64_t value_;
  SimTime last_change_{};
  std::uint64_t changes_ = 0;
  std::vector<Waiter> waiters_;
};

/// Free-running 50% duty clock starting low; rising edges at period/2 + k*period.
class Clock {
 public:
  Clock(Kernel& kernel, Signal& clk, SimTime period);
  SimTime period() const { return period_; }

 private:
  void toggle();

  Kernel& kernel_;
  Signal& clk_;
  SimTime period_;
};

/// Deterministic discrete-event kernel. Events are ordered by
/// (fire_time, seq_no); seq_no increases strictly with insertion.
class Kernel {
 public:
  using Action = std::function<void()>;

  Kernel();
  ~Kernel();
  Kernel(const Kernel&) = delete;
  Kernel& operator=(const Kernel&) = delete;

  SimTime now() const { return now_; }

  EventId schedule(Action action, SimTime delay, std::string_view label = "kernel");

  /// Executes every event with fire_time <= limit. Returns the time of the
  /// last executed event (or the current time when nothing ran). Rethrows the
  /// first exception that escaped a process.
  SimTime run_until(SimTime limit);

  /// Halts run_until after the currently executing action.
  void request_stop() { stop_requested_ = true; }
  bool stop_requested() const { return stop_requested_; }
  bool idle() const { return queue_.empty(); }

  /// Starts `body` as a kernel-managed process in the current timestep.
  /// Daemon processes (monitors, clocks, DUT models) never block test end and
  /// are left out of hang diagnostics.
  ProcessId spawn(Task<> body, std::string path, bool daemon = false);
  bool finished(ProcessId pid) const;
  ProcessId current_process() const { return current_; }
  const std::string& process_path(ProcessId pid) const;
  std::vector<std::string> suspended_processes(bool include_daemons = false) const;

  struct DelayAwaiter {
    Kernel& kernel;
    SimTime delay;
    bool await_ready() const noexcept { return false; }
    void await_suspend(std::coroutine_handle<> h) {
      kernel.schedule_resume(h, kernel.current_process(), delay);
    }
    void await_resume() const noexcept {}
  };
  DelayAwaiter delay(SimTime d) { return DelayAwaiter{*this, d}; }

  struct JoinAwaiter {
    Kernel& kernel;
    ProcessId pid;
    bool await_ready() const { return kernel.finished(pid); }
    void await_suspend(std::coroutine_handle<> h);
    void await_resume() const noexcept {}
  };
  JoinAwaiter join(ProcessId pid) { return JoinAwaiter{*this, pid}; }

  Signal& make_signal(std::string path, unsigned width, std::uint64_t init = 0);
  Signal* find_signal(std::string_view path);
  /// Throws std::out_of_range when `path` is not registered.
  Signal& signal(std::string_view path);

  void schedule_resume(std::coroutine_handle<> h, ProcessId pid, SimTime delay);

  void enable_event_log(bool on) { log_enabled_ = on; }
  const std::vector<std::string>& event_log() const { return log_; }
  /// FNV-1a over every executed `<time>:<seq_no>:<path>` line.
  std::uint64_t trace_hash() const { return hash_; }
  std::uint64_t executed_events() const { return executed_; }

 private:
  struct Event {
    SimTime time;
    std::uint64_t seq;
    std::coroutine_handle<> resume;
    ProcessId pid;
    std::string_view label;
    Action action;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };
  struct Process {
    std::string path;
    bool daemon = false;
    bool done = false;
    Task<> body;
    std::vector<std::pair<std::coroutine_handle<>, ProcessId>> joiners;
  };

  EventId push(Event ev);
  void execute(Event& ev);
  void after_resume(ProcessId pid);
  void record(const Event& ev);

  SimTime now_{};
  std::uint64_t next_seq_ = 0;
  std::vector<Event> queue_;
  bool stop_requested_ = false;
  ProcessId current_ = kNoProcess;
  std::vector<std::unique_ptr<Process>> processes_;  // index = pid - 1
  std::map<std::string, std::unique_ptr<Signal>, std::less<>> signals_;
  std::exception_ptr pending_error_;
  bool log_enabled_ = false;
  std::vector<std::string> log_;
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
  std::uint64_t executed_ = 0;
};

/// Folds bytes into an FNV-1a 64-bit hash.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace vfab::sim
