#include "vfab/sim/kernel.hpp"

#include <algorithm>
#include <iterator>

#include <fmt/format.h>

namespace vfab::sim {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// ---------------------------------------------------------------- Signal

Signal::Signal(Kernel& kernel, std::string name, unsigned width, std::uint64_t init)
    : kernel_(kernel), name_(std::move(name)), width_(width), value_(init) {
  if (width_ < 1 || width_ > 64) {
    throw ContractViolation(fmt::format("signal {}: width {} outside 1..64", name_, width_));
  }
  if ((init & ~mask()) != 0) {
    throw ContractViolation(fmt::format("signal {}: initial value {:#x} exceeds {} bits", name_,
                                        init, width_));
  }
}

void Signal::drive(std::uint64_t value, SimTime delay) {
  if ((value & ~mask()) != 0) {
    throw ContractViolation(
        fmt::format("signal {}: value {:#x} exceeds {} bits", name_, value, width_));
  }
  kernel_.schedule([this, value] { apply(value); }, delay, name_);
}

void Signal::apply(std::uint64_t value) {
  if (value == value_) return;
  const bool was_high = (value_ & 1U) != 0;
  const bool is_high = (value & 1U) != 0;
  value_ = value;
  last_change_ = kernel_.now();
  ++changes_;

  std::vector<Waiter> keep;
  keep.reserve(waiters_.size());
  auto pending = std::move(waiters_);
  waiters_.clear();
  for (const auto& w : pending) {
    bool match = false;
    switch (w.edge) {
      case Edge::kAny:
        match = true;
        break;
      case Edge::kRising:
        match = !was_high && is_high;
        break;
      case Edge::kFalling:
        match = was_high && !is_high;
        break;
    }
    if (match) {
      kernel_.schedule_resume(w.handle, w.pid, SimTime{});
    } else {
      keep.push_back(w);
    }
  }
  // Waiters registered while notifying (none today) would land in waiters_.
  keep.insert(keep.end(), waiters_.begin(), waiters_.end());
  waiters_ = std::move(keep);
}

void Signal::EdgeAwaiter::await_suspend(std::coroutine_handle<> h) {
  signal.waiters_.push_back(Waiter{edge, h, signal.kernel_.current_process()});
}

// ---------------------------------------------------------------- Clock

Clock::Clock(Kernel& kernel, Signal& clk, SimTime period)
    : kernel_(kernel), clk_(clk), period_(period) {
  if (period.ticks() < 2 || period.ticks() % 2 != 0) {
    throw ContractViolation(fmt::format("clock {}: period must be even and >= 2", clk.name()));
  }
  if (clk.read() != 0) throw ContractViolation("clock must start low");
  kernel_.schedule([this] { toggle(); }, SimTime(period_.ticks() / 2), clk_.name());
}

void Clock::toggle() {
  clk_.apply(clk_.read() ^ 1U);
  kernel_.schedule([this] { toggle(); }, SimTime(period_.ticks() / 2), clk_.name());
}

// ---------------------------------------------------------------- Kernel

Kernel::Kernel() = default;

Kernel::~Kernel() {
  // Drop pending events first; their actions may reference signals.
  queue_.clear();
  processes_.clear();
}

EventId Kernel::push(Event ev) {
  const EventId id = ev.seq;
  queue_.push_back(std::move(ev));
  std::push_heap(queue_.begin(), queue_.end(), Later{});
  return id;
}

EventId Kernel::schedule(Action action, SimTime delay, std::string_view label) {
  return push(Event{now_ + delay, next_seq_++, {}, kNoProcess, label, std::move(action)});
}

void Kernel::schedule_resume(std::coroutine_handle<> h, ProcessId pid, SimTime delay) {
  std::string_view label = "kernel";
  if (pid != kNoProcess) label = processes_[pid - 1]->path;
  push(Event{now_ + delay, next_seq_++, h, pid, label, {}});
}

void Kernel::record(const Event& ev) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "{}:{}:", ev.time.ticks(), ev.seq);
  const std::string_view head(buf.data(), buf.size());
  hash_ = fnv1a(head, hash_);
  hash_ = fnv1a(ev.label, hash_);
  hash_ = fnv1a("\n", hash_);
  if (log_enabled_) {
    std::string line(head);
    line.append(ev.label);
    log_.push_back(std::move(line));
  }
  ++executed_;
}

void Kernel::execute(Event& ev) {
  if (ev.resume) {
    const ProcessId saved = current_;
    current_ = ev.pid;
    ev.resume.resume();
    current_ = saved;
    if (ev.pid != kNoProcess) after_resume(ev.pid);
  } else if (ev.action) {
    ev.action();
  }
}

void Kernel::after_resume(ProcessId pid) {
  Process& proc = *processes_[pid - 1];
  if (proc.done || !proc.body.done()) return;
  proc.done = true;
  if (auto err = proc.body.error(); err && !pending_error_) {
    pending_error_ = err;
    stop_requested_ = true;
  }
  for (auto& [h, joiner] : proc.joiners) schedule_resume(h, joiner, SimTime{});
  proc.joiners.clear();
}

SimTime Kernel::run_until(SimTime limit) {
  stop_requested_ = false;
  SimTime last = now_;
  while (!queue_.empty() && !stop_requested_) {
    if (queue_.front().time > limit) break;
    std::pop_heap(queue_.begin(), queue_.end(), Later{});
    Event ev = std::move(queue_.back());
    queue_.pop_back();
    now_ = ev.time;
    record(ev);
    execute(ev);
    last = now_;
  }
  if (pending_error_) std::rethrow_exception(std::exchange(pending_error_, nullptr));
  return last;
}

ProcessId Kernel::spawn(Task<> body, std::string path, bool daemon) {
  auto proc = std::make_unique<Process>();
  proc->path = std::move(path);
  proc->daemon = daemon;
  proc->body = std::move(body);
  auto handle = proc->body.handle();
  processes_.push_back(std::move(proc));
  const auto pid = static_cast<ProcessId>(processes_.size());
  schedule_resume(handle, pid, SimTime{});
  return pid;
}

bool Kernel::finished(ProcessId pid) const {
  return pid != kNoProcess && pid <= processes_.size() && processes_[pid - 1]->done;
}

const std::string& Kernel::process_path(ProcessId pid) const {
  static const std::string kNone = "kernel";
  if (pid == kNoProcess || pid > processes_.size()) return kNone;
  return processes_[pid - 1]->path;
}

std::vector<std::string> Kernel::suspended_processes(bool include_daemons) const {
  std::vector<std::string> out;
  for (const auto& p : processes_) {
    if (!p->done && (include_daemons || !p->daemon)) out.push_back(p->path);
  }
  return out;
}

void Kernel::JoinAwaiter::await_suspend(std::coroutine_handle<> h) {
  kernel.processes_[pid - 1]->joiners.emplace_back(h, kernel.current_process());
}

Signal& Kernel::make_signal(std::string path, unsigned width, std::uint64_t init) {
  if (signals_.contains(path)) {
    throw ContractViolation(fmt::format("signal {} already exists", path));
  }
  auto sig = std::make_unique<Signal>(*this, path, width, init);
  auto& ref = *sig;
  signals_.emplace(std::move(path), std::move(sig));
  return ref;
}

Signal* Kernel::find_signal(std::string_view path) {
  auto it = signals_.find(path);
  return it == signals_.end() ? nullptr : it->second.get();
}

Signal& Kernel::signal(std::string_view path) {
  if (auto* s = find_signal(path)) return *s;
  throw std::out_of_range(fmt::format("no signal named {}", path));
}

}  // namespace vfab::sim
