#include "vfab/uvc/irq.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace vfab::uvc {

namespace {

bool level_at(const std::vector<LevelChange>& changes, sim::SimTime t) {
  bool high = false;
  for (const auto& c : changes) {
    if (c.time > t) break;
    high = c.high;
  }
  return high;
}

}  // namespace

IrqVerdicts check_interrupt(const std::vector<LevelChange>& changes, const std::vector<ArmedExpectation>& exps) {
  IrqVerdicts v;
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < exps.size(); ++i) {
    if (exps[i].predicate_held) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return exps[a].trigger < exps[b].trigger; });
  std::vector<bool> met(exps.size(), false);

  bool prev = false;
  for (const auto& c : changes) {
    const bool rise = c.high && !prev;
    prev = c.high;
    if (!rise) continue;
    bool used = false;
    for (std::size_t i : order) {
      if (met[i]) continue;
      const auto& e = exps[i];
      if (c.time >= e.trigger + e.min && c.time <= e.trigger + e.max) {
        met[i] = true;
        used = true;
        break;
      }
    }
    if (!used) v.spurious.push_back(c.time);
  }
  for (std::size_t i : order) {
    if (!met[i] && level_at(changes, exps[i].trigger + exps[i].min)) met[i] = true;
    if (met[i]) {
      ++v.matched;
    } else {
      v.missing.push_back(exps[i]);
    }
  }
  return v;
}

void InterruptChecker::arm(sim::SimTime trigger, bool predicate_held, std::string cause) {
  armed_.push_back(ArmedExpectation{trigger, min_, max_, predicate_held, std::move(cause)});
  const sim::SimTime close = trigger + max_;
  if (close < kernel().now()) return;
  tree().raise_objection(*this);
  kernel().schedule([this] { tree().drop_objection(*this); }, close - kernel().now() + sim::SimTime(1),
                    "irq_window");
}

sim::Task<> InterruptChecker::run_phase() {
  std::string name = binding_;
  if (name.empty()) name = config().get_as<std::string>(path(), "irq").value_or("");
  if (name.empty()) throw tb::BuildError(fmt::format("{}: no interrupt line bound", path()));
  sim::Signal& sig = kernel().signal(name);
  if (sig.high()) changes_.push_back({kernel().now(), true});
  for (;;) {
    co_await sig.change();
    changes_.push_back({kernel().now(), sig.high()});
  }
}

void InterruptChecker::check_phase() {
  const IrqVerdicts v = check_interrupt(changes_, armed_);
  for (auto t : v.spurious) {
    fail("irq.spurious", fmt::format("interrupt line {} rose at t={} with no armed expectation", line_, t.ticks()));
  }
  for (const auto& e : v.missing) {
    fail("irq.missing", fmt::format("interrupt line {} expected within [{}, {}] after {} at t={}", line_,
                                    e.min.ticks(), e.max.ticks(), e.cause, e.trigger.ticks()));
  }
}

}  // namespace vfab::uvc
