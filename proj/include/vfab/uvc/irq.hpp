#pragma once

#include <functional>
#include <string>
#include <vector>

#include "vfab/sim/kernel.hpp"
#include "vfab/tb/component.hpp"

namespace vfab::uvc {

/// Expectation armed when a triggering event happens (e.g. frame done). It is
/// live only if its predicate held at trigger time.
struct ArmedExpectation {
  sim::SimTime trigger;
  sim::SimTime min;  // window relative to trigger
  sim::SimTime max;
  bool predicate_held = true;
  std::string cause;
};

struct LevelChange {
  sim::SimTime time;
  bool high = false;
};

struct IrqVerdicts {
  std::vector<sim::SimTime> spurious;           // rises matching no live expectation
  std::vector<ArmedExpectation> missing;        // live expectations never met
  std::size_t matched = 0;
};

/// Pure matching over one line. A rise inside the window of the oldest
/// unmatched live expectation meets it; a live expectation is also met when
/// the line is already (still) high at trigger + min.
IrqVerdicts check_interrupt(const std::vector<LevelChange>& changes, const std::vector<ArmedExpectation>& exps);

/// Watches one interrupt line and judges it against armed expectations at
/// check time. Holds an objection until every armed window has closed.
class InterruptChecker : public tb::Component {
 public:
  InterruptChecker(std::string name, tb::Component* parent, unsigned line)
      : tb::Component(std::move(name), parent, tb::ComponentKind::kChecker), line_(line) {}

  unsigned line() const { return line_; }
  /// Wire name; otherwise config key `irq` at this component's path.
  void set_binding(std::string signal) { binding_ = std::move(signal); }
  void set_window(sim::SimTime min, sim::SimTime max) {
    min_ = min;
    max_ = max;
  }

  /// Arms an expectation for an event that happened at `trigger`.
  void arm(sim::SimTime trigger, bool predicate_held, std::string cause);

  sim::Task<> run_phase() override;
  void check_phase() override;

  const std::vector<LevelChange>& changes() const { return changes_; }
  const std::vector<ArmedExpectation>& expectations() const { return armed_; }

 private:
  unsigned line_;
  std::string binding_;
  sim::SimTime min_{0};
  sim::SimTime max_{80};
  std::vector<LevelChange> changes_;
  std::vector<ArmedExpectation> armed_;
};

}  // namespace vfab::uvc
