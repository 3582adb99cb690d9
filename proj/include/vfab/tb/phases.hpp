#pragma once

#include <string>
#include <vector>

#include "vfab/sim/time.hpp"
#include "vfab/tb/component.hpp"
#include "vfab/tb/failure.hpp"

namespace vfab::tb {

struct TestResult {
  bool passed = false;
  bool hang = false;
  sim::SimTime end_time;
  std::vector<Failure> failures;
  std::vector<std::string> report_lines;
};

/// Runs build -> connect -> run -> extract -> check -> report on `tree`.
/// The run phase lasts until every objection is dropped, or fails with a
/// "hang" diagnosis once `watchdog` simulated ticks have elapsed.
TestResult run_phases(ComponentTree& tree, sim::SimTime watchdog);

}  // namespace vfab::tb
