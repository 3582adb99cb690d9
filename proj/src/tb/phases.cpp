#include "vfab/tb/phases.hpp"

#include <exception>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "vfab/tb/agent_plan.hpp"

namespace vfab::tb {

AgentPlan derive_agent_plan(const InterfaceProfile& profile) {
  AgentPlan plan;
  for (unsigned i = 0; i < profile.register_ports; ++i) {
    plan.reg_agents.push_back(fmt::format("reg_agent{}", i));
  }
  const unsigned video = std::max(profile.video_inputs, profile.video_outputs);
  for (unsigned i = 0; i < video; ++i) {
    plan.video_agents.push_back(VideoAgentSpec{fmt::format("video_agent{}", i), i,
                                               i < profile.video_inputs, i < profile.video_outputs});
  }
  for (unsigned i = 0; i < profile.interrupts; ++i) {
    plan.interrupt_checkers.push_back(fmt::format("irq_checker{}", i));
  }
  if (profile.memory_ports != 0) {
    plan.warnings.push_back(
        fmt::format("{} memory interface(s) ignored: no memory UVC is modeled", profile.memory_ports));
  }
  return plan;
}

struct PhaseRunner {
  static Component::PhaseStamps& stamps(Component& c) { return c.stamps_; }

  static void build_recursive(ComponentTree& tree, Component& c) {
    c.build_phase();
    stamps(c).build_done = tree.tick();
    // Children added by build_phase are built after their parent.
    for (std::size_t i = 0; i < c.children().size(); ++i) build_recursive(tree, *c.children()[i]);
  }

  static TestResult run(ComponentTree& tree, sim::SimTime watchdog);
};

TestResult run_phases(ComponentTree& tree, sim::SimTime watchdog) {
  return PhaseRunner::run(tree, watchdog);
}

TestResult PhaseRunner::run(ComponentTree& tree, sim::SimTime watchdog) {
  TestResult result;
  Component* root = tree.root();
  if (root == nullptr) throw BuildError("component tree has no root");
  sim::Kernel& kernel = tree.kernel();

  tree.set_phase(Phase::kBuild);
  build_recursive(tree, *root);

  tree.set_phase(Phase::kConnect);
  const auto components = tree.all();
  for (Component* c : components) {
    auto& st = stamps(*c);
    st.connect_begin = tree.tick();
    c->connect_phase();
    st.connect_done = tree.tick();
  }

  tree.set_phase(Phase::kRun);
  for (Component* c : components) {
    stamps(*c).run_begin = tree.tick();
    kernel.spawn(c->run_phase(), c->path(), c->daemon_run());
  }
  // Nobody objecting after the first timestep means there is nothing to wait for.
  kernel.schedule(
      [&tree, &kernel] {
        if (tree.objections() == 0) kernel.request_stop();
      },
      sim::SimTime{}, "objections");

  const sim::SimTime deadline = kernel.now() + watchdog;
  try {
    kernel.run_until(deadline);
  } catch (const std::exception& e) {
    tree.failures().record("kernel", "error", e.what(), kernel.now());
  }
  if (tree.objections() > 0 && tree.failures().count("error") == 0) {
    result.hang = true;
    auto suspended = kernel.suspended_processes();
    tree.failures().record(
        "kernel", "hang",
        fmt::format("run phase did not finish by t={}; objections held by [{}]; suspended "
                    "processes [{}]",
                    kernel.now().ticks(), fmt::join(tree.objection_holders(), ", "),
                    fmt::join(suspended, ", ")),
        kernel.now());
  }
  result.end_time = kernel.now();

  tree.set_phase(Phase::kExtract);
  for (Component* c : components) c->extract_phase();
  tree.set_phase(Phase::kCheck);
  for (Component* c : components) c->check_phase();
  tree.set_phase(Phase::kReport);
  for (Component* c : components) c->report_phase(result.report_lines);
  tree.set_phase(Phase::kDone);

  result.failures = tree.failures().entries();
  result.passed = result.failures.empty();
  return result;
}

}  // namespace vfab::tb
