#pragma once

#include <string>

#include "vfab/tb/component.hpp"

namespace vfab::tb {

/// Per-interface agent. Reads `is_active` (default true) and `vif` (signal
/// bundle prefix) from the ConfigDB at build time. Active agents own a
/// driver, a sequencer and a monitor; passive agents own only the monitor.
class Agent : public Component {
 public:
  Agent(std::string name, Component* parent) : Component(std::move(name), parent, ComponentKind::kAgent) {}

  bool is_active() const { return active_; }
  const std::string& interface_binding() const { return binding_; }

  Component* monitor_component() const { return monitor_; }
  Component* driver_component() const { return driver_; }
  Component* sequencer_component() const { return sequencer_; }

  void build_phase() override {
    active_ = config().get_as<bool>(path(), "is_active").value_or(true);
    binding_ = config().get_as<std::string>(path(), "vif").value_or("");
    if (active_ && binding_.empty()) {
      throw BuildError(fmt::format("active agent {} has no interface binding (vif)", path()));
    }
    monitor_ = &make_monitor();
    if (active_) {
      sequencer_ = &make_sequencer();
      driver_ = &make_driver();
    }
  }

 protected:
  virtual Component& make_monitor() = 0;
  virtual Component& make_sequencer() = 0;
  virtual Component& make_driver() = 0;

 private:
  bool active_ = true;
  std::string binding_;
  Component* monitor_ = nullptr;
  Component* driver_ = nullptr;
  Component* sequencer_ = nullptr;
};

}  // namespace vfab::tb
