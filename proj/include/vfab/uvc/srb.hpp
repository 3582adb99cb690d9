#pragma once

#include <functional>
#include <string>

#include "vfab/reg/model.hpp"
#include "vfab/seq/sequence.hpp"
#include "vfab/sim/kernel.hpp"
#include "vfab/tb/agent.hpp"
#include "vfab/uvc/bus_txn.hpp"

namespace vfab::uvc {

/// Wires of one simple register bus instance.
struct SrbIf {
  sim::Signal* clk = nullptr;
  sim::Signal* rst_n = nullptr;
  sim::Signal* req = nullptr;
  sim::Signal* we = nullptr;
  sim::Signal* addr = nullptr;
  sim::Signal* wdata = nullptr;
  sim::Signal* ack = nullptr;
  sim::Signal* rdata = nullptr;
  sim::Signal* err = nullptr;

  /// Creates `<prefix>.req` and friends, sharing the given clock and reset.
  static SrbIf create(sim::Kernel& kernel, const std::string& prefix, sim::Signal& clk, sim::Signal& rst_n);
  /// Binds existing wires; clk and rst_n are the nearest `<ancestor>.clk`.
  static SrbIf bind(sim::Kernel& kernel, const std::string& prefix);
};

/// Finds `<p>.<leaf>` for the longest dot-prefix p of `prefix`.
sim::Signal& find_enclosing(sim::Kernel& kernel, const std::string& prefix, const std::string& leaf);

inline constexpr unsigned kSrbTimeoutCycles = 64;

/// Master side of one transfer: assert at a rising edge, wait for ack,
/// deassert. Returns resp=error on err or after `timeout` cycles without ack
/// (then `*timed_out` is set).
sim::Task<BusTxn> srb_transfer(SrbIf& bus, BusTxn txn, unsigned timeout = kSrbTimeoutCycles,
                               bool* timed_out = nullptr);

/// Slave side: samples each new request, awaits the handler (which may take
/// cycles, e.g. an interconnect forwarding downstream) and acks for one cycle.
class SrbSlavePort {
 public:
  using Handler = std::function<sim::Task<BusTxn>(BusTxn)>;
  SrbSlavePort(SrbIf bus, Handler handler) : bus_(bus), handler_(std::move(handler)) {}
  /// Daemon process body.
  sim::Task<> run();
  /// When false the port never acknowledges (used for timeout tests).
  bool responsive = true;

 private:
  SrbIf bus_;
  Handler handler_;
};

using SrbSequencer = seq::Sequencer<BusTxn>;

class SrbDriver : public tb::Component {
 public:
  SrbDriver(std::string name, tb::Component* parent)
      : tb::Component(std::move(name), parent, tb::ComponentKind::kDriver) {}
  sim::Task<> run_phase() override;
  std::uint64_t completed() const { return completed_; }

 private:
  std::uint64_t completed_ = 0;
};

/// Rebuilds transactions from wires only; identical output with or without
/// a driver on the bus.
class SrbMonitor : public tb::Component {
 public:
  SrbMonitor(std::string name, tb::Component* parent)
      : tb::Component(std::move(name), parent, tb::ComponentKind::kMonitor) {}
  sim::Task<> run_phase() override;
  tb::AnalysisPort<BusTxn> ap{*this, "ap"};
  std::uint64_t published() const { return published_; }

 private:
  std::uint64_t published_ = 0;
};

class SrbAgent : public tb::Agent {
 public:
  using tb::Agent::Agent;
  SrbMonitor& monitor() const { return dynamic_cast<SrbMonitor&>(*monitor_component()); }
  SrbSequencer* sequencer() const { return dynamic_cast<SrbSequencer*>(sequencer_component()); }

 protected:
  tb::Component& make_monitor() override { return create_via_factory<SrbMonitor, SrbMonitor>("monitor"); }
  tb::Component& make_sequencer() override { return create<SrbSequencer>("sequencer"); }
  tb::Component& make_driver() override { return create_via_factory<SrbDriver, SrbDriver>("driver"); }
};

/// Register-model frontdoor over an SRB sequencer.
class SrbAdapter : public reg::BusAdapter {
 public:
  explicit SrbAdapter(SrbSequencer& sequencer) : sequencer_(sequencer) {}
  sim::Task<BusTxn> execute(BusTxn request) override;

 private:
  SrbSequencer& sequencer_;
};

/// Feeds monitored transactions into a register model (passive mirrors).
class RegPredictor : public tb::Component {
 public:
  RegPredictor(std::string name, tb::Component* parent, reg::RegisterModel& model, reg::AddressMap& map)
      : tb::Component(std::move(name), parent, tb::ComponentKind::kCustom), model_(model), map_(map) {}
  tb::AnalysisExport<BusTxn> in{*this, "in", [this](const BusTxn& t) { reg::predict(model_, map_, t); }};

 private:
  reg::RegisterModel& model_;
  reg::AddressMap& map_;
};

}  // namespace vfab::uvc
