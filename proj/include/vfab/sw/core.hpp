#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vfab/reg/model.hpp"
#include "vfab/seq/sequence.hpp"
#include "vfab/sim/sync.hpp"
#include "vfab/sw/program.hpp"
#include "vfab/sw/vri.hpp"
#include "vfab/tb/component.hpp"
#include "vfab/uvc/srb.hpp"

namespace vfab::sw {

struct ProgramResult {
  bool ok = true;
  std::string kind;  // sw.bus_error, sw.irq_timeout, sw.vri_error, sw.program
  std::string message;
  std::size_t executed = 0;
  std::vector<std::uint32_t> reads;
  std::optional<std::uint32_t> ret;  // last VRI return value
};

struct CoreBinding {
  std::string bus;                     // SRB prefix the core masters
  std::vector<std::string> irq_lines;  // signal per interrupt line
  std::uint32_t vri_base = 0x50000000;
};

/// Processor stand-in: interprets TestPrograms as SRB bus master. Register
/// names resolve through the given model and map, so the mirrors and their
/// self-checks stay live. Programs run one at a time in submission order.
class CoreModel : public tb::Component {
 public:
  CoreModel(std::string name, tb::Component* parent, reg::RegisterModel& model, reg::AddressMap& map,
            CoreBinding binding, const VriCommandTable* commands = nullptr);

  /// Queues `program` for the core process and waits for its result.
  sim::Task<ProgramResult> execute(TestProgram program);
  /// One bus transfer, serialized with the running program.
  sim::Task<uvc::BusTxn> bus_access(uvc::BusTxn txn);
  /// Frontdoor adapter for register maps and sequences at this level.
  reg::BusAdapter& adapter() { return adapter_; }

  sim::Task<> run_phase() override;

  const std::map<std::string, std::int64_t>& variables() const { return vars_; }
  std::int64_t variable(const std::string& name, std::int64_t fallback = 0) const;
  std::uint64_t programs_run() const { return programs_; }

 private:
  class Adapter : public reg::BusAdapter {
   public:
    explicit Adapter(CoreModel& core) : core_(core) {}
    sim::Task<uvc::BusTxn> execute(uvc::BusTxn request) override { return core_.bus_access(request); }

   private:
    CoreModel& core_;
  };
  struct Job {
    TestProgram program;
    std::shared_ptr<std::optional<ProgramResult>> result;
    std::shared_ptr<sim::Notifier> done;
  };

  uvc::SrbIf& bus();
  sim::Task<ProgramResult> interpret(const TestProgram& program);
  sim::Task<> vri_call(std::uint32_t cmd, std::vector<std::uint32_t> args, ProgramResult& res);
  std::int64_t value(const std::string& token, const ArgSpec* spec, int line) const;

  reg::RegisterModel& model_;
  reg::AddressMap& map_;
  CoreBinding binding_;
  const VriCommandTable* commands_;
  Adapter adapter_{*this};
  std::optional<uvc::SrbIf> bus_;
  sim::Mutex bus_lock_;
  sim::Fifo<Job> jobs_;
  std::map<std::string, std::int64_t> vars_;
  std::uint64_t programs_ = 0;
};

/// Sequencer at the core's level: register sequences run on it reach the
/// bus through the core, with no driver of their own.
class CoreSequencer : public seq::SequencerBase {
 public:
  using seq::SequencerBase::SequencerBase;
};

}  // namespace vfab::sw
