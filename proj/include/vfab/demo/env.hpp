#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "vfab/check/coverage.hpp"
#include "vfab/check/refmodel.hpp"
#include "vfab/check/scoreboard.hpp"
#include "vfab/ipxact/flow.hpp"
#include "vfab/reg/model.hpp"
#include "vfab/sw/core.hpp"
#include "vfab/sw/gsa.hpp"
#include "vfab/sw/vri.hpp"
#include "vfab/tb/component.hpp"
#include "vfab/uvc/irq.hpp"
#include "vfab/uvc/srb.hpp"
#include "vfab/uvc/vsp.hpp"

namespace vfab::demo {

/// Wire prefixes and placement of one pixel IP.
struct IpEnvSpec {
  std::string block;  // address block name, "ganc" or "thr"
  const ipxact::Bundle* bundle = nullptr;
  std::shared_ptr<const check::RefModel> model;
  std::uint64_t base = 0;
  std::string bus;
  std::string vin;
  std::string vout;
  std::string irq;
  bool active = true;
};

/// IP-level environment for interface profile A=1, C=1, D=1, E=1: one
/// register agent, one video agent, one interrupt checker, plus predictor,
/// scoreboard and register coverage. Reusable passively at higher levels.
class IpEnv : public tb::Component {
 public:
  IpEnv(std::string name, tb::Component* parent, IpEnvSpec spec, check::CoverageDb& coverage);

  void build_phase() override;
  void connect_phase() override;

  const IpEnvSpec& spec() const { return spec_; }
  reg::RegisterModel& regs() { return regs_; }
  reg::AddressMap& map() { return map_; }
  std::shared_ptr<reg::RegisterBlock> block() const { return regs_.block(spec_.block); }

  uvc::SrbAgent& reg_agent() const { return *reg_agent_; }
  uvc::VideoAgent& video_agent() const { return *video_agent_; }
  uvc::InterruptChecker& irq_checker() const { return *irq_checker_; }
  check::FrameScoreboard& scoreboard() const { return *scoreboard_; }

 private:
  uvc::VspMonitor::Geometry geometry() const;
  void on_output(const uvc::ObservedFrame& f);

  IpEnvSpec spec_;
  check::CoverageDb& coverage_;
  check::CoverGroup* group_ = nullptr;
  reg::RegisterModel regs_;
  reg::AddressMap map_;
  std::unique_ptr<uvc::SrbAdapter> adapter_;
  uvc::SrbAgent* reg_agent_ = nullptr;
  uvc::VideoAgent* video_agent_ = nullptr;
  uvc::InterruptChecker* irq_checker_ = nullptr;
  check::FrameScoreboard* scoreboard_ = nullptr;
};

struct SubsysEnvSpec {
  const ipxact::Bundle* ganc = nullptr;
  const ipxact::Bundle* thr = nullptr;
  std::uint64_t base = 0;
  std::string host_bus;
  std::string ganc_bus;
  std::string thr_bus;
  std::string vin;
  std::string link;
  std::string vout;
  std::string ganc_irq;
  std::string thr_irq;
  bool host_active = true;
};

inline constexpr std::uint64_t kThrOffset = 0x1000;

/// GANC -> THR chain. Host register agent and video agent at the subsystem
/// boundary; both IP environments passive on the internal nets.
class SubsysEnv : public tb::Component {
 public:
  SubsysEnv(std::string name, tb::Component* parent, SubsysEnvSpec spec, check::CoverageDb& coverage);

  void build_phase() override;
  void connect_phase() override;

  reg::RegisterModel& regs() { return regs_; }
  reg::AddressMap& map() { return map_; }
  IpEnv& ganc_env() const { return *ganc_; }
  IpEnv& thr_env() const { return *thr_; }
  uvc::SrbAgent& host_agent() const { return *host_; }
  uvc::VideoAgent& video_agent() const { return *video_; }
  check::FrameScoreboard& scoreboard() const { return *scoreboard_; }

 private:
  SubsysEnvSpec spec_;
  check::CoverageDb& coverage_;
  reg::RegisterModel regs_;
  reg::AddressMap map_;
  std::unique_ptr<uvc::SrbAdapter> adapter_;
  uvc::SrbAgent* host_ = nullptr;
  uvc::VideoAgent* video_ = nullptr;
  IpEnv* ganc_ = nullptr;
  IpEnv* thr_ = nullptr;
  check::FrameScoreboard* scoreboard_ = nullptr;
};

inline constexpr std::uint32_t kSocSubsysBase = 0x40000000;
inline constexpr std::uint32_t kSocVriBase = 0x50000000;

/// VRI command ids.
inline constexpr std::uint32_t kCmdSendFrame = 1;

struct SocEnvSpec {
  SubsysEnvSpec subsys;  // host_active is forced off
  std::string core_bus;
  sw::VriMailbox* mailbox = nullptr;
};

/// SoC level: the core masters the bus in place of the host agent, which
/// stays as a passive monitor; the VRI UVC serves the mailbox.
class SocEnv : public tb::Component {
 public:
  SocEnv(std::string name, tb::Component* parent, SocEnvSpec spec, check::CoverageDb& coverage);

  void build_phase() override;
  void connect_phase() override;

  reg::RegisterModel& regs() { return regs_; }
  reg::AddressMap& map() { return map_; }
  SubsysEnv& subsys() const { return *subsys_; }
  sw::CoreModel& core() const { return *core_; }
  sw::CoreSequencer& core_sequencer() const { return *core_sequencer_; }
  sw::VriUvc& vri() const { return *vri_; }
  sw::GsaAdapter& gsa() const { return *gsa_; }
  const sw::VriCommandTable& commands() const { return commands_; }

 private:
  SocEnvSpec spec_;
  check::CoverageDb& coverage_;
  reg::RegisterModel regs_;
  reg::AddressMap map_;
  sw::VriCommandTable commands_;
  std::uint32_t frames_sent_ = 0;
  SubsysEnv* subsys_ = nullptr;
  sw::CoreModel* core_ = nullptr;
  sw::CoreSequencer* core_sequencer_ = nullptr;
  sw::VriUvc* vri_ = nullptr;
  std::unique_ptr<sw::GsaAdapter> gsa_;
};

/// Pattern symbols accepted by SEND_FRAME.
const std::map<std::string, std::int64_t>& pattern_symbols();

}  // namespace vfab::demo
