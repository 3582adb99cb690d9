#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vfab/sim/kernel.hpp"
#include "vfab/uvc/srb.hpp"
#include "vfab/uvc/vsp.hpp"

namespace vfab::demo {

enum class FaultKind {
  kNone,
  kGainStuck0,
  kBadResetWidth,
  kCorruptPixel,
  kDropPixel,
  kDropFrame,
  kSpuriousIrq,
  kDropIrq,
  kSwapChain
};

struct FaultMode {
  FaultKind kind = FaultKind::kNone;
  unsigned arg = 0;  // pixel index for corrupt_pixel

  /// "none", "gain_stuck0", ..., "corrupt_pixel:K". Throws std::invalid_argument.
  static FaultMode parse(const std::string& text);
  std::string to_string() const;
  bool operator==(const FaultMode&) const = default;
};

std::vector<std::string> fault_names();

/// Register offsets shared by the demo IPs.
namespace regs {
inline constexpr std::uint32_t kCtrl = 0x00;
inline constexpr std::uint32_t kGain = 0x04;    // GANC
inline constexpr std::uint32_t kThresh = 0x04;  // THR
inline constexpr std::uint32_t kOffset = 0x08;  // GANC
inline constexpr std::uint32_t kWidth = 0x0C;
inline constexpr std::uint32_t kHeight = 0x10;
inline constexpr std::uint32_t kIntEnable = 0x14;
inline constexpr std::uint32_t kIntStatus = 0x18;
inline constexpr std::uint32_t kStatus = 0x1C;
}  // namespace regs

struct IpPorts {
  uvc::SrbIf bus;
  uvc::VspIf vin;
  uvc::VspIf vout;
  sim::Signal* irq = nullptr;
};

/// Cycle-level model of a one-stage pixel pipeline IP with an SRB register
/// slave, one video input, one video output and one interrupt line.
/// Configuration is latched at frame_start; output lags input by one cycle.
class PixelIp {
 public:
  enum class Kind { kGanc, kThr };

  PixelIp(sim::Kernel& kernel, Kind kind, std::string name, IpPorts ports, FaultMode fault = {});
  PixelIp(const PixelIp&) = delete;
  PixelIp& operator=(const PixelIp&) = delete;

  /// Spawns the register slave and pipeline processes.
  void start();

  const std::string& name() const { return name_; }
  Kind kind() const { return kind_; }
  /// Register access by offset (bits above 0xFFF are ignored).
  uvc::BusTxn access(uvc::BusTxn txn);
  std::uint32_t peek(std::uint32_t offset) const;
  std::uint64_t frames_done() const { return frames_done_; }

 private:
  struct RegSpec {
    std::uint32_t reset;
    std::uint32_t write_mask;
    bool w1c = false;
  };
  struct Config {
    bool enable = false;
    std::uint32_t p0 = 0;  // gain or thresh
    std::uint32_t p1 = 0;  // offset
    std::uint32_t height = 0;
  };

  void reset_regs();
  void update_irq();
  std::uint32_t pixel(std::uint32_t pix) const;
  sim::Task<> pipeline();
  sim::Task<uvc::BusTxn> handle(uvc::BusTxn txn);

  sim::Kernel& kernel_;
  Kind kind_;
  std::string name_;
  IpPorts ports_;
  FaultMode fault_;
  std::map<std::uint32_t, RegSpec> specs_;
  std::map<std::uint32_t, std::uint32_t> regs_;
  std::unique_ptr<uvc::SrbSlavePort> slave_;
  Config cfg_;
  std::uint64_t frames_started_ = 0;
  std::uint64_t frames_done_ = 0;
};

/// Address decoder: forwards each upstream request to the route whose
/// absolute window contains the address (address unchanged), or answers err.
class Interconnect {
 public:
  struct Route {
    std::uint32_t base;
    std::uint32_t size;
    std::function<sim::Task<uvc::BusTxn>(uvc::BusTxn)> target;
  };

  Interconnect(sim::Kernel& kernel, std::string name, uvc::SrbIf upstream);
  /// Routes to another SRB bus as master.
  void add_bus(std::uint32_t base, std::uint32_t size, uvc::SrbIf downstream);
  void add_route(Route r) { routes_.push_back(std::move(r)); }
  void start();

 private:
  sim::Task<uvc::BusTxn> handle(uvc::BusTxn txn);
  static sim::Task<uvc::BusTxn> forward(uvc::SrbIf* bus, uvc::BusTxn txn);

  sim::Kernel& kernel_;
  std::string name_;
  uvc::SrbIf up_;
  std::vector<std::unique_ptr<uvc::SrbIf>> downstream_;
  std::vector<Route> routes_;
  std::unique_ptr<uvc::SrbSlavePort> slave_;
};

}  // namespace vfab::demo
