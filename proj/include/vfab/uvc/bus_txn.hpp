#pragma once

#include <cstdint>
#include <string>

#include <fmt/format.h>

#include "vfab/sim/time.hpp"

namespace vfab::uvc {

enum class BusKind { kRead, kWrite };
enum class BusResp { kOk, kError };

/// One register-bus transaction. Monitors rebuild it from wires alone, so it
/// must carry nothing a wire observer could not see apart from the timing.
struct BusTxn {
  BusKind kind = BusKind::kRead;
  std::uint32_t addr = 0;
  std::uint32_t wdata = 0;
  std::uint32_t rdata = 0;
  BusResp resp = BusResp::kOk;
  sim::SimTime issue_time;
  sim::SimTime complete_time;

  static BusTxn read(std::uint32_t addr) { return BusTxn{BusKind::kRead, addr, 0, 0, BusResp::kOk, {}, {}}; }
  static BusTxn write(std::uint32_t addr, std::uint32_t data) {
    return BusTxn{BusKind::kWrite, addr, data, 0, BusResp::kOk, {}, {}};
  }
  bool is_write() const { return kind == BusKind::kWrite; }
  bool ok() const { return resp == BusResp::kOk; }

  /// Equality on wire-visible content (kind, address, data, response).
  bool same_content(const BusTxn& o) const {
    return kind == o.kind && addr == o.addr && resp == o.resp &&
           (is_write() ? wdata == o.wdata : rdata == o.rdata);
  }
  bool operator==(const BusTxn&) const = default;

  std::string to_string() const {
    if (is_write()) {
      return fmt::format("W {:#010x} <= {:#010x}{}", addr, wdata, ok() ? "" : " ERR");
    }
    return fmt::format("R {:#010x} => {:#010x}{}", addr, rdata, ok() ? "" : " ERR");
  }
};

}  // namespace vfab::uvc
