#include "vfab/demo/dut.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace vfab::demo {

namespace {

struct FaultName {
  FaultKind kind;
  const char* name;
};

constexpr FaultName kFaultNames[] = {
    {FaultKind::kNone, "none"},
    {FaultKind::kGainStuck0, "gain_stuck0"},
    {FaultKind::kBadResetWidth, "bad_reset_width"},
    {FaultKind::kCorruptPixel, "corrupt_pixel"},
    {FaultKind::kDropPixel, "drop_pixel"},
    {FaultKind::kDropFrame, "drop_frame"},
    {FaultKind::kSpuriousIrq, "spurious_irq"},
    {FaultKind::kDropIrq, "drop_irq"},
    {FaultKind::kSwapChain, "swap_chain"},
};

}  // namespace

FaultMode FaultMode::parse(const std::string& text) {
  std::string name = text;
  std::optional<unsigned> arg;
  if (const auto colon = text.find(':'); colon != std::string::npos) {
    name = text.substr(0, colon);
    const std::string a = text.substr(colon + 1);
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(a, &used, 0);
    } catch (const std::exception&) {
      used = 0;
    }
    if (a.empty() || used != a.size()) throw std::invalid_argument(fmt::format("bad fault argument '{}'", a));
    arg = static_cast<unsigned>(v);
  }
  for (const auto& f : kFaultNames) {
    if (name != f.name) continue;
    FaultMode m{f.kind, 0};
    if (f.kind == FaultKind::kCorruptPixel) {
      m.arg = arg.value_or(0);
    } else if (arg) {
      throw std::invalid_argument(fmt::format("fault {} takes no argument", name));
    }
    return m;
  }
  throw std::invalid_argument(fmt::format("unknown fault mode '{}'", text));
}

std::string FaultMode::to_string() const {
  for (const auto& f : kFaultNames) {
    if (f.kind != kind) continue;
    if (kind == FaultKind::kCorruptPixel) return fmt::format("{}:{}", f.name, arg);
    return f.name;
  }
  return "none";
}

std::vector<std::string> fault_names() {
  std::vector<std::string> out;
  for (const auto& f : kFaultNames) out.emplace_back(f.kind == FaultKind::kCorruptPixel ? "corrupt_pixel:K" : f.name);
  return out;
}

PixelIp::PixelIp(sim::Kernel& kernel, Kind kind, std::string name, IpPorts ports, FaultMode fault)
    : kernel_(kernel), kind_(kind), name_(std::move(name)), ports_(ports), fault_(fault) {
  specs_[regs::kCtrl] = {0, 0x1};
  if (kind_ == Kind::kGanc) {
    specs_[regs::kGain] = {0x10, fault_.kind == FaultKind::kGainStuck0 ? 0xFEU : 0xFFU};
    specs_[regs::kOffset] = {0, 0xFF};
  } else {
    specs_[regs::kThresh] = {0x80, 0xFF};
  }
  specs_[regs::kWidth] = {fault_.kind == FaultKind::kBadResetWidth ? 32U : 64U, 0xFFFF};
  specs_[regs::kHeight] = {64, 0xFFFF};
  specs_[regs::kIntEnable] = {0, 0x1};
  specs_[regs::kIntStatus] = {0, 0x1, true};
  specs_[regs::kStatus] = {0, 0x0};
  reset_regs();
  slave_ = std::make_unique<uvc::SrbSlavePort>(ports_.bus, [this](uvc::BusTxn t) { return handle(t); });
}

void PixelIp::start() {
  kernel_.spawn(slave_->run(), name_ + ".regs", true);
  kernel_.spawn(pipeline(), name_ + ".pipe", true);
}

void PixelIp::reset_regs() {
  for (const auto& [off, spec] : specs_) regs_[off] = spec.reset;
  cfg_ = Config{};
  update_irq();
}

void PixelIp::update_irq() {
  if (ports_.irq == nullptr) return;
  const std::uint32_t status = regs_[regs::kIntStatus] & 1U;
  std::uint32_t level = status & regs_[regs::kIntEnable];
  if (fault_.kind == FaultKind::kSpuriousIrq) level = status;
  if (fault_.kind == FaultKind::kDropIrq) level = 0;
  if (ports_.irq->read() != level) ports_.irq->drive(level);
}

std::uint32_t PixelIp::peek(std::uint32_t offset) const {
  const auto it = regs_.find(offset & 0xFFFU);
  return it == regs_.end() ? 0 : it->second;
}

uvc::BusTxn PixelIp::access(uvc::BusTxn txn) {
  const std::uint32_t off = txn.addr & 0xFFFU;
  const auto spec = specs_.find(off);
  if (spec == specs_.end()) {
    txn.resp = uvc::BusResp::kError;
    return txn;
  }
  std::uint32_t& r = regs_[off];
  if (txn.is_write()) {
    if (spec->second.w1c) {
      r &= ~(txn.wdata & spec->second.write_mask);
    } else {
      r = (r & ~spec->second.write_mask) | (txn.wdata & spec->second.write_mask);
    }
    update_irq();
  } else {
    txn.rdata = r;
  }
  txn.resp = uvc::BusResp::kOk;
  return txn;
}

sim::Task<uvc::BusTxn> PixelIp::handle(uvc::BusTxn txn) { co_return access(txn); }

std::uint32_t PixelIp::pixel(std::uint32_t pix) const {
  if (!cfg_.enable) return pix;
  if (kind_ == Kind::kThr) return pix >= cfg_.p0 ? 255U : 0U;
  const auto off = static_cast<std::int32_t>(static_cast<std::int8_t>(cfg_.p1 & 0xFFU));
  const std::int32_t v = static_cast<std::int32_t>((pix * cfg_.p0) >> 4) + off;
  return static_cast<std::uint32_t>(std::clamp(v, 0, 255));
}

sim::Task<> PixelIp::pipeline() {
  uvc::VspIf& in = ports_.vin;
  uvc::VspIf& out = ports_.vout;
  bool in_frame = false;
  bool in_line = false;
  bool suppress = false;
  unsigned lines = 0;
  std::uint64_t frame = 0;
  std::uint64_t pix = 0;
  for (;;) {
    co_await in.clk->posedge();
    if (!in.rst_n->high()) {
      reset_regs();
      out.frame_start->drive(0);
      out.line_valid->drive(0);
      out.data_valid->drive(0);
      in_frame = in_line = false;
      continue;
    }
    const bool fs = in.frame_start->high();
    const bool lv = in.line_valid->high();
    const bool dv = in.data_valid->high();

    if (fs) {
      cfg_.enable = (regs_[regs::kCtrl] & 1U) != 0;
      cfg_.p0 = regs_[regs::kGain];
      cfg_.p1 = kind_ == Kind::kGanc ? regs_[regs::kOffset] : 0;
      cfg_.height = regs_[regs::kHeight];
      frame = frames_started_++;
      suppress = fault_.kind == FaultKind::kDropFrame && frame == 0;
      in_frame = true;
      in_line = false;
      lines = 0;
      pix = 0;
      regs_[regs::kStatus] |= 1U;
      out.frame_start->drive(suppress ? 0 : 1);
      out.line_valid->drive(0);
      out.data_valid->drive(0);
      continue;
    }
    out.frame_start->drive(0);

    bool out_dv = lv && dv;
    std::uint32_t value = 0;
    if (out_dv) {
      value = pixel(static_cast<std::uint32_t>(in.data->read()));
      if (in_frame && frame == 0) {
        if (fault_.kind == FaultKind::kCorruptPixel && pix == fault_.arg) value ^= 1U;
        if (fault_.kind == FaultKind::kDropPixel && pix == 1) out_dv = false;
      }
      ++pix;
    }
    if (suppress) {
      out.line_valid->drive(0);
      out.data_valid->drive(0);
    } else {
      out.line_valid->drive(lv ? 1 : 0);
      out.data_valid->drive(out_dv ? 1 : 0);
      if (out_dv) out.data->drive(value);
    }

    if (in_line && !lv && in_frame && ++lines == cfg_.height) {
      in_frame = false;
      regs_[regs::kStatus] &= ~1U;
      if (!suppress) {
        regs_[regs::kIntStatus] |= 1U;
        ++frames_done_;
      }
      update_irq();
    }
    in_line = lv;
  }
}

Interconnect::Interconnect(sim::Kernel& kernel, std::string name, uvc::SrbIf upstream)
    : kernel_(kernel), name_(std::move(name)), up_(upstream) {
  slave_ = std::make_unique<uvc::SrbSlavePort>(up_, [this](uvc::BusTxn t) { return handle(t); });
}

void Interconnect::add_bus(std::uint32_t base, std::uint32_t size, uvc::SrbIf downstream) {
  downstream_.push_back(std::make_unique<uvc::SrbIf>(downstream));
  uvc::SrbIf* bus = downstream_.back().get();
  routes_.push_back(Route{base, size, [bus](uvc::BusTxn t) { return forward(bus, t); }});
}

void Interconnect::start() { kernel_.spawn(slave_->run(), name_, true); }

sim::Task<uvc::BusTxn> Interconnect::handle(uvc::BusTxn txn) {
  for (const auto& r : routes_) {
    if (txn.addr >= r.base && txn.addr - r.base < r.size) co_return co_await r.target(txn);
  }
  txn.resp = uvc::BusResp::kError;
  co_return txn;
}

sim::Task<uvc::BusTxn> Interconnect::forward(uvc::SrbIf* bus, uvc::BusTxn txn) {
  co_return co_await uvc::srb_transfer(*bus, txn);
}

}  // namespace vfab::demo
