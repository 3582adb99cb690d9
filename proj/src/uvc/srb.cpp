#include "vfab/uvc/srb.hpp"

#include <fmt/format.h>

namespace vfab::uvc {

sim::Signal& find_enclosing(sim::Kernel& kernel, const std::string& prefix, const std::string& leaf) {
  std::string p = prefix;
  for (;;) {
    if (auto* s = kernel.find_signal(p + "." + leaf)) return *s;
    const auto dot = p.rfind('.');
    if (dot == std::string::npos) break;
    p.resize(dot);
  }
  if (auto* s = kernel.find_signal(leaf)) return *s;
  throw std::out_of_range(fmt::format("no {} signal encloses {}", leaf, prefix));
}

SrbIf SrbIf::create(sim::Kernel& kernel, const std::string& prefix, sim::Signal& clk, sim::Signal& rst_n) {
  SrbIf b;
  b.clk = &clk;
  b.rst_n = &rst_n;
  b.req = &kernel.make_signal(prefix + ".req", 1);
  b.we = &kernel.make_signal(prefix + ".we", 1);
  b.addr = &kernel.make_signal(prefix + ".addr", 32);
  b.wdata = &kernel.make_signal(prefix + ".wdata", 32);
  b.ack = &kernel.make_signal(prefix + ".ack", 1);
  b.rdata = &kernel.make_signal(prefix + ".rdata", 32);
  b.err = &kernel.make_signal(prefix + ".err", 1);
  return b;
}

SrbIf SrbIf::bind(sim::Kernel& kernel, const std::string& prefix) {
  SrbIf b;
  b.clk = &find_enclosing(kernel, prefix, "clk");
  b.rst_n = &find_enclosing(kernel, prefix, "rst_n");
  b.req = &kernel.signal(prefix + ".req");
  b.we = &kernel.signal(prefix + ".we");
  b.addr = &kernel.signal(prefix + ".addr");
  b.wdata = &kernel.signal(prefix + ".wdata");
  b.ack = &kernel.signal(prefix + ".ack");
  b.rdata = &kernel.signal(prefix + ".rdata");
  b.err = &kernel.signal(prefix + ".err");
  return b;
}

sim::Task<BusTxn> srb_transfer(SrbIf& bus, BusTxn txn, unsigned timeout, bool* timed_out) {
  co_await bus.clk->posedge();
  while (!bus.rst_n->high()) co_await bus.clk->posedge();
  txn.issue_time = bus.clk->last_change();
  bus.req->drive(1);
  bus.we->drive(txn.is_write() ? 1 : 0);
  bus.addr->drive(txn.addr);
  bus.wdata->drive(txn.is_write() ? txn.wdata : 0);
  unsigned cycles = 0;
  for (;;) {
    co_await bus.clk->posedge();
    ++cycles;
    if (bus.ack->high()) {
      txn.rdata = txn.is_write() ? 0 : static_cast<std::uint32_t>(bus.rdata->read());
      txn.resp = bus.err->high() ? BusResp::kError : BusResp::kOk;
      break;
    }
    if (cycles >= timeout) {
      txn.resp = BusResp::kError;
      if (timed_out != nullptr) *timed_out = true;
      break;
    }
  }
  txn.complete_time = bus.clk->last_change();
  bus.req->drive(0);
  bus.we->drive(0);
  co_return txn;
}

sim::Task<> SrbSlavePort::run() {
  for (;;) {
    co_await bus_.clk->posedge();
    if (!bus_.rst_n->high()) {
      bus_.ack->drive(0);
      continue;
    }
    if (bus_.ack->high()) {
      bus_.ack->drive(0);
      bus_.err->drive(0);
      continue;
    }
    if (!bus_.req->high() || !responsive) continue;
    BusTxn request = bus_.we->high() ? BusTxn::write(static_cast<std::uint32_t>(bus_.addr->read()),
                                                     static_cast<std::uint32_t>(bus_.wdata->read()))
                                     : BusTxn::read(static_cast<std::uint32_t>(bus_.addr->read()));
    const BusTxn response = co_await handler_(request);
    bus_.ack->drive(1);
    bus_.rdata->drive(response.is_write() ? 0 : response.rdata);
    bus_.err->drive(response.ok() ? 0 : 1);
  }
}

sim::Task<> SrbDriver::run_phase() {
  auto& agent = dynamic_cast<tb::Agent&>(*parent());
  auto& sqr = dynamic_cast<SrbSequencer&>(*agent.sequencer_component());
  SrbIf bus = SrbIf::bind(kernel(), agent.interface_binding());
  for (;;) {
    BusTxn txn = co_await sqr.get_next_item();
    bool timed_out = false;
    BusTxn done = co_await srb_transfer(bus, txn, kSrbTimeoutCycles, &timed_out);
    if (timed_out) {
      fail("srb.timeout", fmt::format("no ack within {} cycles for {}", kSrbTimeoutCycles, txn.to_string()));
    }
    ++completed_;
    sqr.item_done(done);
  }
}

sim::Task<> SrbMonitor::run_phase() {
  auto& agent = dynamic_cast<tb::Agent&>(*parent());
  std::string binding = agent.interface_binding();
  if (binding.empty()) binding = config().get_as<std::string>(agent.path(), "vif").value_or("");
  SrbIf bus = SrbIf::bind(kernel(), binding);
  bool in_txn = false;
  BusTxn cur;
  sim::SimTime prev_edge{};
  for (;;) {
    co_await bus.clk->posedge();
    const sim::SimTime now = kernel().now();
    const bool req = bus.req->high();
    const bool ack = bus.ack->high();
    if (ack && !req) {
      fail("srb.protocol", fmt::format("ack without req at t={}", now.ticks()));
    }
    if (req && !in_txn) {
      in_txn = true;
      cur = bus.we->high() ? BusTxn::write(static_cast<std::uint32_t>(bus.addr->read()),
                                           static_cast<std::uint32_t>(bus.wdata->read()))
                           : BusTxn::read(static_cast<std::uint32_t>(bus.addr->read()));
      // The master asserted on the previous edge.
      cur.issue_time = prev_edge;
    }
    if (in_txn && req && ack) {
      if (!cur.is_write()) cur.rdata = static_cast<std::uint32_t>(bus.rdata->read());
      cur.resp = bus.err->high() ? BusResp::kError : BusResp::kOk;
      cur.complete_time = now;
      ++published_;
      ap.write(cur);
      in_txn = false;
    } else if (in_txn && !req) {
      in_txn = false;  // abandoned after a master timeout
    }
    prev_edge = now;
  }
}

sim::Task<BusTxn> SrbAdapter::execute(BusTxn request) { co_return co_await sequencer_.execute(request); }

}  // namespace vfab::uvc
