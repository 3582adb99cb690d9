#include "vfab/sw/vri.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace vfab::sw {

namespace vri {

std::string_view to_string(Status s) {
  switch (s) {
    case Status::kIdle: return "idle";
    case Status::kBusy: return "busy";
    case Status::kDone: return "done";
    case Status::kError: return "error";
  }
  return "?";
}

bool allowed(Status from, Status to) {
  if (from == to) return true;
  switch (from) {
    case Status::kIdle: return to == Status::kBusy;
    case Status::kBusy: return to == Status::kDone || to == Status::kError;
    case Status::kDone:
    case Status::kError: return to == Status::kIdle;
  }
  return false;
}

}  // namespace vri

uvc::BusTxn VriMailbox::access(uvc::BusTxn txn) {
  const std::uint32_t off = txn.addr & 0xFFFU;
  const bool defined = off <= vri::kArg0 + 4 * (vri::kArgCount - 1) && off % 4 == 0;
  if (!defined) {
    txn.resp = uvc::BusResp::kError;
    return txn;
  }
  if (txn.is_write()) {
    write(off, txn.wdata);
  } else {
    txn.rdata = read(off);
  }
  txn.resp = uvc::BusResp::kOk;
  return txn;
}

std::uint32_t VriMailbox::read(std::uint32_t offset) {
  switch (offset) {
    case vri::kDoorbell: return 0;
    case vri::kCmd: return cmd_;
    case vri::kStatus: return static_cast<std::uint32_t>(status_);
    case vri::kRet:
      if ((status_ == vri::Status::kDone || status_ == vri::Status::kError) && !outstanding()) {
        status_ = vri::Status::kIdle;
      }
      return ret_;
    default: break;
  }
  if (offset >= vri::kArg0 && offset < vri::kArg0 + 4 * vri::kArgCount) return args_[(offset - vri::kArg0) / 4];
  return 0;
}

void VriMailbox::write(std::uint32_t offset, std::uint32_t value) {
  if (offset == vri::kDoorbell) {
    if ((value & 1U) == 0) return;
    if (status_ == vri::Status::kIdle && !outstanding()) {
      latched_ = VriRequest{cmd_, args_};
      status_ = vri::Status::kBusy;
      pending_ = true;
      if (on_doorbell_) on_doorbell_();
    } else {
      if (status_ == vri::Status::kBusy) status_ = vri::Status::kError;
      ++rejected_;
    }
    return;
  }
  if (offset == vri::kCmd) {
    cmd_ = value;
  } else if (offset >= vri::kArg0 && offset < vri::kArg0 + 4 * vri::kArgCount) {
    args_[(offset - vri::kArg0) / 4] = value;
  }
}

std::optional<VriRequest> VriMailbox::take() {
  if (!pending_) return std::nullopt;
  pending_ = false;
  running_ = true;
  return latched_;
}

void VriMailbox::complete(bool ok, std::uint32_t ret) {
  if (!running_) return;
  running_ = false;
  ret_ = ret;
  if (status_ == vri::Status::kBusy) status_ = ok ? vri::Status::kDone : vri::Status::kError;
}

reg::BlockDef vri_block_def() {
  using reg::Access;
  using reg::FieldDef;
  reg::BlockDef b;
  b.name = "vri";
  b.registers.push_back({"DOORBELL", vri::kDoorbell, {FieldDef{"RING", 0, 1, Access::kWO, 0}}});
  b.registers.push_back({"CMD", vri::kCmd, {FieldDef{"CMD", 0, 32, Access::kRW, 0}}});
  b.registers.push_back({"STATUS", vri::kStatus, {FieldDef{"STATE", 0, 2, Access::kRO, 0}}});
  b.registers.push_back({"RET", vri::kRet, {FieldDef{"RET", 0, 32, Access::kRO, 0}}});
  for (unsigned i = 0; i < vri::kArgCount; ++i) {
    b.registers.push_back({fmt::format("ARG{}", i), vri::kArg0 + 4 * i,
                           {FieldDef{fmt::format("ARG{}", i), 0, 32, Access::kRW, 0}}});
  }
  return b;
}

void VriCommandTable::register_handler(VriCommand cmd) {
  if (find(cmd.id) != nullptr) throw VriError(fmt::format("VRI command id {:#x} already registered", cmd.id));
  if (find(cmd.name) != nullptr) throw VriError(fmt::format("VRI command {} already registered", cmd.name));
  if (cmd.schema.size() > vri::kArgCount) {
    throw VriError(fmt::format("VRI command {} has {} arguments, at most {}", cmd.name, cmd.schema.size(),
                               vri::kArgCount));
  }
  for (const auto& a : cmd.schema) {
    if (a.lo > a.hi) throw VriError(fmt::format("VRI command {}: argument {} has an empty range", cmd.name, a.name));
  }
  if (!cmd.factory) throw VriError(fmt::format("VRI command {} has no sequence factory", cmd.name));
  commands_.push_back(std::move(cmd));
}

const VriCommand* VriCommandTable::find(std::uint32_t id) const {
  for (const auto& c : commands_) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

const VriCommand* VriCommandTable::find(std::string_view name) const {
  for (const auto& c : commands_) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::optional<std::string> VriCommandTable::decode(const VriRequest& req, std::vector<std::int64_t>& out) const {
  out.clear();
  const VriCommand* cmd = find(req.cmd);
  if (cmd == nullptr) return fmt::format("unknown command {:#x}", req.cmd);
  for (std::size_t i = 0; i < cmd->schema.size(); ++i) {
    const ArgSpec& a = cmd->schema[i];
    const std::int64_t v = a.lo < 0 ? std::int64_t{static_cast<std::int32_t>(req.args[i])}
                                    : std::int64_t{req.args[i]};
    if (v < a.lo || v > a.hi) {
      return fmt::format("{}: argument {} = {} outside [{}..{}]", cmd->name, a.name, v, a.lo, a.hi);
    }
    out.push_back(v);
  }
  return std::nullopt;
}

VriUvc::VriUvc(std::string name, tb::Component* parent, VriMailbox& mailbox, const VriCommandTable& table,
               const tb::Component& sequence_root)
    : tb::Component(std::move(name), parent, tb::ComponentKind::kCustom),
      mailbox_(mailbox),
      table_(table),
      root_(sequence_root),
      doorbell_(kernel()) {
  mailbox_.set_on_doorbell([this] { doorbell_.notify(); });
}

sim::Task<> VriUvc::run_phase() {
  seed_ = static_cast<std::uint64_t>(config().get_as<std::int64_t>(path(), "seed").value_or(1));
  for (;;) {
    auto req = mailbox_.take();
    if (!req) {
      co_await doorbell_.wait();
      continue;
    }
    Dispatch d;
    d.cmd = req->cmd;
    if (auto err = table_.decode(*req, d.args)) {
      d.message = *err;
      mailbox_.complete(false, 0);
      log_.push_back(std::move(d));
      continue;
    }
    log_.push_back(std::move(d));
    kernel().spawn(serve(log_.size() - 1, table_.find(req->cmd)), fmt::format("{}.cmd{}", path(), log_.size() - 1));
  }
}

sim::Task<> VriUvc::serve(std::size_t slot, const VriCommand* cmd) {
  bool ok = true;
  std::uint32_t ret = 0;
  std::string message;
  try {
    auto seq = cmd->factory(log_[slot].args);
    seq::SequencerBase& sqr = seq::resolve_sequencer(root_, cmd->sequencer_path);
    co_await seq::run_sequence(*seq, sqr, seq::Rng(seed_, fmt::format("{}.cmd{}", path(), slot)));
    ret = seq->ret;
  } catch (const std::exception& e) {
    ok = false;
    message = e.what();
  }
  log_[slot].ok = ok;
  log_[slot].ret = ret;
  log_[slot].message = message;
  mailbox_.complete(ok, ret);
}

sim::Task<uvc::BusTxn> mailbox_access(VriMailbox* mailbox, uvc::BusTxn txn) { co_return mailbox->access(txn); }

}  // namespace vfab::sw
