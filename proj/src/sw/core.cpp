#include "vfab/sw/core.hpp"

#include <fmt/format.h>

namespace vfab::sw {

CoreModel::CoreModel(std::string name, tb::Component* parent, reg::RegisterModel& model, reg::AddressMap& map,
                     CoreBinding binding, const VriCommandTable* commands)
    : tb::Component(std::move(name), parent, tb::ComponentKind::kCustom),
      model_(model),
      map_(map),
      binding_(std::move(binding)),
      commands_(commands),
      bus_lock_(kernel()),
      jobs_(kernel()) {}

uvc::SrbIf& CoreModel::bus() {
  if (!bus_) bus_ = uvc::SrbIf::bind(kernel(), binding_.bus);
  return *bus_;
}

std::int64_t CoreModel::variable(const std::string& name, std::int64_t fallback) const {
  const auto it = vars_.find(name);
  return it == vars_.end() ? fallback : it->second;
}

sim::Task<ProgramResult> CoreModel::execute(TestProgram program) {
  auto result = std::make_shared<std::optional<ProgramResult>>();
  auto done = std::make_shared<sim::Notifier>(kernel());
  jobs_.put(Job{std::move(program), result, done});
  while (!*result) co_await done->wait();
  co_return std::move(**result);
}

sim::Task<uvc::BusTxn> CoreModel::bus_access(uvc::BusTxn txn) {
  co_await bus_lock_.lock();
  bool timed_out = false;
  uvc::BusTxn done = co_await uvc::srb_transfer(bus(), txn, uvc::kSrbTimeoutCycles, &timed_out);
  bus_lock_.unlock();
  co_return done;
}

sim::Task<> CoreModel::run_phase() {
  for (;;) {
    Job job = co_await jobs_.get();
    ProgramResult r = co_await interpret(job.program);
    ++programs_;
    if (!r.ok) fail(r.kind, fmt::format("program {}: {}", job.program.name, r.message));
    *job.result = std::move(r);
    job.done->notify();
  }
}

std::int64_t CoreModel::value(const std::string& token, const ArgSpec* spec, int line) const {
  if (auto v = parse_int(token)) return *v;
  if (token.size() > 1 && token[0] == '$') {
    const auto it = vars_.find(token.substr(1));
    if (it == vars_.end()) throw ProgramError(fmt::format("line {}: undefined variable {}", line, token), line);
    return it->second;
  }
  if (spec != nullptr) {
    const auto it = spec->symbols.find(token);
    if (it != spec->symbols.end()) return it->second;
  }
  throw ProgramError(fmt::format("line {}: cannot evaluate '{}'", line, token), line);
}

namespace {

std::string where(const Statement& st) {
  return st.line > 0 ? fmt::format("line {} ({})", st.line, st.to_string()) : st.to_string();
}

}  // namespace

sim::Task<ProgramResult> CoreModel::interpret(const TestProgram& program) {
  ProgramResult res;
  for (const Statement& st : program.body) {
    auto abort = [&](std::string kind, std::string msg) {
      res.ok = false;
      res.kind = std::move(kind);
      res.message = fmt::format("{}: {}", where(st), msg);
    };
    try {
      switch (st.op) {
        case Statement::Op::kWrite: {
          const auto v = static_cast<std::uint32_t>(value(st.args.at(0), nullptr, st.line));
          if (st.address) {
            const uvc::BusTxn t = co_await bus_access(uvc::BusTxn::write(*st.address, v));
            if (!t.ok()) abort("sw.bus_error", "bus error");
          } else {
            reg::RegisterInstance& reg = model_.lookup(st.target);
            if (!co_await reg::reg_write(model_, reg, v, map_)) abort("sw.bus_error", "bus error");
          }
          break;
        }
        case Statement::Op::kRead: {
          std::uint32_t got = 0;
          bool ok = true;
          if (st.address) {
            const uvc::BusTxn t = co_await bus_access(uvc::BusTxn::read(*st.address));
            ok = t.ok();
            got = t.rdata;
          } else {
            reg::RegisterInstance& reg = model_.lookup(st.target);
            const reg::ReadResult rd = co_await reg::reg_read(model_, reg, map_);
            ok = rd.bus_ok;
            got = rd.value;
          }
          if (!ok) {
            abort("sw.bus_error", "bus error");
          } else {
            res.reads.push_back(got);
            vars_["rd"] = got;
          }
          break;
        }
        case Statement::Op::kIrqWait: {
          const auto line = value(st.args.at(0), nullptr, st.line);
          const auto timeout = value(st.args.at(1), nullptr, st.line);
          if (line < 0 || static_cast<std::size_t>(line) >= binding_.irq_lines.size()) {
            throw ProgramError(fmt::format("no interrupt line {}", line), st.line);
          }
          sim::Signal& irq = kernel().signal(binding_.irq_lines[static_cast<std::size_t>(line)]);
          std::int64_t waited = 0;
          while (!irq.high()) {
            if (waited >= timeout) {
              abort("sw.irq_timeout", fmt::format("interrupt line {} not raised within {} cycles", line, timeout));
              break;
            }
            co_await bus().clk->posedge();
            ++waited;
          }
          break;
        }
        case Statement::Op::kVri: {
          const VriCommand* cmd = commands_ != nullptr ? commands_->find(st.target) : nullptr;
          std::uint32_t id = 0;
          if (cmd != nullptr) {
            id = cmd->id;
          } else if (auto v = parse_int(st.target)) {
            id = static_cast<std::uint32_t>(*v);
            if (commands_ != nullptr) cmd = commands_->find(id);
          } else {
            throw ProgramError(fmt::format("unknown VRI command {}", st.target), st.line);
          }
          std::vector<std::uint32_t> args;
          for (std::size_t i = 0; i < st.args.size(); ++i) {
            const ArgSpec* spec = cmd != nullptr && i < cmd->schema.size() ? &cmd->schema[i] : nullptr;
            args.push_back(static_cast<std::uint32_t>(value(st.args[i], spec, st.line)));
          }
          co_await vri_call(id, std::move(args), res);
          if (!res.ok) res.message = fmt::format("{}: {}", where(st), res.message);
          break;
        }
        case Statement::Op::kSet:
          vars_[st.target] = value(st.args.at(0), nullptr, st.line);
          break;
      }
    } catch (const ProgramError& e) {
      abort("sw.program", e.what());
    } catch (const reg::LookupError& e) {
      abort("sw.program", e.what());
    }
    if (!res.ok) break;
    ++res.executed;
  }
  co_return res;
}

sim::Task<> CoreModel::vri_call(std::uint32_t cmd, std::vector<std::uint32_t> args, ProgramResult& res) {
  const std::uint32_t base = binding_.vri_base;
  auto bus_failed = [&](const uvc::BusTxn& t) {
    if (t.ok()) return false;
    res.ok = false;
    res.kind = "sw.bus_error";
    res.message = fmt::format("bus error on mailbox access {}", t.to_string());
    return true;
  };
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto t = co_await bus_access(uvc::BusTxn::write(base + vri::kArg0 + 4 * static_cast<std::uint32_t>(i), args[i]));
    if (bus_failed(t)) co_return;
  }
  if (bus_failed(co_await bus_access(uvc::BusTxn::write(base + vri::kCmd, cmd)))) co_return;
  if (bus_failed(co_await bus_access(uvc::BusTxn::write(base + vri::kDoorbell, 1)))) co_return;
  std::uint32_t status = 0;
  for (;;) {
    for (unsigned c = 0; c < vri::kPollCycles; ++c) co_await bus().clk->posedge();
    const auto t = co_await bus_access(uvc::BusTxn::read(base + vri::kStatus));
    if (bus_failed(t)) co_return;
    status = t.rdata;
    if (status == static_cast<std::uint32_t>(vri::Status::kDone) ||
        status == static_cast<std::uint32_t>(vri::Status::kError)) {
      break;
    }
  }
  const auto r = co_await bus_access(uvc::BusTxn::read(base + vri::kRet));
  if (bus_failed(r)) co_return;
  res.ret = r.rdata;
  vars_["ret"] = r.rdata;
  if (status == static_cast<std::uint32_t>(vri::Status::kError)) {
    res.ok = false;
    res.kind = "sw.vri_error";
    res.message = fmt::format("VRI command {:#x} returned STATUS=error", cmd);
  }
}

}  // namespace vfab::sw
