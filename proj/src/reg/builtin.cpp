#include "vfab/reg/builtin.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace vfab::reg {

bool BuiltinResult::passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const RegVerdict& v) { return v.passed; });
}

std::vector<std::string> BuiltinResult::failing_registers() const {
  std::vector<std::string> out;
  for (const auto& v : verdicts) {
    if (!v.passed) out.push_back(v.reg);
  }
  return out;
}

std::vector<RegisterInstance*> builtin_targets(const RegisterModel& model, const AddressMap& map,
                                               std::string_view block) {
  std::vector<RegisterInstance*> out;
  for (const auto& b : model.blocks()) {
    if (!block.empty() && b->name() != block) continue;
    std::vector<RegisterInstance*> regs;
    for (const auto& r : b->registers()) {
      if (map.contains(*r)) regs.push_back(r.get());
    }
    std::stable_sort(regs.begin(), regs.end(), [](const RegisterInstance* a, const RegisterInstance* b2) {
      return a->def().offset < b2->def().offset;
    });
    out.insert(out.end(), regs.begin(), regs.end());
  }
  return out;
}

namespace {

void finish(RegisterModel& model, BuiltinResult& result, RegVerdict verdict) {
  if (!verdict.passed) {
    model.report(RegEvent{Severity::kError, "reg.builtin", verdict.reg,
                          fmt::format("{}: {} {}", result.sequence, verdict.reg, verdict.detail)});
  }
  result.verdicts.push_back(std::move(verdict));
}

// Writes `value`, reads back and returns the bits differing from `expected`
// under `mask`.
sim::Task<std::uint32_t> write_check(RegisterModel& model, RegisterInstance& reg, AddressMap& map,
                                     std::uint32_t value, std::uint32_t expected, std::uint32_t mask,
                                     BuiltinResult& result, std::uint32_t& observed) {
  co_await reg_write(model, reg, value, map);
  ++result.writes;
  // Mirror self-check stays silent here; the sequence reports per register.
  const ReadResult rd = co_await reg_read(model, reg, map, false);
  ++result.reads;
  observed = rd.value;
  if (!rd.bus_ok) co_return mask;
  co_return (rd.value ^ expected) & mask;
}

}  // namespace

sim::Task<BuiltinResult> reset_check_seq(RegisterModel& model, AddressMap& map, std::string block) {
  BuiltinResult result{"reset_check", {}, 0, 0};
  model.reset();
  for (RegisterInstance* listed : builtin_targets(model, map, block)) {
    RegisterInstance& reg = model.lookup(listed->full_name());
    const std::uint32_t expected = reg.def().reset_value();
    const std::uint32_t mask = reg.def().readable_mask();
    const ReadResult rd = co_await reg_read(model, reg, map, false);
    ++result.reads;
    RegVerdict v{reg.full_name(), true, 0, ""};
    v.failing_bits = rd.bus_ok ? ((rd.value ^ expected) & mask) : mask;
    if (v.failing_bits != 0) {
      v.passed = false;
      v.detail = rd.bus_ok ? fmt::format("reset value expected {:#010x} observed {:#010x}, bit(s) {}",
                                         expected & mask, rd.value & mask, bit_list(v.failing_bits))
                           : std::string("bus error");
    }
    finish(model, result, std::move(v));
  }
  co_return result;
}

sim::Task<BuiltinResult> bitbash_seq(RegisterModel& model, AddressMap& map, std::string block) {
  BuiltinResult result{"bitbash", {}, 0, 0};
  for (RegisterInstance* listed : builtin_targets(model, map, block)) {
    RegisterInstance& reg = model.lookup(listed->full_name());
    const std::uint32_t rw = reg.def().mask_of(Access::kRW);
    if (rw == 0) continue;
    RegVerdict v{reg.full_name(), true, 0, ""};
    std::uint32_t observed = 0;
    for (const FieldDef& f : reg.def().fields) {
      if (f.access != Access::kRW) continue;
      for (unsigned b = f.lsb; b < f.lsb + f.width; ++b) {
        const std::uint32_t one = std::uint32_t{1} << b;
        v.failing_bits |= co_await write_check(model, reg, map, one, one, one, result, observed);
      }
      for (unsigned b = f.lsb; b < f.lsb + f.width; ++b) {
        const std::uint32_t zero = f.mask() & ~(std::uint32_t{1} << b);
        v.failing_bits |= co_await write_check(model, reg, map, zero, zero, f.mask(), result, observed);
      }
    }
    if (v.failing_bits != 0) {
      v.passed = false;
      v.detail = fmt::format("bit(s) {} failed walking read-back", bit_list(v.failing_bits));
    }
    finish(model, result, std::move(v));
  }
  co_return result;
}

sim::Task<BuiltinResult> write_read_all_seq(RegisterModel& model, AddressMap& map, seq::Rng& rng,
                                            std::string block) {
  BuiltinResult result{"write_read_all", {}, 0, 0};
  for (RegisterInstance* listed : builtin_targets(model, map, block)) {
    RegisterInstance& reg = model.lookup(listed->full_name());
    const std::uint32_t rw = reg.def().mask_of(Access::kRW);
    if (rw == 0) continue;
    const auto value = static_cast<std::uint32_t>(rng.next_u64()) & rw;
    std::uint32_t observed = 0;
    RegVerdict v{reg.full_name(), true, 0, ""};
    v.failing_bits = co_await write_check(model, reg, map, value, value, rw, result, observed);
    if (v.failing_bits != 0) {
      v.passed = false;
      v.detail = fmt::format("wrote {:#010x} read {:#010x}, bit(s) {}", value, observed & rw,
                             bit_list(v.failing_bits));
    }
    finish(model, result, std::move(v));
  }
  co_return result;
}

}  // namespace vfab::reg
