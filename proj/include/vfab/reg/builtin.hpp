#pragma once

#include <string>
#include <vector>

#include "vfab/reg/model.hpp"
#include "vfab/seq/rng.hpp"

namespace vfab::reg {

struct RegVerdict {
  std::string reg;
  bool passed = true;
  std::uint32_t failing_bits = 0;
  std::string detail;
};

struct BuiltinResult {
  std::string sequence;
  std::vector<RegVerdict> verdicts;
  std::size_t writes = 0;
  std::size_t reads = 0;

  bool passed() const;
  std::vector<std::string> failing_registers() const;
};

/// Registers visited by the built-ins: every register of `model` placed in
/// `map`, optionally limited to one block, in block then offset order.
std::vector<RegisterInstance*> builtin_targets(const RegisterModel& model, const AddressMap& map,
                                               std::string_view block = {});

/// Resets the model, reads every register and compares readable bits with
/// the reset value. One reg.builtin failure per differing register.
sim::Task<BuiltinResult> reset_check_seq(RegisterModel& model, AddressMap& map, std::string block = {});

/// Walks a 1 and then a 0 through every RW field bit, reading back after
/// each write (2 x width writes and reads per field).
sim::Task<BuiltinResult> bitbash_seq(RegisterModel& model, AddressMap& map, std::string block = {});

/// Writes a random value into the RW fields of each register and reads it
/// back.
sim::Task<BuiltinResult> write_read_all_seq(RegisterModel& model, AddressMap& map, seq::Rng& rng,
                                            std::string block = {});

}  // namespace vfab::reg
