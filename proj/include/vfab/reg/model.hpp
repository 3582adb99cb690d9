#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vfab/sim/sync.hpp"
#include "vfab/sim/task.hpp"
#include "vfab/uvc/bus_txn.hpp"

namespace vfab::reg {

enum class Access { kRW, kRO, kW1C, kWO };

std::string_view to_string(Access a);
/// Accepts the short names (RW, RO, W1C, WO), case-insensitive.
std::optional<Access> parse_access(std::string_view text);

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LookupError : public ModelError {
 public:
  using ModelError::ModelError;
};

inline constexpr unsigned kRegisterWidth = 32;

struct FieldDef {
  std::string name;
  unsigned lsb = 0;
  unsigned width = 1;
  Access access = Access::kRW;
  std::uint64_t reset = 0;

  std::uint32_t mask() const {
    const std::uint64_t bits = width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1;
    return static_cast<std::uint32_t>(bits << lsb);
  }
  bool operator==(const FieldDef&) const = default;
};

struct RegisterDef {
  std::string name;
  std::uint32_t offset = 0;
  std::vector<FieldDef> fields;

  /// Throws ModelError on overlapping or out-of-range fields.
  void validate() const;
  const FieldDef* field(std::string_view name) const;
  std::uint32_t mask_of(Access a) const;
  std::uint32_t defined_mask() const;
  std::uint32_t reset_value() const;
  /// Bits whose read value is predictable from writes (RW and W1C).
  std::uint32_t checked_mask() const { return mask_of(Access::kRW) | mask_of(Access::kW1C); }
  /// Bits that return meaningful data on read.
  std::uint32_t readable_mask() const { return defined_mask() & ~mask_of(Access::kWO); }
  bool operator==(const RegisterDef&) const = default;
};

struct BlockDef {
  std::string name;
  std::vector<RegisterDef> registers;

  void validate() const;
  bool operator==(const BlockDef&) const = default;
};

/// Register with its mirror. Mirror rules live here so that the frontdoor
/// path and passive prediction share them.
class RegisterInstance {
 public:
  RegisterInstance(const RegisterDef& def, std::string block);

  const RegisterDef& def() const { return def_; }
  const std::string& block() const { return block_; }
  /// "block.REG"
  const std::string& full_name() const { return full_name_; }
  std::uint32_t mirror() const { return mirror_; }
  bool known() const { return known_; }

  void reset();
  /// Mirror after a write of `value`.
  std::uint32_t written_mirror(std::uint32_t value) const;
  void predict_write(std::uint32_t value);
  /// Bits of `observed` disagreeing with the mirror on checked fields; zero
  /// while the mirror is unknown.
  std::uint32_t read_mismatch(std::uint32_t observed) const;
  /// Adopts the observed value (WO bits excluded) and marks the mirror known.
  void predict_read(std::uint32_t observed);
  /// Hardware-originated set of W1C/RO bits, e.g. an interrupt cause.
  void predict_hw_set(std::uint32_t bits);
  void set_mirror(std::uint32_t value);

 private:
  RegisterDef def_;
  std::string block_;
  std::string full_name_;
  std::uint32_t mirror_ = 0;
  bool known_ = false;
};

class RegisterBlock {
 public:
  explicit RegisterBlock(BlockDef def);
  const BlockDef& def() const { return def_; }
  const std::string& name() const { return def_.name; }
  RegisterInstance* find(std::string_view reg) const;
  const std::vector<std::unique_ptr<RegisterInstance>>& registers() const { return regs_; }

 private:
  BlockDef def_;
  std::vector<std::unique_ptr<RegisterInstance>> regs_;
};

enum class Severity { kInfo, kWarning, kError };

struct RegEvent {
  Severity severity = Severity::kError;
  std::string kind;      // reg.mismatch, reg.bus_error, reg.unmapped, reg.ro_write, reg.builtin
  std::string reg;       // full name, empty when unmapped
  std::string message;
};

/// Named collection of blocks. Blocks are shared pointers so that an IP
/// environment and an enclosing environment can observe one mirror.
class RegisterModel {
 public:
  explicit RegisterModel(std::string name = "model");

  const std::string& name() const { return name_; }
  RegisterBlock& add_block(BlockDef def);
  void add_block(std::shared_ptr<RegisterBlock> block);
  std::shared_ptr<RegisterBlock> block(std::string_view name) const;
  const std::vector<std::shared_ptr<RegisterBlock>>& blocks() const { return blocks_; }

  /// "block.REG"; throws LookupError listing near matches.
  RegisterInstance& lookup(std::string_view dot_path) const;
  RegisterInstance* try_lookup(std::string_view dot_path) const;
  /// "block.REG.FIELD"
  std::pair<RegisterInstance*, const FieldDef*> lookup_field(std::string_view dot_path) const;
  std::vector<RegisterInstance*> registers() const;

  void reset();

  using Reporter = std::function<void(const RegEvent&)>;
  void set_reporter(Reporter r) { reporter_ = std::move(r); }
  void report(RegEvent ev);
  const std::vector<RegEvent>& events() const { return events_; }
  std::size_t error_count() const;

 private:
  std::string name_;
  std::vector<std::shared_ptr<RegisterBlock>> blocks_;
  Reporter reporter_;
  std::vector<RegEvent> events_;
};

/// Converts register operations into bus transactions on one bus agent.
class BusAdapter {
 public:
  virtual ~BusAdapter() = default;
  virtual sim::Task<uvc::BusTxn> execute(uvc::BusTxn request) = 0;
};

/// Places blocks at absolute addresses; child maps nest at sub-bases.
class AddressMap {
 public:
  AddressMap(std::string name, std::uint64_t base);
  AddressMap(const AddressMap&) = delete;
  AddressMap& operator=(const AddressMap&) = delete;

  const std::string& name() const { return name_; }
  std::uint64_t base() const { return base_; }

  void add_block(RegisterBlock& block, std::uint64_t offset);
  AddressMap& add_submap(std::string name, std::uint64_t offset);

  /// Throws LookupError when `reg` is not placed in this map (or a child).
  std::uint64_t address_of(const RegisterInstance& reg) const;
  bool contains(const RegisterInstance& reg) const { return addr_of_.count(&reg) != 0; }
  RegisterInstance* resolve(std::uint64_t addr) const;
  /// (absolute address, register) in address order.
  std::vector<std::pair<std::uint64_t, RegisterInstance*>> registers() const;

  void bind(BusAdapter& adapter, sim::Kernel& kernel);
  BusAdapter* adapter() const { return adapter_; }
  sim::Mutex* lock() const { return lock_.get(); }

  /// Frontdoor operations update the mirror themselves. Off when a passive
  /// predictor owns the mirrors.
  bool auto_predict = true;

 private:
  void place(std::uint64_t abs, RegisterInstance& reg);

  std::string name_;
  std::uint64_t base_;
  AddressMap* parent_ = nullptr;
  std::vector<std::unique_ptr<AddressMap>> children_;
  std::map<std::uint64_t, RegisterInstance*> by_addr_;
  std::map<const RegisterInstance*, std::uint64_t> addr_of_;
  BusAdapter* adapter_ = nullptr;
  std::unique_ptr<sim::Mutex> lock_;
};

struct ReadResult {
  std::uint32_t value = 0;
  std::uint32_t mismatch = 0;
  bool bus_ok = true;
};

/// Frontdoor write. Reports reg.bus_error on an error response.
sim::Task<bool> reg_write(RegisterModel& model, RegisterInstance& reg, std::uint32_t value,
                          AddressMap& map);
/// Frontdoor read with mirror self-check (reports reg.mismatch). Callers
/// doing their own comparison pass `self_check = false`.
sim::Task<ReadResult> reg_read(RegisterModel& model, RegisterInstance& reg, AddressMap& map,
                               bool self_check = true);

/// Applies a monitored transaction to the mirrors of `map`. Reads are
/// self-checked; unresolved addresses yield a reg.unmapped event.
void predict(RegisterModel& model, AddressMap& map, const uvc::BusTxn& txn);

/// Lists the set bits of `mask`, e.g. "0, 3, 7".
std::string bit_list(std::uint32_t mask);

}  // namespace vfab::reg
