#include "vfab/reg/model.hpp"

#include <algorithm>
#include <cctype>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace vfab::reg {

std::string_view to_string(Access a) {
  switch (a) {
    case Access::kRW:
      return "RW";
    case Access::kRO:
      return "RO";
    case Access::kW1C:
      return "W1C";
    case Access::kWO:
      return "WO";
  }
  return "?";
}

std::optional<Access> parse_access(std::string_view text) {
  std::string up;
  for (char c : text) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (up == "RW") return Access::kRW;
  if (up == "RO") return Access::kRO;
  if (up == "W1C") return Access::kW1C;
  if (up == "WO") return Access::kWO;
  return std::nullopt;
}

std::string bit_list(std::uint32_t mask) {
  std::vector<unsigned> bits;
  for (unsigned b = 0; b < 32; ++b) {
    if ((mask >> b) & 1U) bits.push_back(b);
  }
  return fmt::format("{}", fmt::join(bits, ", "));
}

// ------------------------------------------------------------ definitions

void RegisterDef::validate() const {
  if (offset % 4 != 0) {
    throw ModelError(fmt::format("register {}: offset {:#x} is not 4-byte aligned", name, offset));
  }
  std::uint32_t used = 0;
  for (const auto& f : fields) {
    if (f.width < 1 || f.lsb + f.width > kRegisterWidth) {
      throw ModelError(fmt::format("register {}: field {} bits [{}:{}] exceed bit 31", name, f.name,
                                   f.lsb + f.width - 1, f.lsb));
    }
    if (f.width < 64 && f.reset >= (std::uint64_t{1} << f.width)) {
      throw ModelError(fmt::format("register {}: field {} reset {:#x} does not fit {} bits", name,
                                   f.name, f.reset, f.width));
    }
    if ((used & f.mask()) != 0) {
      throw ModelError(fmt::format("register {}: field {} overlaps another field", name, f.name));
    }
    used |= f.mask();
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    for (std::size_t j = i + 1; j < fields.size(); ++j) {
      if (fields[i].name == fields[j].name) {
        throw ModelError(fmt::format("register {}: duplicate field {}", name, fields[i].name));
      }
    }
  }
}

const FieldDef* RegisterDef::field(std::string_view n) const {
  for (const auto& f : fields) {
    if (f.name == n) return &f;
  }
  return nullptr;
}

std::uint32_t RegisterDef::mask_of(Access a) const {
  std::uint32_t m = 0;
  for (const auto& f : fields) {
    if (f.access == a) m |= f.mask();
  }
  return m;
}

std::uint32_t RegisterDef::defined_mask() const {
  std::uint32_t m = 0;
  for (const auto& f : fields) m |= f.mask();
  return m;
}

std::uint32_t RegisterDef::reset_value() const {
  std::uint32_t v = 0;
  for (const auto& f : fields) v |= static_cast<std::uint32_t>(f.reset << f.lsb);
  return v;
}

void BlockDef::validate() const {
  for (std::size_t i = 0; i < registers.size(); ++i) {
    registers[i].validate();
    for (std::size_t j = i + 1; j < registers.size(); ++j) {
      if (registers[i].name == registers[j].name) {
        throw ModelError(fmt::format("block {}: duplicate register {}", name, registers[i].name));
      }
      if (registers[i].offset == registers[j].offset) {
        throw ModelError(fmt::format("block {}: registers {} and {} share offset {:#x}", name,
                                     registers[i].name, registers[j].name, registers[i].offset));
      }
    }
  }
}

// ----------------------------------------------------------------- mirror

RegisterInstance::RegisterInstance(const RegisterDef& def, std::string block)
    : def_(def), block_(std::move(block)), full_name_(block_ + "." + def_.name) {}

void RegisterInstance::reset() {
  mirror_ = def_.reset_value();
  known_ = true;
}

std::uint32_t RegisterInstance::written_mirror(std::uint32_t value) const {
  std::uint32_t m = known_ ? mirror_ : def_.reset_value();
  for (const auto& f : def_.fields) {
    const std::uint32_t fm = f.mask();
    switch (f.access) {
      case Access::kRW:
      case Access::kWO:
        m = (m & ~fm) | (value & fm);
        break;
      case Access::kW1C:
        m &= ~(value & fm);
        break;
      case Access::kRO:
        break;
    }
  }
  return m & def_.defined_mask();
}

void RegisterInstance::predict_write(std::uint32_t value) {
  mirror_ = written_mirror(value);
  known_ = true;
}

std::uint32_t RegisterInstance::read_mismatch(std::uint32_t observed) const {
  if (!known_) return 0;
  return (observed ^ mirror_) & def_.checked_mask();
}

void RegisterInstance::predict_read(std::uint32_t observed) {
  const std::uint32_t wo = def_.mask_of(Access::kWO);
  const std::uint32_t keep = known_ ? (mirror_ & wo) : 0;
  mirror_ = (observed & def_.readable_mask()) | keep;
  known_ = true;
}

void RegisterInstance::predict_hw_set(std::uint32_t bits) {
  const std::uint32_t settable = def_.mask_of(Access::kW1C) | def_.mask_of(Access::kRO);
  if (!known_) reset();
  mirror_ |= bits & settable;
}

void RegisterInstance::set_mirror(std::uint32_t value) {
  mirror_ = value & def_.defined_mask();
  known_ = true;
}

RegisterBlock::RegisterBlock(BlockDef def) : def_(std::move(def)) {
  def_.validate();
  for (const auto& r : def_.registers) regs_.push_back(std::make_unique<RegisterInstance>(r, def_.name));
}

RegisterInstance* RegisterBlock::find(std::string_view reg) const {
  for (const auto& r : regs_) {
    if (r->def().name == reg) return r.get();
  }
  return nullptr;
}

// ------------------------------------------------------------------ model

RegisterModel::RegisterModel(std::string name) : name_(std::move(name)) {}

RegisterBlock& RegisterModel::add_block(BlockDef def) {
  auto block = std::make_shared<RegisterBlock>(std::move(def));
  add_block(block);
  return *block;
}

void RegisterModel::add_block(std::shared_ptr<RegisterBlock> block) {
  if (this->block(block->name())) {
    throw ModelError(fmt::format("model {}: duplicate block {}", name_, block->name()));
  }
  blocks_.push_back(std::move(block));
}

std::shared_ptr<RegisterBlock> RegisterModel::block(std::string_view name) const {
  for (const auto& b : blocks_) {
    if (b->name() == name) return b;
  }
  return nullptr;
}

namespace {

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

RegisterInstance* RegisterModel::try_lookup(std::string_view dot_path) const {
  const auto dot = dot_path.find('.');
  if (dot == std::string_view::npos) return nullptr;
  auto b = block(dot_path.substr(0, dot));
  if (!b) return nullptr;
  return b->find(dot_path.substr(dot + 1));
}

RegisterInstance& RegisterModel::lookup(std::string_view dot_path) const {
  if (auto* r = try_lookup(dot_path)) return *r;
  std::vector<std::pair<std::size_t, std::string>> near;
  for (auto* r : registers()) {
    const std::size_t d = edit_distance(dot_path, r->full_name());
    if (d <= 3) near.emplace_back(d, r->full_name());
  }
  std::sort(near.begin(), near.end());
  std::vector<std::string> names;
  for (const auto& [d, n] : near) names.push_back(n);
  if (names.empty()) throw LookupError(fmt::format("unknown register {}", dot_path));
  throw LookupError(fmt::format("unknown register {} (did you mean {}?)", dot_path, fmt::join(names, ", ")));
}

std::pair<RegisterInstance*, const FieldDef*> RegisterModel::lookup_field(std::string_view dot_path) const {
  const auto dot = dot_path.rfind('.');
  if (dot == std::string_view::npos) return {nullptr, nullptr};
  auto* r = try_lookup(dot_path.substr(0, dot));
  if (r == nullptr) return {nullptr, nullptr};
  return {r, r->def().field(dot_path.substr(dot + 1))};
}

std::vector<RegisterInstance*> RegisterModel::registers() const {
  std::vector<RegisterInstance*> out;
  for (const auto& b : blocks_) {
    for (const auto& r : b->registers()) out.push_back(r.get());
  }
  return out;
}

void RegisterModel::reset() {
  for (auto* r : registers()) r->reset();
}

void RegisterModel::report(RegEvent ev) {
  events_.push_back(ev);
  if (reporter_) reporter_(events_.back());
}

std::size_t RegisterModel::error_count() const {
  return static_cast<std::size_t>(std::count_if(
      events_.begin(), events_.end(), [](const RegEvent& e) { return e.severity == Severity::kError; }));
}

// -------------------------------------------------------------------- map

AddressMap::AddressMap(std::string name, std::uint64_t base) : name_(std::move(name)), base_(base) {}

void AddressMap::place(std::uint64_t abs, RegisterInstance& reg) {
  if (auto it = by_addr_.find(abs); it != by_addr_.end()) {
    throw ModelError(fmt::format("map {}: {} and {} both at {:#x}", name_, it->second->full_name(),
                                 reg.full_name(), abs));
  }
  if (addr_of_.count(&reg) != 0) {
    throw ModelError(fmt::format("map {}: {} placed twice", name_, reg.full_name()));
  }
  by_addr_[abs] = &reg;
  addr_of_[&reg] = abs;
  if (parent_ != nullptr) parent_->place(abs, reg);
}

void AddressMap::add_block(RegisterBlock& block, std::uint64_t offset) {
  for (const auto& r : block.registers()) place(base_ + offset + r->def().offset, *r);
}

AddressMap& AddressMap::add_submap(std::string name, std::uint64_t offset) {
  auto child = std::make_unique<AddressMap>(std::move(name), base_ + offset);
  child->parent_ = this;
  children_.push_back(std::move(child));
  return *children_.back();
}

std::uint64_t AddressMap::address_of(const RegisterInstance& reg) const {
  auto it = addr_of_.find(&reg);
  if (it == addr_of_.end()) {
    throw LookupError(fmt::format("register {} is not placed in map {}", reg.full_name(), name_));
  }
  return it->second;
}

RegisterInstance* AddressMap::resolve(std::uint64_t addr) const {
  auto it = by_addr_.find(addr);
  return it == by_addr_.end() ? nullptr : it->second;
}

std::vector<std::pair<std::uint64_t, RegisterInstance*>> AddressMap::registers() const {
  return {by_addr_.begin(), by_addr_.end()};
}

void AddressMap::bind(BusAdapter& adapter, sim::Kernel& kernel) {
  adapter_ = &adapter;
  lock_ = std::make_unique<sim::Mutex>(kernel);
}

// -------------------------------------------------------------- frontdoor

namespace {

AddressMap& require_adapter(AddressMap& map) {
  if (map.adapter() == nullptr) {
    throw ModelError(fmt::format("map {} has no bus adapter", map.name()));
  }
  return map;
}

sim::Task<uvc::BusTxn> serialized(AddressMap& map, uvc::BusTxn request) {
  co_await map.lock()->lock();
  uvc::BusTxn done;
  try {
    done = co_await map.adapter()->execute(request);
  } catch (...) {
    map.lock()->unlock();
    throw;
  }
  map.lock()->unlock();
  co_return done;
}

void report_mismatch(RegisterModel& model, const RegisterInstance& reg, std::uint32_t expected,
                     std::uint32_t observed, std::uint32_t bits, std::string_view via) {
  model.report(RegEvent{Severity::kError, "reg.mismatch", reg.full_name(),
                        fmt::format("{}{}: expected {:#010x} observed {:#010x}, bit(s) {}", reg.full_name(),
                                    via, expected, observed, bit_list(bits))});
}

}  // namespace

sim::Task<bool> reg_write(RegisterModel& model, RegisterInstance& reg, std::uint32_t value, AddressMap& map) {
  require_adapter(map);
  const auto addr = static_cast<std::uint32_t>(map.address_of(reg));
  if (reg.def().mask_of(Access::kRO) == reg.def().defined_mask() && reg.def().defined_mask() != 0) {
    model.report(RegEvent{Severity::kWarning, "reg.ro_write", reg.full_name(),
                          fmt::format("write to read-only register {}", reg.full_name())});
  }
  const uvc::BusTxn done = co_await serialized(map, uvc::BusTxn::write(addr, value));
  if (!done.ok()) {
    model.report(RegEvent{Severity::kError, "reg.bus_error", reg.full_name(),
                          fmt::format("write {} = {:#x} at {:#010x}: bus error", reg.full_name(), value, addr)});
    co_return false;
  }
  if (map.auto_predict) reg.predict_write(value);
  co_return true;
}

sim::Task<ReadResult> reg_read(RegisterModel& model, RegisterInstance& reg, AddressMap& map,
                               bool self_check) {
  require_adapter(map);
  const auto addr = static_cast<std::uint32_t>(map.address_of(reg));
  const uvc::BusTxn done = co_await serialized(map, uvc::BusTxn::read(addr));
  ReadResult result;
  result.value = done.rdata;
  if (!done.ok()) {
    model.report(RegEvent{Severity::kError, "reg.bus_error", reg.full_name(),
                          fmt::format("read {} at {:#010x}: bus error", reg.full_name(), addr)});
    result.bus_ok = false;
    co_return result;
  }
  result.mismatch = reg.read_mismatch(done.rdata);
  if (map.auto_predict) {
    if (self_check && result.mismatch != 0) report_mismatch(model, reg, reg.mirror(), done.rdata, result.mismatch, "");
    reg.predict_read(done.rdata);
  }
  co_return result;
}

void predict(RegisterModel& model, AddressMap& map, const uvc::BusTxn& txn) {
  RegisterInstance* reg = map.resolve(txn.addr);
  if (reg == nullptr) {
    model.report(RegEvent{Severity::kInfo, "reg.unmapped", "",
                          fmt::format("unmapped access {} in map {}", txn.to_string(), map.name())});
    return;
  }
  if (!txn.ok()) return;
  if (txn.is_write()) {
    reg->predict_write(txn.wdata);
    return;
  }
  if (const std::uint32_t bits = reg->read_mismatch(txn.rdata); bits != 0) {
    report_mismatch(model, *reg, reg->mirror(), txn.rdata, bits, " (passive)");
  }
  reg->predict_read(txn.rdata);
}

}  // namespace vfab::reg
