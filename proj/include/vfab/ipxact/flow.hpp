#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vfab/check/coverage.hpp"
#include "vfab/check/scoreboard.hpp"
#include "vfab/reg/model.hpp"

namespace vfab::ipxact {

/// Any input problem: malformed XML, unsupported construct, semantic error,
/// bad attribute map or corrupt bundle. `line` is 0 when unknown.
class FlowError : public std::runtime_error {
 public:
  explicit FlowError(const std::string& what, int line = 0) : std::runtime_error(what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct AddressBlockIR {
  std::string name;
  std::uint64_t base_offset = 0;
  std::uint64_t range = 0;
  std::vector<reg::RegisterDef> registers;  // sorted by offset, fields by lsb
  bool operator==(const AddressBlockIR&) const = default;
};

struct RegisterMapIR {
  std::string component;
  std::vector<AddressBlockIR> blocks;  // sorted by base offset
  bool operator==(const RegisterMapIR&) const = default;
};

struct ParseResult {
  RegisterMapIR ir;
  std::vector<std::string> warnings;
};

/// Reads the memoryMaps/memoryMap/addressBlock/register/field subset.
/// Namespace prefixes are dropped; unknown elements produce warnings.
ParseResult parse_ipxact(std::string_view xml);

struct AttrEntry {
  std::string path;  // block.REG or block.REG.FIELD
  std::string attribute;
  int line = 0;
  bool operator==(const AttrEntry&) const = default;
};
using AttrMap = std::vector<AttrEntry>;

/// `<dot-path> -> <attribute>` lines; `#` comments and blank lines skipped.
AttrMap parse_attr_map(std::string_view text);

struct CrossReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  bool ok() const { return errors.empty(); }
};

/// Every map path must resolve in the IR; IR fields feeding no attribute
/// are warnings.
CrossReport validate_cross(const RegisterMapIR& ir, const AttrMap& amap);

/// Coverpoint specs, one per RW field, in canonical order.
check::CovSkeleton make_skeleton(const RegisterMapIR& ir);
/// Bindings sorted by attribute name.
check::CheckerBinding make_binding(const AttrMap& amap);

inline constexpr std::string_view kBundleHeader = "vfab-bundle v1";

/// Canonical bundle text. Throws FlowError when validate_cross reports errors.
std::string emit_bundle(const RegisterMapIR& ir, const AttrMap& amap);

struct Bundle {
  RegisterMapIR ir;
  check::CovSkeleton covskel;
  check::CheckerBinding binding;
  std::vector<std::string> warnings;
};

Bundle load_bundle(std::string_view text);

/// Adds one register block per address block and places it in `map` at its
/// base offset.
void instantiate(const RegisterMapIR& ir, reg::RegisterModel& model, reg::AddressMap& map);

std::string read_file(const std::string& path);

}  // namespace vfab::ipxact
