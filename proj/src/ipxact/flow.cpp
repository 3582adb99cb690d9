#include "vfab/ipxact/flow.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <fmt/format.h>

namespace vfab::ipxact {

namespace pt = boost::property_tree;

namespace {

std::string_view local_name(std::string_view key) {
  const auto colon = key.rfind(':');
  return colon == std::string_view::npos ? key : key.substr(colon + 1);
}

std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

bool is_markup(std::string_view key) { return key == "<xmlattr>" || key == "<xmlcomment>"; }

std::uint64_t parse_number(const std::string& raw, const std::string& where) {
  const std::string text = trim(raw);
  const bool hex = text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X');
  const std::string digits = hex ? text.substr(2) : text;
  const bool ok = !digits.empty() && digits.size() <= (hex ? 16U : 19U) &&
                  std::all_of(digits.begin(), digits.end(), [hex](char c) {
                    return hex ? std::isxdigit(static_cast<unsigned char>(c)) != 0
                               : std::isdigit(static_cast<unsigned char>(c)) != 0;
                  });
  if (!ok) throw FlowError(fmt::format("{}: bad number '{}'", where, text));
  return std::stoull(digits, nullptr, hex ? 16 : 10);
}

/// Children with their prefix-free names, markup skipped.
std::vector<std::pair<std::string, const pt::ptree*>> elements(const pt::ptree& node) {
  std::vector<std::pair<std::string, const pt::ptree*>> out;
  for (const auto& [key, child] : node) {
    if (is_markup(key)) continue;
    out.emplace_back(std::string(local_name(key)), &child);
  }
  return out;
}

const pt::ptree* first(const pt::ptree& node, std::string_view name) {
  for (const auto& [key, child] : node) {
    if (!is_markup(key) && local_name(key) == name) return &child;
  }
  return nullptr;
}

std::string required_text(const pt::ptree& node, std::string_view name, const std::string& where) {
  const pt::ptree* c = first(node, name);
  if (c == nullptr) throw FlowError(fmt::format("{}: missing <{}>", where, name));
  const std::string v = trim(c->data());
  if (v.empty()) throw FlowError(fmt::format("{}: empty <{}>", where, name));
  return v;
}

struct Warner {
  std::vector<std::string>& out;
  void unknown(const std::set<std::string_view>& known, const pt::ptree& node, const std::string& where) {
    for (const auto& [name, child] : elements(node)) {
      if (known.count(name) == 0) out.push_back(fmt::format("{}: ignored element <{}>", where, name));
    }
  }
};

std::optional<reg::Access> map_access(const std::string& text, bool one_to_clear) {
  if (text == "read-write") return one_to_clear ? reg::Access::kW1C : reg::Access::kRW;
  if (text == "read-only") return reg::Access::kRO;
  if (text == "write-only") return reg::Access::kWO;
  return std::nullopt;
}

reg::RegisterDef parse_register(const pt::ptree& node, const std::string& block, Warner& warn) {
  reg::RegisterDef r;
  r.name = required_text(node, "name", fmt::format("register in block {}", block));
  const std::string where = fmt::format("register {}.{}", block, r.name);
  warn.unknown({"name", "displayName", "description", "addressOffset", "size", "access", "reset", "field",
                "volatile", "typeIdentifier"},
               node, where);
  const std::uint64_t offset = parse_number(required_text(node, "addressOffset", where), where + " addressOffset");
  if (offset > 0xFFFFFFFFULL) throw FlowError(fmt::format("{}: addressOffset {:#x} too large", where, offset));
  r.offset = static_cast<std::uint32_t>(offset);
  const std::uint64_t size = parse_number(required_text(node, "size", where), where + " size");
  if (size != 32) throw FlowError(fmt::format("{}: unsupported register width {} (only 32)", where, size));
  const std::string reg_access = first(node, "access") ? trim(first(node, "access")->data()) : "read-write";

  std::uint64_t reset = 0;
  if (const pt::ptree* rs = first(node, "reset")) {
    reset = parse_number(required_text(*rs, "value", where + " reset"), where + " reset");
    if (reset > 0xFFFFFFFFULL) throw FlowError(fmt::format("{}: reset {:#x} exceeds 32 bits", where, reset));
  }

  for (const auto& [name, child] : elements(node)) {
    if (name != "field") continue;
    reg::FieldDef f;
    f.name = required_text(*child, "name", where + " field");
    const std::string fwhere = fmt::format("field {}.{}.{}", block, r.name, f.name);
    warn.unknown({"name", "displayName", "description", "bitOffset", "bitWidth", "access", "modifiedWriteValue",
                  "volatile", "typeIdentifier", "resets"},
                 *child, fwhere);
    const std::uint64_t lsb = parse_number(required_text(*child, "bitOffset", fwhere), fwhere + " bitOffset");
    const std::uint64_t width = parse_number(required_text(*child, "bitWidth", fwhere), fwhere + " bitWidth");
    if (width == 0) throw FlowError(fmt::format("{}: bitWidth 0", fwhere));
    if (lsb + width > reg::kRegisterWidth) {
      throw FlowError(fmt::format("{}: bits [{}:{}] exceed bit 31", fwhere, lsb + width - 1, lsb));
    }
    f.lsb = static_cast<unsigned>(lsb);
    f.width = static_cast<unsigned>(width);
    const std::string acc = first(*child, "access") ? trim(first(*child, "access")->data()) : reg_access;
    const pt::ptree* mwv = first(*child, "modifiedWriteValue");
    const bool w1c = mwv != nullptr && trim(mwv->data()) == "oneToClear";
    const auto mapped = map_access(acc, w1c);
    if (!mapped) throw FlowError(fmt::format("{}: unsupported access '{}'", fwhere, acc));
    f.access = *mapped;
    f.reset = (reset & f.mask()) >> f.lsb;
    r.fields.push_back(std::move(f));
  }
  std::sort(r.fields.begin(), r.fields.end(), [](const auto& a, const auto& b) { return a.lsb < b.lsb; });
  try {
    r.validate();
  } catch (const reg::ModelError& e) {
    throw FlowError(e.what());
  }
  return r;
}

AddressBlockIR parse_block(const pt::ptree& node, Warner& warn) {
  AddressBlockIR b;
  b.name = required_text(node, "name", "addressBlock");
  const std::string where = "addressBlock " + b.name;
  warn.unknown({"name", "displayName", "description", "baseAddress", "range", "width", "usage", "access",
                "volatile", "register"},
               node, where);
  b.base_offset = parse_number(required_text(node, "baseAddress", where), where + " baseAddress");
  b.range = parse_number(required_text(node, "range", where), where + " range");
  for (const auto& [name, child] : elements(node)) {
    if (name == "register") b.registers.push_back(parse_register(*child, b.name, warn));
  }
  std::sort(b.registers.begin(), b.registers.end(), [](const auto& x, const auto& y) { return x.offset < y.offset; });
  for (std::size_t i = 0; i < b.registers.size(); ++i) {
    const auto& r = b.registers[i];
    if (std::uint64_t{r.offset} + 4 > b.range) {
      throw FlowError(fmt::format("{}: register {} at {:#x} lies outside range {:#x}", where, r.name, r.offset,
                                  b.range));
    }
    if (i > 0 && b.registers[i - 1].offset + 4 > r.offset) {
      throw FlowError(fmt::format("{}: registers {} and {} overlap at {:#x}", where, b.registers[i - 1].name, r.name,
                                  r.offset));
    }
  }
  try {
    reg::BlockDef{b.name, b.registers}.validate();
  } catch (const reg::ModelError& e) {
    throw FlowError(e.what());
  }
  return b;
}

}  // namespace

ParseResult parse_ipxact(std::string_view xml) {
  pt::ptree doc;
  try {
    std::istringstream in{std::string(xml)};
    pt::read_xml(in, doc);
  } catch (const pt::xml_parser_error& e) {
    throw FlowError(fmt::format("XML parse error at line {}: {}", e.line(), e.message()), static_cast<int>(e.line()));
  }
  ParseResult res;
  Warner warn{res.warnings};
  const pt::ptree* comp = first(doc, "component");
  if (comp == nullptr) throw FlowError("no <component> element");
  res.ir.component = required_text(*comp, "name", "component");
  warn.unknown({"vendor", "library", "name", "version", "description", "memoryMaps", "busInterfaces", "model",
                "parameters"},
               *comp, "component " + res.ir.component);
  if (const pt::ptree* maps = first(*comp, "memoryMaps")) {
    for (const auto& [name, mm] : elements(*maps)) {
      if (name != "memoryMap") {
        res.warnings.push_back(fmt::format("memoryMaps: ignored element <{}>", name));
        continue;
      }
      warn.unknown({"name", "displayName", "description", "addressBlock", "addressUnitBits"}, *mm, "memoryMap");
      for (const auto& [bname, blk] : elements(*mm)) {
        if (bname == "addressBlock") res.ir.blocks.push_back(parse_block(*blk, warn));
      }
    }
  }
  std::stable_sort(res.ir.blocks.begin(), res.ir.blocks.end(),
                   [](const auto& a, const auto& b) { return a.base_offset < b.base_offset; });
  std::set<std::string> names;
  for (const auto& b : res.ir.blocks) {
    if (!names.insert(b.name).second) throw FlowError(fmt::format("duplicate addressBlock {}", b.name));
  }
  return res;
}

namespace {

bool valid_ident(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

bool valid_path(std::string_view s) {
  std::size_t parts = 0;
  std::size_t start = 0;
  for (;;) {
    const auto dot = s.find('.', start);
    const auto seg = s.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start);
    if (!valid_ident(seg)) return false;
    ++parts;
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return parts == 2 || parts == 3;
}

}  // namespace

AttrMap parse_attr_map(std::string_view text) {
  AttrMap out;
  std::map<std::string, int> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int n = 0;
  while (std::getline(in, raw)) {
    ++n;
    std::string line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto arrow = line.find("->");
    if (arrow == std::string::npos) throw FlowError(fmt::format("attribute map line {}: expected 'path -> attribute'", n), n);
    const std::string path = trim(line.substr(0, arrow));
    const std::string attr = trim(line.substr(arrow + 2));
    if (!valid_path(path)) throw FlowError(fmt::format("attribute map line {}: bad path '{}'", n, path), n);
    if (!valid_ident(attr)) throw FlowError(fmt::format("attribute map line {}: bad attribute '{}'", n, attr), n);
    if (auto it = seen.find(attr); it != seen.end()) {
      throw FlowError(fmt::format("attribute map line {}: attribute '{}' already mapped on line {}", n, attr, it->second),
                      n);
    }
    seen[attr] = n;
    out.push_back(AttrEntry{path, attr, n});
  }
  return out;
}

namespace {

struct Resolved {
  const AddressBlockIR* block = nullptr;
  const reg::RegisterDef* reg = nullptr;
  const reg::FieldDef* field = nullptr;
};

std::optional<Resolved> resolve(const RegisterMapIR& ir, const std::string& path) {
  std::vector<std::string> parts;
  std::istringstream in(path);
  std::string seg;
  while (std::getline(in, seg, '.')) parts.push_back(seg);
  if (parts.size() < 2 || parts.size() > 3) return std::nullopt;
  for (const auto& b : ir.blocks) {
    if (b.name != parts[0]) continue;
    for (const auto& r : b.registers) {
      if (r.name != parts[1]) continue;
      if (parts.size() == 2) return Resolved{&b, &r, nullptr};
      if (const auto* f = r.field(parts[2])) return Resolved{&b, &r, f};
      return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace

CrossReport validate_cross(const RegisterMapIR& ir, const AttrMap& amap) {
  CrossReport rep;
  std::set<std::string> covered;
  for (const auto& e : amap) {
    const auto r = resolve(ir, e.path);
    if (!r) {
      rep.errors.push_back(
          fmt::format("attribute map line {}: path '{}' (attribute {}) does not resolve", e.line, e.path, e.attribute));
      continue;
    }
    const std::string reg_path = r->block->name + "." + r->reg->name;
    if (r->field != nullptr) {
      covered.insert(reg_path + "." + r->field->name);
    } else {
      for (const auto& f : r->reg->fields) covered.insert(reg_path + "." + f.name);
    }
  }
  for (const auto& b : ir.blocks) {
    for (const auto& r : b.registers) {
      for (const auto& f : r.fields) {
        const std::string p = b.name + "." + r.name + "." + f.name;
        if (covered.count(p) == 0) rep.warnings.push_back(fmt::format("field {} feeds no model attribute", p));
      }
    }
  }
  return rep;
}

check::CovSkeleton make_skeleton(const RegisterMapIR& ir) {
  check::CovSkeleton out;
  for (const auto& b : ir.blocks) {
    for (const auto& r : b.registers) {
      for (const auto& f : r.fields) {
        if (f.access != reg::Access::kRW) continue;
        const std::string p = b.name + "." + r.name + "." + f.name;
        out.push_back(check::CoverpointSpec{p, p, check::default_bins(f)});
      }
    }
  }
  return out;
}

check::CheckerBinding make_binding(const AttrMap& amap) {
  check::CheckerBinding out;
  for (const auto& e : amap) out.push_back(check::Binding{e.attribute, e.path});
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.attribute < b.attribute; });
  return out;
}

namespace {

std::string bin_text(const check::Bin& b) {
  std::vector<std::string> parts;
  for (const auto& [lo, hi] : b.ranges) parts.push_back(lo == hi ? fmt::format("{}", lo) : fmt::format("{}..{}", lo, hi));
  return fmt::format("{}={}", b.name, fmt::join(parts, "|"));
}

}  // namespace

std::string emit_bundle(const RegisterMapIR& ir, const AttrMap& amap) {
  const CrossReport rep = validate_cross(ir, amap);
  if (!rep.ok()) throw FlowError(fmt::format("cannot emit bundle: {}", fmt::join(rep.errors, "; ")));
  RegisterMapIR canon = ir;
  std::stable_sort(canon.blocks.begin(), canon.blocks.end(),
                   [](const auto& a, const auto& b) { return a.base_offset < b.base_offset; });
  for (auto& b : canon.blocks) {
    std::sort(b.registers.begin(), b.registers.end(), [](const auto& x, const auto& y) { return x.offset < y.offset; });
    for (auto& r : b.registers) {
      std::sort(r.fields.begin(), r.fields.end(), [](const auto& x, const auto& y) { return x.lsb < y.lsb; });
    }
  }

  std::string out;
  auto line = [&out](std::string s) {
    out += s;
    out += '\n';
  };
  line(std::string(kBundleHeader));
  line("[regmodel]");
  line("component " + canon.component);
  for (const auto& b : canon.blocks) {
    line(fmt::format("block {} base {:#010x} range {:#x}", b.name, b.base_offset, b.range));
    for (const auto& r : b.registers) {
      line(fmt::format("register {} offset {:#06x}", r.name, r.offset));
      for (const auto& f : r.fields) {
        line(fmt::format("field {} lsb {} width {} access {} reset {:#x}", f.name, f.lsb, f.width,
                         reg::to_string(f.access), f.reset));
      }
    }
  }
  line("[covskel]");
  for (const auto& cp : make_skeleton(canon)) {
    std::vector<std::string> bins;
    for (const auto& b : cp.bins) bins.push_back(bin_text(b));
    line(fmt::format("coverpoint {} path {} bins {}", cp.name, cp.path, fmt::join(bins, " ")));
  }
  line("[binding]");
  for (const auto& b : make_binding(amap)) line(fmt::format("{} {}", b.attribute, b.path));
  line("[end]");
  return out;
}

namespace {

std::vector<std::string> words(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::int64_t parse_signed(const std::string& s, const std::string& where) {
  if (!s.empty() && s[0] == '-') return -static_cast<std::int64_t>(parse_number(s.substr(1), where));
  return static_cast<std::int64_t>(parse_number(s, where));
}

check::Bin parse_bin(const std::string& text, const std::string& where) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw FlowError(fmt::format("{}: bad bin '{}'", where, text));
  check::Bin b{text.substr(0, eq), {}};
  std::istringstream in(text.substr(eq + 1));
  std::string part;
  while (std::getline(in, part, '|')) {
    const auto dots = part.find("..");
    if (dots == std::string::npos) {
      const auto v = parse_signed(part, where);
      b.ranges.emplace_back(v, v);
    } else {
      b.ranges.emplace_back(parse_signed(part.substr(0, dots), where), parse_signed(part.substr(dots + 2), where));
    }
  }
  if (b.ranges.empty()) throw FlowError(fmt::format("{}: bin '{}' has no values", where, text));
  return b;
}

}  // namespace

Bundle load_bundle(std::string_view text) {
  Bundle out;
  std::istringstream in{std::string(text)};
  std::string raw;
  int n = 0;
  if (!std::getline(in, raw) || trim(raw) != kBundleHeader) {
    throw FlowError(fmt::format("bundle: expected header '{}'", kBundleHeader), 1);
  }
  n = 1;
  enum class Sec { kNone, kRegmodel, kCovskel, kBinding, kUnknown } sec = Sec::kNone;
  std::set<std::string> seen;
  bool ended = false;
  AddressBlockIR* block = nullptr;
  reg::RegisterDef* reg = nullptr;
  while (std::getline(in, raw)) {
    ++n;
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (ended) throw FlowError(fmt::format("bundle line {}: content after [end]", n), n);
    const std::string where = fmt::format("bundle line {}", n);
    if (line.front() == '[') {
      if (line.back() != ']') throw FlowError(where + ": bad section header", n);
      const std::string name = line.substr(1, line.size() - 2);
      if (name == "end") {
        ended = true;
        continue;
      }
      if (!seen.insert(name).second) throw FlowError(fmt::format("{}: duplicate section [{}]", where, name), n);
      if (name == "regmodel") {
        sec = Sec::kRegmodel;
      } else if (name == "covskel") {
        sec = Sec::kCovskel;
      } else if (name == "binding") {
        sec = Sec::kBinding;
      } else {
        sec = Sec::kUnknown;
        out.warnings.push_back(fmt::format("{}: ignored unknown section [{}]", where, name));
      }
      continue;
    }
    const auto w = words(line);
    try {
      switch (sec) {
        case Sec::kNone:
          throw FlowError(where + ": content outside any section", n);
        case Sec::kUnknown:
          break;
        case Sec::kRegmodel:
          if (w[0] == "component" && w.size() == 2) {
            out.ir.component = w[1];
          } else if (w[0] == "block" && w.size() == 6 && w[2] == "base" && w[4] == "range") {
            out.ir.blocks.push_back(AddressBlockIR{w[1], parse_number(w[3], where), parse_number(w[5], where), {}});
            block = &out.ir.blocks.back();
            reg = nullptr;
          } else if (w[0] == "register" && w.size() == 4 && w[2] == "offset" && block != nullptr) {
            block->registers.push_back(
                reg::RegisterDef{w[1], static_cast<std::uint32_t>(parse_number(w[3], where)), {}});
            reg = &block->registers.back();
          } else if (w[0] == "field" && w.size() == 10 && w[2] == "lsb" && w[4] == "width" && w[6] == "access" &&
                     w[8] == "reset" && reg != nullptr) {
            const auto acc = reg::parse_access(w[7]);
            if (!acc) throw FlowError(fmt::format("{}: unknown access {}", where, w[7]), n);
            reg->fields.push_back(reg::FieldDef{w[1], static_cast<unsigned>(parse_number(w[3], where)),
                                                static_cast<unsigned>(parse_number(w[5], where)), *acc,
                                                parse_number(w[9], where)});
          } else {
            throw FlowError(fmt::format("{}: malformed regmodel entry", where), n);
          }
          break;
        case Sec::kCovskel: {
          if (w.size() < 5 || w[0] != "coverpoint" || w[2] != "path" || w[4] != "bins") {
            throw FlowError(fmt::format("{}: malformed coverpoint", where), n);
          }
          check::CoverpointSpec cp{w[1], w[3], {}};
          for (std::size_t i = 5; i < w.size(); ++i) cp.bins.push_back(parse_bin(w[i], where));
          out.covskel.push_back(std::move(cp));
          break;
        }
        case Sec::kBinding:
          if (w.size() != 2) throw FlowError(fmt::format("{}: malformed binding", where), n);
          out.binding.push_back(check::Binding{w[0], w[1]});
          break;
      }
    } catch (const FlowError& e) {
      if (e.line() != 0) throw;
      throw FlowError(e.what(), n);
    }
  }
  if (!ended) throw FlowError("bundle: truncated (no [end] marker)", n);
  for (const char* s : {"regmodel", "covskel", "binding"}) {
    if (seen.count(s) == 0) throw FlowError(fmt::format("bundle: missing section [{}]", s));
  }
  for (const auto& b : out.ir.blocks) {
    try {
      reg::BlockDef{b.name, b.registers}.validate();
      for (const auto& cp : out.covskel) check::CoverPoint(cp.name, cp.bins);
    } catch (const std::exception& e) {
      throw FlowError(fmt::format("bundle: {}", e.what()));
    }
  }
  return out;
}

void instantiate(const RegisterMapIR& ir, reg::RegisterModel& model, reg::AddressMap& map) {
  for (const auto& b : ir.blocks) {
    auto& blk = model.add_block(reg::BlockDef{b.name, b.registers});
    map.add_block(blk, b.base_offset);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FlowError(fmt::format("cannot read {}", path));
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace vfab::ipxact
