#include "vfab/sw/program.hpp"

#include <charconv>
#include <sstream>

#include <fmt/format.h>

namespace vfab::sw {

std::optional<std::int64_t> parse_int(std::string_view text) {
  bool neg = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    neg = text.front() == '-';
    text.remove_prefix(1);
  }
  int base = 10;
  if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
    base = 16;
    text.remove_prefix(2);
  }
  if (text.empty()) return std::nullopt;
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v, base);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  if (v > static_cast<std::uint64_t>(INT64_MAX)) return std::nullopt;
  const auto s = static_cast<std::int64_t>(v);
  return neg ? -s : s;
}

namespace {

std::string target_text(const Statement& s) {
  return s.address ? fmt::format("{:#010x}", *s.address) : s.target;
}

bool is_value(const std::string& tok) { return parse_int(tok).has_value() || (tok.size() > 1 && tok[0] == '$'); }

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace

std::string Statement::to_string() const {
  std::string out;
  switch (op) {
    case Op::kWrite: out = "w " + target_text(*this); break;
    case Op::kRead: out = "r " + target_text(*this); break;
    case Op::kIrqWait: out = "irqwait"; break;
    case Op::kVri: out = "vri " + target; break;
    case Op::kSet: out = "set " + target; break;
  }
  for (const auto& a : args) out += " " + a;
  return out;
}

TestProgram& TestProgram::write(std::string reg, std::int64_t value) {
  body.push_back(Statement{Statement::Op::kWrite, std::move(reg), std::nullopt, {std::to_string(value)}, 0});
  return *this;
}

TestProgram& TestProgram::write(std::uint32_t addr, std::int64_t value) {
  body.push_back(Statement{Statement::Op::kWrite, "", addr, {std::to_string(value)}, 0});
  return *this;
}

TestProgram& TestProgram::read(std::string reg) {
  body.push_back(Statement{Statement::Op::kRead, std::move(reg), std::nullopt, {}, 0});
  return *this;
}

TestProgram& TestProgram::read(std::uint32_t addr) {
  body.push_back(Statement{Statement::Op::kRead, "", addr, {}, 0});
  return *this;
}

TestProgram& TestProgram::irq_wait(unsigned line, std::uint64_t timeout_cycles) {
  body.push_back(Statement{Statement::Op::kIrqWait, "", std::nullopt,
                           {std::to_string(line), std::to_string(timeout_cycles)}, 0});
  return *this;
}

TestProgram& TestProgram::vri(std::string command, std::vector<std::string> args) {
  body.push_back(Statement{Statement::Op::kVri, std::move(command), std::nullopt, std::move(args), 0});
  return *this;
}

TestProgram& TestProgram::set(std::string var, std::int64_t value) {
  body.push_back(Statement{Statement::Op::kSet, std::move(var), std::nullopt, {std::to_string(value)}, 0});
  return *this;
}

std::string TestProgram::to_text() const {
  std::string out;
  for (const auto& s : body) out += s.to_string() + "\n";
  return out;
}

TestProgram parse_program(std::string_view text, std::string name) {
  TestProgram prog;
  prog.name = std::move(name);
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto toks = split(line);
    if (toks.empty()) continue;
    const auto err = [&](const std::string& msg) { return ProgramError(fmt::format("line {}: {}", line_no, msg), line_no); };

    Statement st;
    st.line = line_no;
    const std::string& kw = toks[0];
    auto set_target = [&](const std::string& t) {
      if (auto v = parse_int(t)) {
        if (*v < 0 || *v > 0xFFFFFFFF) throw err("address out of range: " + t);
        st.address = static_cast<std::uint32_t>(*v);
      } else if (t.find('.') != std::string::npos) {
        st.target = t;
      } else {
        throw err("expected a block.REG name or an address, got '" + t + "'");
      }
    };
    if (kw == "w") {
      if (toks.size() != 3) throw err("usage: w NAME|ADDR VALUE");
      st.op = Statement::Op::kWrite;
      set_target(toks[1]);
      if (!is_value(toks[2])) throw err("bad value '" + toks[2] + "'");
      st.args = {toks[2]};
    } else if (kw == "r") {
      if (toks.size() != 2) throw err("usage: r NAME|ADDR");
      st.op = Statement::Op::kRead;
      set_target(toks[1]);
    } else if (kw == "irqwait") {
      if (toks.size() != 3) throw err("usage: irqwait LINE TIMEOUT_CYCLES");
      st.op = Statement::Op::kIrqWait;
      for (int i = 1; i <= 2; ++i) {
        const auto v = parse_int(toks[i]);
        if (!v || *v < 0) throw err("bad number '" + toks[i] + "'");
      }
      st.args = {toks[1], toks[2]};
    } else if (kw == "vri") {
      if (toks.size() < 2) throw err("usage: vri COMMAND [ARG...]");
      if (toks.size() - 2 > 8) throw err("at most 8 VRI arguments");
      st.op = Statement::Op::kVri;
      st.target = toks[1];
      st.args.assign(toks.begin() + 2, toks.end());
    } else if (kw == "set") {
      if (toks.size() != 3) throw err("usage: set VAR VALUE");
      st.op = Statement::Op::kSet;
      st.target = toks[1];
      if (!is_value(toks[2])) throw err("bad value '" + toks[2] + "'");
      st.args = {toks[2]};
    } else {
      throw err("unknown statement '" + kw + "'");
    }
    prog.body.push_back(std::move(st));
  }
  return prog;
}

}  // namespace vfab::sw
