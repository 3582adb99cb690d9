#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vfab::sw {

class ProgramError : public std::runtime_error {
 public:
  ProgramError(const std::string& what, int line = 0) : std::runtime_error(what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// One software API call. Operands stay textual until execution so that
/// `$var` references and command symbols (e.g. `ramp`) resolve late.
struct Statement {
  enum class Op { kWrite, kRead, kIrqWait, kVri, kSet };

  Op op = Op::kWrite;
  std::string target;                    // register name, command or variable
  std::optional<std::uint32_t> address;  // numeric register target
  std::vector<std::string> args;
  int line = 0;

  /// Scenario-format text of this statement.
  std::string to_string() const;
  bool operator==(const Statement& o) const {
    return op == o.op && target == o.target && address == o.address && args == o.args;
  }
};

/// Ordered statements over the software API: register write/read by name or
/// address, interrupt wait, VRI call, variable assignment.
struct TestProgram {
  std::string name;
  std::vector<Statement> body;

  TestProgram& write(std::string reg, std::int64_t value);
  TestProgram& write(std::uint32_t addr, std::int64_t value);
  TestProgram& read(std::string reg);
  TestProgram& read(std::uint32_t addr);
  TestProgram& irq_wait(unsigned line, std::uint64_t timeout_cycles);
  TestProgram& vri(std::string command, std::vector<std::string> args);
  TestProgram& set(std::string var, std::int64_t value);

  std::string to_text() const;
};

/// Scenario text: one statement per line, `#` starts a comment.
///   w ganc.GAIN 0x20 | w 0x40000004 $g
///   r ganc.STATUS
///   irqwait 0 1000000
///   vri SEND_FRAME 64 64 ramp 7
///   set frames 3
TestProgram parse_program(std::string_view text, std::string name = "program");

/// Integer literal in decimal or 0x hex, optionally negative.
std::optional<std::int64_t> parse_int(std::string_view text);

}  // namespace vfab::sw
