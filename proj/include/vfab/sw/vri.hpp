#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vfab/reg/model.hpp"
#include "vfab/seq/sequence.hpp"
#include "vfab/sim/sync.hpp"
#include "vfab/tb/component.hpp"
#include "vfab/uvc/bus_txn.hpp"

namespace vfab::sw {

namespace vri {
inline constexpr std::uint32_t kDoorbell = 0x00;
inline constexpr std::uint32_t kCmd = 0x04;
inline constexpr std::uint32_t kStatus = 0x08;
inline constexpr std::uint32_t kRet = 0x0C;
inline constexpr std::uint32_t kArg0 = 0x10;
inline constexpr unsigned kArgCount = 8;
inline constexpr unsigned kPollCycles = 16;

enum class Status : std::uint32_t { kIdle = 0, kBusy = 1, kDone = 2, kError = 3 };
std::string_view to_string(Status s);
/// Edges of the STATUS graph: idle->busy->(done|error)->idle.
bool allowed(Status from, Status to);
}  // namespace vri

class VriError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct VriRequest {
  std::uint32_t cmd = 0;
  std::array<std::uint32_t, vri::kArgCount> args{};
};

/// Address-mapped mailbox state. Software drives it through access();
/// the environment side uses take() and complete().
class VriMailbox {
 public:
  /// Offsets are taken modulo 0x1000. Undefined offsets answer err; STATUS
  /// and RET ignore writes.
  uvc::BusTxn access(uvc::BusTxn txn);
  std::uint32_t read(std::uint32_t offset);
  void write(std::uint32_t offset, std::uint32_t value);

  /// Command accepted by the last doorbell and not yet taken.
  std::optional<VriRequest> take();
  /// Result of the taken command. STATUS becomes done or error, except that
  /// an error raised meanwhile (doorbell while busy) stays.
  void complete(bool ok, std::uint32_t ret);

  vri::Status status() const { return status_; }
  bool outstanding() const { return pending_ || running_; }
  std::uint64_t rejected_doorbells() const { return rejected_; }
  void set_on_doorbell(std::function<void()> fn) { on_doorbell_ = std::move(fn); }

 private:
  vri::Status status_ = vri::Status::kIdle;
  std::uint32_t cmd_ = 0;
  std::array<std::uint32_t, vri::kArgCount> args_{};
  std::uint32_t ret_ = 0;
  VriRequest latched_;
  bool pending_ = false;
  bool running_ = false;
  std::uint64_t rejected_ = 0;
  std::function<void()> on_doorbell_;
};

/// Register-model view of the mailbox, block name "vri".
reg::BlockDef vri_block_def();

struct ArgSpec {
  std::string name;
  std::int64_t lo = 0;
  std::int64_t hi = 0xFFFFFFFF;
  std::map<std::string, std::int64_t> symbols;  // e.g. pattern names
};

/// Sequence started for one command; sets `ret` before it finishes.
class VriSequence : public seq::Sequence {
 public:
  using seq::Sequence::Sequence;
  std::uint32_t ret = 0;
};

struct VriCommand {
  std::uint32_t id = 0;
  std::string name;
  std::vector<ArgSpec> schema;
  std::string sequencer_path;  // relative to the environment root
  std::function<std::shared_ptr<VriSequence>(const std::vector<std::int64_t>&)> factory;
};

class VriCommandTable {
 public:
  /// Throws VriError on a duplicate id or name, more than 8 arguments or an
  /// empty range.
  void register_handler(VriCommand cmd);
  const VriCommand* find(std::uint32_t id) const;
  const VriCommand* find(std::string_view name) const;
  const std::vector<VriCommand>& commands() const { return commands_; }

  /// Decodes raw argument registers into schema values (sign-extended when
  /// the range is signed). Returns an error message when `cmd` is unknown or
  /// a value is outside its range.
  std::optional<std::string> decode(const VriRequest& req, std::vector<std::int64_t>& out) const;

 private:
  std::vector<VriCommand> commands_;
};

/// Environment side of the mailbox: dispatches each accepted command to
/// its sequence as a forked process and posts RET/STATUS on completion.
class VriUvc : public tb::Component {
 public:
  VriUvc(std::string name, tb::Component* parent, VriMailbox& mailbox, const VriCommandTable& table,
         const tb::Component& sequence_root);

  struct Dispatch {
    std::uint32_t cmd = 0;
    std::vector<std::int64_t> args;
    bool ok = false;
    std::uint32_t ret = 0;
    std::string message;
  };

  sim::Task<> run_phase() override;
  const std::vector<Dispatch>& log() const { return log_; }

 private:
  sim::Task<> serve(std::size_t slot, const VriCommand* cmd);

  VriMailbox& mailbox_;
  const VriCommandTable& table_;
  const tb::Component& root_;
  sim::Notifier doorbell_;
  std::vector<Dispatch> log_;
  std::uint64_t seed_ = 1;
};

/// Bus-side coroutine wrapper for an interconnect route.
sim::Task<uvc::BusTxn> mailbox_access(VriMailbox* mailbox, uvc::BusTxn txn);

}  // namespace vfab::sw
