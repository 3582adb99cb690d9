#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vfab/reg/model.hpp"
#include "vfab/seq/rng.hpp"
#include "vfab/sim/sync.hpp"
#include "vfab/tb/component.hpp"

namespace vfab::seq {

class SequenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Type-independent sequencer part: identity in the tree plus the optional
/// register model/map whose adapter drives this sequencer's bus.
class SequencerBase : public tb::Component {
 public:
  SequencerBase(std::string name, tb::Component* parent)
      : tb::Component(std::move(name), parent, tb::ComponentKind::kSequencer) {}

  void bind_registers(reg::RegisterModel& model, reg::AddressMap& map) {
    model_ = &model;
    map_ = &map;
  }
  reg::RegisterModel* reg_model() const { return model_; }
  reg::AddressMap* reg_map() const { return map_; }
  std::uint64_t granted() const { return granted_; }

 protected:
  std::uint64_t granted_ = 0;

 private:
  reg::RegisterModel* model_ = nullptr;
  reg::AddressMap* map_ = nullptr;
};

/// Grants items to the driver strictly in arrival order.
template <typename Req, typename Rsp = Req>
class Sequencer : public SequencerBase {
 public:
  Sequencer(std::string name, tb::Component* parent)
      : SequencerBase(std::move(name), parent), has_items_(kernel()) {}

  /// Sequence side: queue `item` and resume with the driver's response.
  sim::Task<Rsp> execute(Req item) {
    auto slot = std::make_shared<Slot>(std::move(item), kernel());
    pending_.push_back(slot);
    has_items_.notify();
    while (!slot->rsp) co_await slot->done.wait();
    co_return std::move(*slot->rsp);
  }

  /// Driver side.
  sim::Task<Req> get_next_item() {
    while (pending_.empty()) co_await has_items_.wait();
    active_ = pending_.front();
    pending_.pop_front();
    ++granted_;
    co_return active_->item;
  }
  void item_done(Rsp rsp) {
    if (!active_) throw SequenceError(path() + ": item_done without an active item");
    active_->rsp = std::move(rsp);
    active_->done.notify();
    active_.reset();
  }
  std::size_t pending() const { return pending_.size(); }

 private:
  struct Slot {
    Slot(Req r, sim::Kernel& k) : item(std::move(r)), done(k) {}
    Req item;
    std::optional<Rsp> rsp;
    sim::Notifier done;
  };
  sim::Notifier has_items_;
  std::deque<std::shared_ptr<Slot>> pending_;
  std::shared_ptr<Slot> active_;
};

class Sequence;

/// Everything a sequence body may use: its sequencer, its random stream and
/// name-based register access. Bodies never see addresses.
class SequenceContext {
 public:
  SequenceContext(sim::Kernel& kernel, SequencerBase* sequencer, Rng rng);

  sim::Kernel& kernel() const { return kernel_; }
  SequencerBase* sequencer() const { return sequencer_; }
  Rng& rng() { return rng_; }

  template <typename S>
  S& sequencer_as() const {
    auto* s = dynamic_cast<S*>(sequencer_);
    if (s == nullptr) {
      throw SequenceError(fmt::format("sequence needs a different sequencer type than {}",
                                      sequencer_ ? sequencer_->path() : std::string("<none>")));
    }
    return *s;
  }

  /// Overrides the register binding inherited from the sequencer.
  void bind_registers(reg::RegisterModel& model, reg::AddressMap& map) {
    model_ = &model;
    map_ = &map;
  }
  reg::RegisterModel& reg_model() const;
  reg::AddressMap& reg_map() const;

  /// `name` is "block.REG"; unknown names throw reg::LookupError.
  sim::Task<bool> reg_write(std::string name, std::uint32_t value);
  sim::Task<std::uint32_t> reg_read(std::string name);

  /// Runs `child` on the same sequencer with a substream named after it.
  sim::Task<> run(Sequence& child);

 private:
  sim::Kernel& kernel_;
  SequencerBase* sequencer_;
  Rng rng_;
  reg::RegisterModel* model_ = nullptr;
  reg::AddressMap* map_ = nullptr;
};

class Sequence {
 public:
  explicit Sequence(std::string name) : name_(std::move(name)) {}
  virtual ~Sequence() = default;
  const std::string& name() const { return name_; }
  virtual sim::Task<> body(SequenceContext& ctx) = 0;

 private:
  std::string name_;
};

/// Runs `seq` on `sequencer` with random stream `rng`.
sim::Task<> run_sequence(Sequence& seq, SequencerBase& sequencer, Rng rng);

/// Finds the sequencer at `relative_path` below `root` ("reg_agent0.sequencer"
/// or the agent path itself). Passive agents and missing paths are errors.
SequencerBase& resolve_sequencer(const tb::Component& root, std::string_view relative_path);

struct Launch {
  std::string sequencer_path;
  std::shared_ptr<Sequence> sequence;
};

struct LaunchGroup {
  bool parallel = false;
  std::vector<Launch> launches;
};

/// Multi-sequencer plan: groups run one after another; launches inside a
/// parallel group run as forked processes joined at the group end.
class VirtualSequence {
 public:
  explicit VirtualSequence(std::string name) : name_(std::move(name)) {}
  const std::string& name() const { return name_; }
  VirtualSequence& then(std::string sequencer_path, std::shared_ptr<Sequence> seq);
  VirtualSequence& fork(std::vector<Launch> launches);
  const std::vector<LaunchGroup>& groups() const { return groups_; }

 private:
  std::string name_;
  std::vector<LaunchGroup> groups_;
};

/// Resolves every path against `root` before starting any child.
sim::Task<> run_virtual(const VirtualSequence& vseq, const tb::Component& root, Rng rng);

}  // namespace vfab::seq
