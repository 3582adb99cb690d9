#include "vfab/seq/sequence.hpp"

#include "vfab/tb/agent.hpp"

namespace vfab::seq {

SequenceContext::SequenceContext(sim::Kernel& kernel, SequencerBase* sequencer, Rng rng)
    : kernel_(kernel), sequencer_(sequencer), rng_(std::move(rng)) {
  if (sequencer_ != nullptr) {
    model_ = sequencer_->reg_model();
    map_ = sequencer_->reg_map();
  }
}

reg::RegisterModel& SequenceContext::reg_model() const {
  if (model_ == nullptr) throw SequenceError("sequence context has no register model");
  return *model_;
}

reg::AddressMap& SequenceContext::reg_map() const {
  if (map_ == nullptr) throw SequenceError("sequence context has no address map");
  return *map_;
}

sim::Task<bool> SequenceContext::reg_write(std::string name, std::uint32_t value) {
  reg::RegisterInstance& r = reg_model().lookup(name);
  co_return co_await reg::reg_write(reg_model(), r, value, reg_map());
}

sim::Task<std::uint32_t> SequenceContext::reg_read(std::string name) {
  reg::RegisterInstance& r = reg_model().lookup(name);
  const reg::ReadResult rd = co_await reg::reg_read(reg_model(), r, reg_map());
  co_return rd.value;
}

sim::Task<> SequenceContext::run(Sequence& child) {
  SequenceContext ctx(kernel_, sequencer_, rng_.substream(child.name()));
  ctx.model_ = model_;
  ctx.map_ = map_;
  co_await child.body(ctx);
}

sim::Task<> run_sequence(Sequence& seq, SequencerBase& sequencer, Rng rng) {
  SequenceContext ctx(sequencer.kernel(), &sequencer, std::move(rng));
  co_await seq.body(ctx);
}

SequencerBase& resolve_sequencer(const tb::Component& root, std::string_view relative_path) {
  const std::string full = root.path() + "." + std::string(relative_path);
  tb::Component* c = root.tree().find(full);
  if (auto* s = dynamic_cast<SequencerBase*>(c)) return *s;
  if (auto* agent = dynamic_cast<tb::Agent*>(c)) {
    if (auto* s = dynamic_cast<SequencerBase*>(agent->sequencer_component())) return *s;
  }
  // Report passive agents distinctly: the path exists in an active build.
  for (std::string p = full; !p.empty();) {
    if (auto* agent = dynamic_cast<tb::Agent*>(root.tree().find(p)); agent && !agent->is_active()) {
      throw SequenceError(fmt::format("cannot start a sequence on {}: agent {} is passive", full, p));
    }
    const auto dot = p.rfind('.');
    if (dot == std::string::npos) break;
    p.resize(dot);
  }
  throw SequenceError(fmt::format("no sequencer at {}", full));
}

VirtualSequence& VirtualSequence::then(std::string sequencer_path, std::shared_ptr<Sequence> seq) {
  groups_.push_back(LaunchGroup{false, {Launch{std::move(sequencer_path), std::move(seq)}}});
  return *this;
}

VirtualSequence& VirtualSequence::fork(std::vector<Launch> launches) {
  groups_.push_back(LaunchGroup{true, std::move(launches)});
  return *this;
}

sim::Task<> run_virtual(const VirtualSequence& vseq, const tb::Component& root, Rng rng) {
  std::vector<std::vector<SequencerBase*>> resolved;
  for (const auto& g : vseq.groups()) {
    auto& row = resolved.emplace_back();
    for (const auto& l : g.launches) row.push_back(&resolve_sequencer(root, l.sequencer_path));
  }
  sim::Kernel& kernel = root.kernel();
  for (std::size_t gi = 0; gi < vseq.groups().size(); ++gi) {
    const auto& g = vseq.groups()[gi];
    if (!g.parallel) {
      for (std::size_t li = 0; li < g.launches.size(); ++li) {
        co_await run_sequence(*g.launches[li].sequence, *resolved[gi][li],
                              rng.substream(g.launches[li].sequencer_path + "." + g.launches[li].sequence->name()));
      }
      continue;
    }
    std::vector<sim::ProcessId> children;
    for (std::size_t li = 0; li < g.launches.size(); ++li) {
      const Launch& l = g.launches[li];
      children.push_back(kernel.spawn(
          run_sequence(*l.sequence, *resolved[gi][li], rng.substream(l.sequencer_path + "." + l.sequence->name())),
          fmt::format("{}.{}.{}", root.path(), vseq.name(), l.sequence->name())));
    }
    for (auto pid : children) co_await kernel.join(pid);
  }
}

}  // namespace vfab::seq
