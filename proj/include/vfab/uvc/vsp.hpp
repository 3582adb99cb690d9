#pragma once

#include <functional>
#include <string>
#include <utility>

#include "vfab/seq/sequence.hpp"
#include "vfab/sim/kernel.hpp"
#include "vfab/tb/agent.hpp"
#include "vfab/uvc/frame.hpp"

namespace vfab::uvc {

/// Wires of one video stream.
struct VspIf {
  sim::Signal* clk = nullptr;
  sim::Signal* rst_n = nullptr;
  sim::Signal* frame_start = nullptr;
  sim::Signal* line_valid = nullptr;
  sim::Signal* data_valid = nullptr;
  sim::Signal* data = nullptr;

  static VspIf create(sim::Kernel& kernel, const std::string& prefix, sim::Signal& clk, sim::Signal& rst_n,
                      unsigned bpp = 8);
  static VspIf bind(sim::Kernel& kernel, const std::string& prefix);
};

/// Producer protocol. One cycle of frame_start, then per line: line_valid
/// high while `width` pixels go out with data_valid (stall cycles allowed,
/// at most VspTiming::kMaxStallRun in a row), then line_valid low for
/// 1 + inter_line_gap cycles. inter_frame_gap idle cycles follow the frame.
sim::Task<> vsp_send_frame(VspIf& bus, const Frame& frame, const VspTiming& timing, seq::Rng& rng);

struct VideoItem {
  Frame frame;
  VspTiming timing;
};

using VideoSequencer = seq::Sequencer<VideoItem>;

class VspDriver : public tb::Component {
 public:
  VspDriver(std::string name, tb::Component* parent)
      : tb::Component(std::move(name), parent, tb::ComponentKind::kDriver) {}
  sim::Task<> run_phase() override;
  std::uint64_t sent() const { return sent_; }

 private:
  std::uint64_t sent_ = 0;
};

/// Collects frames from wires. Geometry comes from a provider evaluated at
/// frame_start (typically the WIDTH/HEIGHT register mirrors).
class VspMonitor : public tb::Component {
 public:
  enum class Side { kInput, kOutput };
  using Geometry = std::pair<unsigned, unsigned>;

  VspMonitor(std::string name, tb::Component* parent, Side side)
      : tb::Component(std::move(name), parent, tb::ComponentKind::kMonitor), side_(side) {}

  Side side() const { return side_; }
  void set_geometry(std::function<Geometry()> provider) { geometry_ = std::move(provider); }
  /// Explicit wire prefix; otherwise `vif` (input) or `vif_out` (output) of the agent.
  void set_binding(std::string prefix) { binding_ = std::move(prefix); }

  sim::Task<> run_phase() override;

  tb::AnalysisPort<FrameStart> starts{*this, "starts"};
  tb::AnalysisPort<ObservedFrame> frames{*this, "frames"};
  std::uint64_t collected() const { return collected_; }

 private:
  Side side_;
  std::function<Geometry()> geometry_;
  std::string binding_;
  std::uint64_t collected_ = 0;
};

/// Video agent i: drives input i when active, monitors input i and/or
/// output i depending on the interface profile.
class VideoAgent : public tb::Agent {
 public:
  VideoAgent(std::string name, tb::Component* parent, bool has_input, bool has_output)
      : tb::Agent(std::move(name), parent), has_input_(has_input), has_output_(has_output) {}

  void build_phase() override;
  VspMonitor* input_monitor() const { return in_mon_; }
  VspMonitor* output_monitor() const { return out_mon_; }
  VideoSequencer* sequencer() const { return dynamic_cast<VideoSequencer*>(sequencer_component()); }

 protected:
  tb::Component& make_monitor() override;
  tb::Component& make_sequencer() override { return create<VideoSequencer>("sequencer"); }
  tb::Component& make_driver() override { return create_via_factory<VspDriver, VspDriver>("driver"); }

 private:
  bool has_input_;
  bool has_output_;
  VspMonitor* in_mon_ = nullptr;
  VspMonitor* out_mon_ = nullptr;
};

/// Sends frames given at construction, one item each.
class FrameSequence : public seq::Sequence {
 public:
  FrameSequence(std::string name, std::vector<VideoItem> items)
      : seq::Sequence(std::move(name)), items_(std::move(items)) {}
  sim::Task<> body(seq::SequenceContext& ctx) override;

 private:
  std::vector<VideoItem> items_;
};

}  // namespace vfab::uvc
