#include "vfab/uvc/vsp.hpp"

#include <fmt/format.h>

#include "vfab/uvc/srb.hpp"

namespace vfab::uvc {

VspIf VspIf::create(sim::Kernel& kernel, const std::string& prefix, sim::Signal& clk, sim::Signal& rst_n,
                    unsigned bpp) {
  VspIf v;
  v.clk = &clk;
  v.rst_n = &rst_n;
  v.frame_start = &kernel.make_signal(prefix + ".frame_start", 1);
  v.line_valid = &kernel.make_signal(prefix + ".line_valid", 1);
  v.data_valid = &kernel.make_signal(prefix + ".data_valid", 1);
  v.data = &kernel.make_signal(prefix + ".data", bpp);
  return v;
}

VspIf VspIf::bind(sim::Kernel& kernel, const std::string& prefix) {
  VspIf v;
  v.clk = &find_enclosing(kernel, prefix, "clk");
  v.rst_n = &find_enclosing(kernel, prefix, "rst_n");
  v.frame_start = &kernel.signal(prefix + ".frame_start");
  v.line_valid = &kernel.signal(prefix + ".line_valid");
  v.data_valid = &kernel.signal(prefix + ".data_valid");
  v.data = &kernel.signal(prefix + ".data");
  return v;
}

sim::Task<> vsp_send_frame(VspIf& bus, const Frame& frame, const VspTiming& timing, seq::Rng& rng) {
  frame.validate();
  timing.validate();
  co_await bus.clk->posedge();
  while (!bus.rst_n->high()) co_await bus.clk->posedge();
  bus.frame_start->drive(1);
  co_await bus.clk->posedge();
  bus.frame_start->drive(0);
  for (unsigned y = 0; y < frame.height; ++y) {
    for (unsigned x = 0; x < frame.width; ++x) {
      unsigned stalls = 0;
      while (stalls < VspTiming::kMaxStallRun && rng.chance(timing.pixel_stall_probability)) {
        bus.line_valid->drive(1);
        bus.data_valid->drive(0);
        co_await bus.clk->posedge();
        ++stalls;
      }
      bus.line_valid->drive(1);
      bus.data_valid->drive(1);
      bus.data->drive(frame.at(x, y));
      co_await bus.clk->posedge();
    }
    bus.line_valid->drive(0);
    bus.data_valid->drive(0);
    for (unsigned g = 0; g < 1 + timing.inter_line_gap; ++g) co_await bus.clk->posedge();
  }
  for (unsigned g = 0; g < timing.inter_frame_gap; ++g) co_await bus.clk->posedge();
}

sim::Task<> VspDriver::run_phase() {
  auto& agent = dynamic_cast<tb::Agent&>(*parent());
  auto& sqr = dynamic_cast<VideoSequencer&>(*agent.sequencer_component());
  VspIf bus = VspIf::bind(kernel(), agent.interface_binding());
  const auto seed = config().get_as<std::int64_t>(path(), "seed").value_or(1);
  seq::Rng rng(static_cast<std::uint64_t>(seed), path());
  for (;;) {
    VideoItem item = co_await sqr.get_next_item();
    co_await vsp_send_frame(bus, item.frame, item.timing, rng);
    ++sent_;
    sqr.item_done(item);
  }
}

sim::Task<> VspMonitor::run_phase() {
  std::string prefix = binding_;
  if (prefix.empty()) {
    const char* key = side_ == Side::kInput ? "vif" : "vif_out";
    prefix = config().get_as<std::string>(parent()->path(), key).value_or("");
  }
  if (prefix.empty()) {
    throw tb::BuildError(fmt::format("{}: no video interface bound", path()));
  }
  if (!geometry_) throw tb::BuildError(fmt::format("{}: no geometry provider", path()));
  VspIf bus = VspIf::bind(kernel(), prefix);

  bool in_frame = false;
  bool in_line = false;
  Geometry geom{0, 0};
  ObservedFrame cur;
  std::vector<std::uint32_t> line;
  unsigned lines = 0;
  std::uint64_t index = 0;
  for (;;) {
    co_await bus.clk->posedge();
    const sim::SimTime now = kernel().now();
    if (!bus.rst_n->high()) {
      in_frame = in_line = false;
      continue;
    }
    const bool fs = bus.frame_start->high();
    const bool lv = bus.line_valid->high();
    const bool dv = bus.data_valid->high();

    if (fs) {
      const std::size_t seen = cur.frame.pixels.size() + line.size();
      if (in_frame && seen > 0) {
        fail("vsp.framing", fmt::format("frame_start at pixel {} of {} in frame {}", seen + 1,
                                        std::size_t{geom.first} * geom.second, cur.index));
      }
      geom = geometry_();
      cur = ObservedFrame{};
      cur.frame = Frame(geom.first, geom.second);
      cur.frame.pixels.clear();
      cur.index = index++;
      cur.start = now;
      line.clear();
      lines = 0;
      in_frame = true;
      in_line = false;
      starts.write(FrameStart{cur.index, now});
      continue;
    }
    if (lv) {
      if (!in_frame) {
        if (dv) fail("vsp.framing", fmt::format("pixel data without frame_start at t={}", now.ticks()));
        continue;
      }
      in_line = true;
      if (dv) {
        line.push_back(static_cast<std::uint32_t>(bus.data->read()));
        cur.end = now;
      }
      continue;
    }
    if (in_line) {
      in_line = false;
      if (line.size() != geom.first) {
        fail("vsp.geometry", fmt::format("frame {} line {} has {} pixels, WIDTH is {}", cur.index, lines,
                                         line.size(), geom.first));
        cur.intact = false;
      }
      cur.frame.pixels.insert(cur.frame.pixels.end(), line.begin(), line.end());
      line.clear();
      if (++lines == geom.second) {
        in_frame = false;
        ++collected_;
        frames.write(cur);
        cur = ObservedFrame{};
      }
    }
  }
}

void VideoAgent::build_phase() {
  tb::Agent::build_phase();
  if (has_input_ && has_output_) {
    out_mon_ = &create<VspMonitor>("out_monitor", VspMonitor::Side::kOutput);
  }
}

tb::Component& VideoAgent::make_monitor() {
  if (has_input_) {
    in_mon_ = &create<VspMonitor>("monitor", VspMonitor::Side::kInput);
    return *in_mon_;
  }
  out_mon_ = &create<VspMonitor>("monitor", VspMonitor::Side::kOutput);
  return *out_mon_;
}

sim::Task<> FrameSequence::body(seq::SequenceContext& ctx) {
  auto& sqr = ctx.sequencer_as<VideoSequencer>();
  for (const auto& item : items_) co_await sqr.execute(item);
}

}  // namespace vfab::uvc
