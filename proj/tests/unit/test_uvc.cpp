#include <doctest.h>

#include <map>

#include "test_util.hpp"
#include "vfab/tb/phases.hpp"
#include "vfab/uvc/irq.hpp"
#include "vfab/uvc/srb.hpp"
#include "vfab/uvc/vsp.hpp"

using namespace vfab;
using namespace vfab::uvc;
using sim::SimTime;

namespace {

constexpr SimTime kPeriod{10};

/// Clock, reset and one SRB bus with a register-file slave holding
/// addresses 0x00..0x3C. Anything else answers with err.
struct SrbBench : tb::Component {
  SrbBench(std::string name, tb::ComponentTree& t) : tb::Component(std::move(name), t) {
    auto& clk = kernel().make_signal("bench.clk", 1);
    auto& rst = kernel().make_signal("bench.rst_n", 1);
    clock = std::make_unique<sim::Clock>(kernel(), clk, kPeriod);
    rst.drive(1, SimTime(22));
    bus = SrbIf::create(kernel(), "bench.srb", clk, rst);
    slave = std::make_unique<SrbSlavePort>(bus, [this](BusTxn t) { return handle(t); });
  }
  sim::Task<BusTxn> handle(BusTxn t) {
    if (t.addr > 0x3C || t.addr % 4 != 0) {
      t.resp = BusResp::kError;
    } else if (t.is_write()) {
      regs[t.addr] = t.wdata;
    } else {
      t.rdata = regs[t.addr];
    }
    co_return t;
  }
  void build_phase() override {
    agent = &create<SrbAgent>("agent");
    collector = &create<Collector>("collector");
  }
  void connect_phase() override { agent->monitor().ap.connect(collector->in); }
  sim::Task<> run_phase() override {
    kernel().spawn(slave->run(), "bench.slave", true);
    tree().raise_objection(*this);
    if (scenario) co_await scenario(*this);
    tree().drop_objection(*this);
  }
  bool daemon_run() const override { return false; }

  struct Collector : tb::Component {
    Collector(std::string n, tb::Component* p) : tb::Component(std::move(n), p) {}
    std::vector<BusTxn> seen;
    tb::AnalysisExport<BusTxn> in{*this, "in", [this](const BusTxn& t) { seen.push_back(t); }};
  };

  std::unique_ptr<sim::Clock> clock;
  SrbIf bus;
  std::unique_ptr<SrbSlavePort> slave;
  std::map<std::uint32_t, std::uint32_t> regs;
  SrbAgent* agent = nullptr;
  Collector* collector = nullptr;
  std::function<sim::Task<>(SrbBench&)> scenario;
  std::vector<BusTxn> results;
};

std::vector<BusTxn> g_requests;

sim::Task<> drive_requests(SrbBench& b) {
  SrbAdapter adapter(*b.agent->sequencer());
  for (const auto& r : g_requests) b.results.push_back(co_await adapter.execute(r));
}

sim::Task<> master_requests(SrbBench& b) {
  for (const auto& r : g_requests) b.results.push_back(co_await srb_transfer(b.bus, r));
}

tb::TestResult run_srb(std::vector<BusTxn> reqs, bool active, SrbBench** out, sim::Kernel& k,
                       tb::ComponentTree& tree, bool responsive = true) {
  g_requests = std::move(reqs);
  auto& bench = tree.make_root<SrbBench>("bench");
  bench.slave->responsive = responsive;
  bench.scenario = active ? drive_requests : master_requests;
  *out = &bench;
  (void)k;
  return tb::run_phases(tree, SimTime(1'000'000));
}

tb::ConfigDB srb_config(bool active) {
  tb::ConfigDB cfg;
  cfg.set("**", "vif", std::string("bench.srb"));
  cfg.set("**", "is_active", active);
  return cfg;
}

}  // namespace

TEST_CASE("srb write with one-cycle ack completes in two cycles") {
  sim::Kernel k;
  tb::ComponentTree tree(k, srb_config(true));
  SrbBench* b = nullptr;
  const auto r = run_srb({BusTxn::write(0x04, 0x20)}, true, &b, k, tree);
  CHECK(r.passed);
  REQUIRE(b->results.size() == 1);
  CHECK(b->results[0].ok());
  CHECK(b->results[0].complete_time - b->results[0].issue_time == kPeriod * 2);
  CHECK(b->regs[0x04] == 0x20);
}

TEST_CASE("srb error response and timeout") {
  SUBCASE("decoder error") {
    sim::Kernel k;
    tb::ComponentTree tree(k, srb_config(true));
    SrbBench* b = nullptr;
    const auto r = run_srb({BusTxn::read(0x400)}, true, &b, k, tree);
    CHECK(r.passed);
    REQUIRE(b->results.size() == 1);
    CHECK(b->results[0].resp == BusResp::kError);
  }
  SUBCASE("no ack") {
    sim::Kernel k;
    tb::ComponentTree tree(k, srb_config(true));
    SrbBench* b = nullptr;
    const auto r = run_srb({BusTxn::read(0x04)}, true, &b, k, tree, false);
    CHECK_FALSE(r.passed);
    REQUIRE(r.failures.size() == 1);
    CHECK(r.failures[0].kind == "srb.timeout");
    REQUIRE(b->results.size() == 1);
    CHECK(b->results[0].resp == BusResp::kError);
    CHECK(b->results[0].complete_time - b->results[0].issue_time == kPeriod * kSrbTimeoutCycles);
  }
}

TEST_CASE("srb monitor reconstructs driven transactions") {
  std::vector<BusTxn> reqs = {BusTxn::write(0x00, 1), BusTxn::write(0x08, 0xDEAD), BusTxn::read(0x08),
                              BusTxn::read(0x100), BusTxn::write(0x3C, 7)};
  sim::Kernel k;
  tb::ComponentTree tree(k, srb_config(true));
  SrbBench* b = nullptr;
  CHECK(run_srb(reqs, true, &b, k, tree).passed);
  REQUIRE(b->collector->seen.size() == 5);
  CHECK(b->collector->seen == b->results);
  CHECK(b->collector->seen[2].rdata == 0xDEAD);
}

TEST_CASE("passive monitor output equals active monitor output") {
  std::vector<BusTxn> reqs;
  seq::Rng rng(11, "srb");
  for (int i = 0; i < 30; ++i) {
    const auto addr = static_cast<std::uint32_t>(rng.below(20) * 4);
    reqs.push_back(rng.chance(0.5) ? BusTxn::write(addr, static_cast<std::uint32_t>(rng.next_u64()))
                                   : BusTxn::read(addr));
  }
  std::vector<std::vector<BusTxn>> traces;
  for (bool active : {true, false}) {
    sim::Kernel k;
    tb::ComponentTree tree(k, srb_config(active));
    SrbBench* b = nullptr;
    CHECK(run_srb(reqs, active, &b, k, tree).passed);
    CHECK(b->agent->is_active() == active);
    CHECK((b->agent->driver_component() == nullptr) == !active);
    CHECK(b->collector->seen == b->results);
    traces.push_back(b->collector->seen);
  }
  CHECK(traces[0] == traces[1]);
}

namespace {
sim::Task<> glitch_ack(SrbBench& b) {
  co_await b.kernel().delay(SimTime(100));
  b.bus.ack->drive(1);
  co_await b.kernel().delay(SimTime(10));
  b.bus.ack->drive(0);
  co_await b.kernel().delay(SimTime(30));
}
}  // namespace

TEST_CASE("ack without req is a protocol violation") {
  sim::Kernel k;
  tb::ComponentTree tree(k, srb_config(false));
  auto& bench = tree.make_root<SrbBench>("bench");
  bench.scenario = glitch_ack;
  const auto r = tb::run_phases(tree, SimTime(1'000'000));
  CHECK_FALSE(r.passed);
  REQUIRE(r.failures.size() == 1);
  CHECK(r.failures[0].kind == "srb.protocol");
}

// ---------------------------------------------------------------- video

namespace {

/// Clock plus an input stream and an output stream joined by a one-cycle
/// pass-through (optionally dropping one pixel of line 0).
struct VspBench : tb::Component {
  VspBench(std::string name, tb::ComponentTree& t) : tb::Component(std::move(name), t) {
    auto& clk = kernel().make_signal("vb.clk", 1);
    auto& rst = kernel().make_signal("vb.rst_n", 1);
    clock = std::make_unique<sim::Clock>(kernel(), clk, kPeriod);
    rst.drive(1, SimTime(22));
    in = VspIf::create(kernel(), "vb.in", clk, rst);
    out = VspIf::create(kernel(), "vb.out", clk, rst);
  }
  void build_phase() override {
    agent = &create<VideoAgent>("video_agent0", true, true);
    frames_in = &create<FrameLog>("log_in");
    frames_out = &create<FrameLog>("log_out");
  }
  void connect_phase() override {
    auto geom = [this] { return VspMonitor::Geometry{width, height}; };
    agent->input_monitor()->set_geometry(geom);
    agent->output_monitor()->set_geometry(geom);
    agent->input_monitor()->frames.connect(frames_in->in);
    agent->output_monitor()->frames.connect(frames_out->in);
    agent->input_monitor()->starts.connect([this](const FrameStart& s) { starts.push_back(s); });
  }
  sim::Task<> passthrough() {
    unsigned pixel = 0;
    for (;;) {
      co_await in.clk->posedge();
      bool dv = in.data_valid->high();
      if (in.frame_start->high()) pixel = 0;
      if (dv && drop_pixel_at && pixel++ == *drop_pixel_at) dv = false;
      out.frame_start->drive(in.frame_start->read());
      out.line_valid->drive(in.line_valid->read());
      out.data_valid->drive(dv ? 1 : 0);
      out.data->drive(in.data->read());
    }
  }
  sim::Task<> run_phase() override {
    kernel().spawn(passthrough(), "vb.dut", true);
    tree().raise_objection(*this);
    if (scenario) co_await scenario(*this);
    // Let the output side drain.
    co_await kernel().delay(kPeriod * 8);
    tree().drop_objection(*this);
  }
  bool daemon_run() const override { return false; }

  struct FrameLog : tb::Component {
    FrameLog(std::string n, tb::Component* p) : tb::Component(std::move(n), p) {}
    std::vector<ObservedFrame> seen;
    tb::AnalysisExport<ObservedFrame> in{*this, "in", [this](const ObservedFrame& f) { seen.push_back(f); }};
  };

  std::unique_ptr<sim::Clock> clock;
  VspIf in;
  VspIf out;
  unsigned width = 2;
  unsigned height = 2;
  std::optional<unsigned> drop_pixel_at;
  VideoAgent* agent = nullptr;
  FrameLog* frames_in = nullptr;
  FrameLog* frames_out = nullptr;
  std::vector<FrameStart> starts;
  std::vector<VideoItem> items;
  std::function<sim::Task<>(VspBench&)> scenario;
};

tb::ConfigDB vsp_config() {
  tb::ConfigDB cfg;
  cfg.set("**", "vif", std::string("vb.in"));
  cfg.set("**", "vif_out", std::string("vb.out"));
  return cfg;
}

sim::Task<> send_items(VspBench& b) {
  FrameSequence seq("frames", b.items);
  co_await seq::run_sequence(seq, *b.agent->sequencer(), seq::Rng(1, "v"));
}

struct DvCounter {
  std::vector<unsigned> per_line;
};

sim::Task<> count_dv(VspIf bus, DvCounter* c) {
  bool in_line = false;
  for (;;) {
    co_await bus.clk->posedge();
    if (bus.line_valid->high()) {
      if (!in_line) c->per_line.push_back(0);
      in_line = true;
      if (bus.data_valid->high()) ++c->per_line.back();
    } else {
      in_line = false;
    }
  }
}

}  // namespace

TEST_CASE("2x2 frame goes out in raster order") {
  sim::Kernel k;
  tb::ComponentTree tree(k, vsp_config());
  auto& b = tree.make_root<VspBench>("vb");
  Frame f(2, 2);
  f.pixels = {1, 2, 3, 4};
  b.items = {{f, {}}};
  b.scenario = send_items;
  CHECK(tb::run_phases(tree, SimTime(1'000'000)).passed);
  REQUIRE(b.frames_in->seen.size() == 1);
  CHECK(b.frames_in->seen[0].frame.pixels == std::vector<std::uint32_t>{1, 2, 3, 4});
  REQUIRE(b.frames_out->seen.size() == 1);
  CHECK(b.frames_out->seen[0].frame == f);
  REQUIRE(b.starts.size() == 1);
  CHECK(b.starts[0].time < b.frames_in->seen[0].end);
}

TEST_CASE("64x64 frame without gaps or stalls has 64 data cycles per line") {
  sim::Kernel k;
  tb::ComponentTree tree(k, vsp_config());
  auto& b = tree.make_root<VspBench>("vb");
  b.width = b.height = 64;
  b.items = {{make_frame(64, 64, Pattern::kRamp, 0), {}}};
  b.scenario = send_items;
  DvCounter counter;
  k.spawn(count_dv(b.in, &counter), "counter", true);
  CHECK(tb::run_phases(tree, SimTime(10'000'000)).passed);
  REQUIRE(counter.per_line.size() == 64);
  for (unsigned n : counter.per_line) CHECK(n == 64);
}

TEST_CASE("maximal stall probability still completes") {
  sim::Kernel k;
  tb::ComponentTree tree(k, vsp_config());
  auto& b = tree.make_root<VspBench>("vb");
  b.width = 8;
  b.height = 4;
  VspTiming t;
  t.pixel_stall_probability = 1.0;
  const Frame f = make_frame(8, 4, Pattern::kRandom, 3);
  b.items = {{f, t}};
  b.scenario = send_items;
  CHECK(tb::run_phases(tree, SimTime(1'000'000)).passed);
  REQUIRE(b.frames_out->seen.size() == 1);
  CHECK(b.frames_out->seen[0].frame == f);
}

TEST_CASE("video round trip through a pass-through for random frames and timings") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    sim::Kernel k;
    tb::ComponentTree tree(k, vsp_config());
    auto& b = tree.make_root<VspBench>("vb");
    seq::Rng rng(seed, "roundtrip");
    b.width = static_cast<unsigned>(rng.uniform(1, 12));
    b.height = static_cast<unsigned>(rng.uniform(1, 6));
    for (int i = 0; i < 3; ++i) {
      b.items.push_back({make_frame(b.width, b.height, Pattern::kRandom, rng.next_u64()), VspTiming::random(rng)});
    }
    b.scenario = send_items;
    CHECK(tb::run_phases(tree, SimTime(10'000'000)).passed);
    REQUIRE(b.frames_out->seen.size() == 3);
    REQUIRE(b.frames_in->seen.size() == 3);
    for (int i = 0; i < 3; ++i) {
      CHECK(b.frames_in->seen[i].frame == b.items[i].frame);
      CHECK(b.frames_out->seen[i].frame == b.items[i].frame);
      CHECK(b.frames_out->seen[i].intact);
    }
  }
}

TEST_CASE("a dropped pixel is a geometry failure on its line") {
  sim::Kernel k;
  tb::ComponentTree tree(k, vsp_config());
  auto& b = tree.make_root<VspBench>("vb");
  b.width = 4;
  b.height = 2;
  b.drop_pixel_at = 1;
  b.items = {{make_frame(4, 2, Pattern::kRamp, 0), {}}};
  b.scenario = send_items;
  const auto r = tb::run_phases(tree, SimTime(1'000'000));
  CHECK_FALSE(r.passed);
  REQUIRE(r.failures.size() == 1);
  CHECK(r.failures[0].kind == "vsp.geometry");
  CHECK(r.failures[0].message.find("line 0 has 3 pixels") != std::string::npos);
  CHECK(r.failures[0].source == "vb.video_agent0.out_monitor");
}

namespace {
sim::Task<> restart_mid_frame(VspBench& b) {
  // Hand-driven wires: frame_start, two pixels of line 0, one of line 1, then
  // a new frame_start.
  auto& in = b.in;
  co_await in.clk->posedge();
  while (!in.rst_n->high()) co_await in.clk->posedge();
  in.frame_start->drive(1);
  co_await in.clk->posedge();
  in.frame_start->drive(0);
  for (int px : {1, 2, -1, 3}) {
    in.line_valid->drive(px < 0 ? 0 : 1);
    in.data_valid->drive(px < 0 ? 0 : 1);
    if (px >= 0) in.data->drive(static_cast<std::uint64_t>(px));
    co_await in.clk->posedge();
  }
  in.line_valid->drive(0);
  in.data_valid->drive(0);
  in.frame_start->drive(1);
  co_await in.clk->posedge();
  in.frame_start->drive(0);
  co_await in.clk->posedge();
}
}  // namespace

TEST_CASE("frame_start in the middle of a frame is a framing failure") {
  sim::Kernel k;
  tb::ComponentTree tree(k, vsp_config());
  auto& b = tree.make_root<VspBench>("vb");
  b.scenario = restart_mid_frame;
  const auto r = tb::run_phases(tree, SimTime(1'000'000));
  CHECK_FALSE(r.passed);
  std::size_t framing = 0;
  for (const auto& f : r.failures) {
    if (f.kind == "vsp.framing") {
      ++framing;
      CHECK(f.message.find("pixel 4 of 4") != std::string::npos);
    }
  }
  CHECK(framing == 2);  // input and output monitors both see it
}

// ------------------------------------------------------------ interrupts

TEST_CASE("interrupt matching") {
  const SimTime min{0};
  const SimTime max{80};
  SUBCASE("rise inside the window passes") {
    const auto v = check_interrupt({{SimTime(110), true}}, {{SimTime(100), min, max, true, "frame"}});
    CHECK(v.spurious.empty());
    CHECK(v.missing.empty());
    CHECK(v.matched == 1);
  }
  SUBCASE("rise without a live expectation is spurious") {
    const auto v = check_interrupt({{SimTime(110), true}}, {{SimTime(100), min, max, false, "frame"}});
    CHECK(v.spurious == std::vector<SimTime>{SimTime(110)});
    CHECK(v.missing.empty());
  }
  SUBCASE("no rise is missing") {
    const auto v = check_interrupt({}, {{SimTime(100), min, max, true, "frame"}});
    CHECK(v.missing.size() == 1);
  }
  SUBCASE("late rise is both missing and spurious") {
    const auto v = check_interrupt({{SimTime(500), true}}, {{SimTime(100), min, max, true, "frame"}});
    CHECK(v.missing.size() == 1);
    CHECK(v.spurious.size() == 1);
  }
  SUBCASE("line still high covers a later expectation") {
    const auto v = check_interrupt({{SimTime(110), true}}, {{SimTime(100), min, max, true, "frame0"},
                                                           {SimTime(900), min, max, true, "frame1"}});
    CHECK(v.matched == 2);
    CHECK(v.missing.empty());
  }
  SUBCASE("one rise serves one expectation") {
    const auto v = check_interrupt({{SimTime(110), true}, {SimTime(120), false}},
                                   {{SimTime(100), min, max, true, "a"}, {SimTime(105), min, max, true, "b"}});
    CHECK(v.matched == 1);
    CHECK(v.missing.size() == 1);
  }
}

namespace {

struct IrqBench : tb::Component {
  IrqBench(std::string name, tb::ComponentTree& t) : tb::Component(std::move(name), t) {
    irq = &kernel().make_signal("ib.irq", 1);
  }
  void build_phase() override {
    checker = &create<InterruptChecker>("irq_checker0", 0);
    checker->set_binding("ib.irq");
  }
  sim::Task<> run_phase() override {
    tree().raise_objection(*this);
    co_await kernel().delay(SimTime(100));
    checker->arm(kernel().now(), enabled, "frame done");
    if (fire_at) {
      co_await kernel().delay(*fire_at);
      irq->drive(1);
    }
    tree().drop_objection(*this);
  }
  bool daemon_run() const override { return false; }
  sim::Signal* irq = nullptr;
  InterruptChecker* checker = nullptr;
  bool enabled = true;
  std::optional<SimTime> fire_at;
};

tb::TestResult irq_run(bool enabled, std::optional<SimTime> fire_at) {
  sim::Kernel k;
  tb::ComponentTree tree(k);
  auto& b = tree.make_root<IrqBench>("ib");
  b.enabled = enabled;
  b.fire_at = fire_at;
  return tb::run_phases(tree, SimTime(1'000'000));
}

}  // namespace

TEST_CASE("interrupt checker verdicts") {
  CHECK(irq_run(true, SimTime(20)).passed);
  const auto spurious = irq_run(false, SimTime(20));
  REQUIRE(spurious.failures.size() == 1);
  CHECK(spurious.failures[0].kind == "irq.spurious");
  const auto missing = irq_run(true, std::nullopt);
  REQUIRE(missing.failures.size() == 1);
  CHECK(missing.failures[0].kind == "irq.missing");
  // The checker holds the test open until the window has closed.
  CHECK(missing.end_time >= SimTime(180));
}
