#include <fmt/format.h>

#include "vfab/demo/harness.hpp"
#include "vfab/ipxact/flow.hpp"

namespace vfab::demo {

GancSettings GancSettings::random(seq::Rng& rng) {
  GancSettings s;
  s.enable = rng.chance(0.9);
  s.gain = static_cast<std::uint32_t>(rng.uniform(0, 255));
  s.offset = static_cast<std::uint32_t>(rng.uniform(0, 255));
  return s;
}

sim::Task<> GancConfigSeq::body(seq::SequenceContext& ctx) {
  co_await ctx.reg_write("ganc.CTRL", s_.enable ? 1 : 0);
  co_await ctx.reg_write("ganc.GAIN", s_.gain);
  co_await ctx.reg_write("ganc.OFFSET", s_.offset);
  co_await ctx.reg_write("ganc.WIDTH", s_.width);
  co_await ctx.reg_write("ganc.HEIGHT", s_.height);
  co_await ctx.reg_write("ganc.INT_ENABLE", s_.irq_enable ? 1 : 0);
  co_await ctx.reg_read("ganc.GAIN");
  co_await ctx.reg_read("ganc.OFFSET");
}

Scenario scenario_for(std::uint64_t seed) {
  seq::Rng rng(seed, "tb.scenario");
  Scenario sc;
  sc.settings = GancSettings::random(rng);
  sc.settings.irq_enable = true;
  sc.pattern = static_cast<uvc::Pattern>(rng.uniform(0, 3));
  sc.frame_seed = static_cast<std::uint32_t>(rng.next_u64());
  return sc;
}

namespace {

constexpr std::uint64_t kFrameTimeout = 100000;  // cycles

uvc::VideoItem random_item(seq::Rng& rng, unsigned w, unsigned h) {
  uvc::VideoItem item;
  const auto pattern = static_cast<uvc::Pattern>(rng.uniform(0, 3));
  item.frame = uvc::make_frame(w, h, pattern, rng.next_u64());
  item.timing = uvc::VspTiming::random(rng);
  return item;
}

sim::Task<> expect_output(TestContext& ctx, std::uint64_t n) {
  if (!co_await ctx.wait_output(n, kFrameTimeout * n)) {
    ctx.bench().fail("test.timeout", fmt::format("{} output frame(s) expected, {} seen", n,
                                                 ctx.output_monitor().collected()));
  }
}

sim::Task<> smoke_ganc(TestContext& ctx) {
  GancConfigSeq cfg(GancSettings::random(ctx.rng()));
  co_await ctx.run(cfg);
  co_await ctx.send(std::vector<uvc::VideoItem>(1, random_item(ctx.rng(), 64, 64)));
  co_await expect_output(ctx, 1);
}

sim::Task<> smoke_thr(TestContext& ctx) {
  co_await ctx.write("thr.CTRL", 1);
  co_await ctx.write("thr.THRESH", static_cast<std::uint32_t>(ctx.rng().uniform(0, 255)));
  co_await ctx.write("thr.WIDTH", 32);
  co_await ctx.write("thr.HEIGHT", 32);
  co_await ctx.send(std::vector<uvc::VideoItem>(1, random_item(ctx.rng(), 32, 32)));
  co_await expect_output(ctx, 1);
}

sim::Task<> reg_builtin_ganc(TestContext& ctx) {
  IpEnv& env = *ctx.bench().ip_env();
  ctx.builtins.push_back(co_await reg::reset_check_seq(env.regs(), env.map(), "ganc"));
  ctx.builtins.push_back(co_await reg::bitbash_seq(env.regs(), env.map(), "ganc"));
  seq::Rng rng = ctx.rng().substream("write_read_all");
  ctx.builtins.push_back(co_await reg::write_read_all_seq(env.regs(), env.map(), rng, "ganc"));
}

sim::Task<> irq_ganc(TestContext& ctx) {
  GancSettings s = GancSettings::random(ctx.rng());
  s.width = 16;
  s.height = 16;
  s.irq_enable = true;
  GancConfigSeq cfg(s);
  co_await ctx.run(cfg);
  co_await ctx.send(std::vector<uvc::VideoItem>(1, random_item(ctx.rng(), 16, 16)));
  co_await expect_output(ctx, 1);
  co_await ctx.read("ganc.INT_STATUS");
  co_await ctx.write("ganc.INT_STATUS", 1);

  // Disabled: the frame still completes but the line must stay low.
  co_await ctx.write("ganc.INT_ENABLE", 0);
  co_await ctx.send(std::vector<uvc::VideoItem>(1, random_item(ctx.rng(), 16, 16)));
  co_await expect_output(ctx, 2);
  co_await ctx.read("ganc.INT_STATUS");
  co_await ctx.write("ganc.INT_STATUS", 1);
}

sim::Task<> frames_ganc(TestContext& ctx) {
  GancConfigSeq cfg(GancSettings::random(ctx.rng()));
  co_await ctx.run(cfg);
  const auto frames = static_cast<std::uint64_t>(ctx.knob("frames", 10));
  seq::Rng& rng = ctx.rng();
  for (std::uint64_t i = 0; i < frames; ++i) {
    const auto w = static_cast<unsigned>(rng.uniform(1, 64));
    const auto h = static_cast<unsigned>(rng.uniform(1, 64));
    co_await ctx.write("ganc.GAIN", static_cast<std::uint32_t>(rng.uniform(0, 255)));
    co_await ctx.write("ganc.OFFSET", static_cast<std::uint32_t>(rng.uniform(0, 255)));
    co_await ctx.write("ganc.WIDTH", w);
    co_await ctx.write("ganc.HEIGHT", h);
    co_await ctx.send(std::vector<uvc::VideoItem>(1, random_item(rng, w, h)));
    co_await expect_output(ctx, i + 1);
  }
}

sim::Task<> vseq_ganc(TestContext& ctx) {
  const Scenario sc = scenario_for(ctx.seed());
  uvc::VideoItem item;
  item.frame = uvc::make_frame(sc.settings.width, sc.settings.height, sc.pattern, sc.frame_seed);
  item.timing = uvc::VspTiming::random(ctx.rng());
  seq::VirtualSequence v("vseq_ganc");
  v.then("reg_agent0.sequencer", std::make_shared<GancConfigSeq>(sc.settings));
  v.then("video_agent0.sequencer", std::make_shared<uvc::FrameSequence>("frame", std::vector{item}));
  co_await seq::run_virtual(v, *ctx.bench().ip_env(), ctx.rng().substream("vseq"));
  co_await expect_output(ctx, 1);
  co_await ctx.read("ganc.INT_STATUS");
  co_await ctx.write("ganc.INT_STATUS", 1);
}

sw::TestProgram soc_program(const Scenario& sc) {
  const GancSettings& s = sc.settings;
  sw::TestProgram p;
  p.name = "reuse_soc_vri";
  p.write("ganc.CTRL", s.enable ? 1 : 0)
      .write("ganc.GAIN", s.gain)
      .write("ganc.OFFSET", s.offset)
      .write("ganc.WIDTH", s.width)
      .write("ganc.HEIGHT", s.height)
      .write("ganc.INT_ENABLE", s.irq_enable ? 1 : 0)
      .read("ganc.GAIN")
      .read("ganc.OFFSET")
      .vri("SEND_FRAME", {std::to_string(s.width), std::to_string(s.height), uvc::to_string(sc.pattern),
                          std::to_string(sc.frame_seed)})
      .irq_wait(0, kFrameTimeout)
      .read("ganc.INT_STATUS")
      .write("ganc.INT_STATUS", 1);
  return p;
}

sim::Task<> run_program(TestContext& ctx, sw::TestProgram prog) {
  const sw::ProgramResult res = co_await ctx.bench().soc_env()->core().execute(std::move(prog));
  if (!res.ok) ctx.notes.push_back(fmt::format("program stopped: {}", res.message));
}

sim::Task<> reuse_soc_vri(TestContext& ctx) {
  sw::TestProgram prog;
  if (const auto file = ctx.text_knob("program")) {
    prog = sw::parse_program(ipxact::read_file(*file), *file);
  } else {
    prog = soc_program(scenario_for(ctx.seed()));
  }
  co_await run_program(ctx, std::move(prog));
  co_await expect_output(ctx, 1);
}

sim::Task<> reg_reuse(TestContext& ctx) {
  std::shared_ptr<seq::Sequence> s = ctx.injected();
  if (!s) s = std::make_shared<GancConfigSeq>(GancSettings::random(ctx.rng()));
  co_await ctx.run(*s);
}

sim::Task<> subsys_chain(TestContext& ctx) {
  seq::Rng& rng = ctx.rng();
  co_await ctx.write("ganc.CTRL", 1);
  co_await ctx.write("ganc.GAIN", 0x20);
  co_await ctx.write("ganc.OFFSET", static_cast<std::uint32_t>(rng.uniform(0, 255)));
  co_await ctx.write("ganc.WIDTH", 32);
  co_await ctx.write("ganc.HEIGHT", 32);
  co_await ctx.write("thr.CTRL", 1);
  co_await ctx.write("thr.THRESH", static_cast<std::uint32_t>(rng.uniform(0, 255)));
  co_await ctx.write("thr.WIDTH", 32);
  co_await ctx.write("thr.HEIGHT", 32);
  const auto frames = static_cast<std::uint64_t>(ctx.knob("frames", 3));
  std::vector<uvc::VideoItem> items;
  for (std::uint64_t i = 0; i < frames; ++i) items.push_back(random_item(rng, 32, 32));
  co_await ctx.send(std::move(items));
  co_await expect_output(ctx, frames);
}

const std::vector<check::Bin>& gain_bins() {
  static const std::vector<check::Bin> bins{check::Bin::value("zero", 0), check::Bin::range("low", 1, 15),
                                            check::Bin::value("unity", 16), check::Bin::range("high", 17, 255)};
  return bins;
}

sim::Task<> gsa_gain(TestContext& ctx) {
  SocEnv& soc = *ctx.bench().soc_env();
  sw::TestProgram setup;
  setup.name = "gsa_setup";
  setup.write("ganc.WIDTH", 16).write("ganc.HEIGHT", 16).write("thr.WIDTH", 16).write("thr.HEIGHT", 16);
  setup.write("ganc.CTRL", 1);
  co_await run_program(ctx, std::move(setup));

  sw::SwFunctionDecl fn;
  fn.name = "configure_gain";
  fn.params.push_back(sw::SwParam{"gain", seq::Domain::range(0, 255), gain_bins()});
  sw::CoreModel* core = &soc.core();
  fn.variables.push_back(sw::SwVariable{"frames_done", [core] { return core->variable("frames_done"); }, {}});
  fn.cover_group = "gain_cov";
  fn.body = [](const seq::Item& args) {
    const std::int64_t g = args.at("gain");
    return sw::parse_program(
        fmt::format("w ganc.GAIN {0}\nvri SEND_FRAME 16 16 random {0}\nset frames_done $ret\n", g));
  };
  if (!soc.gsa().declared(fn.name)) soc.gsa().declare(std::move(fn));

  const auto calls = static_cast<std::uint64_t>(ctx.knob("calls", 20));
  seq::Rng rng = ctx.rng().substream("gsa");
  for (std::uint64_t i = 0; i < calls; ++i) co_await soc.gsa().call("configure_gain", rng);
  co_await expect_output(ctx, calls);
}

}  // namespace

const std::vector<TestInfo>& test_registry() {
  static const std::vector<TestInfo> tests{
      {"smoke_ganc", "random GANC settings, one 64x64 frame", {Level::kIp, Level::kSubsys, Level::kSoc}, "ganc",
       smoke_ganc},
      {"smoke_thr", "one 32x32 frame through THR", {Level::kIp}, "thr", smoke_thr},
      {"reg_builtin_ganc", "reset check, bit bash and write/read-all on GANC", {Level::kIp}, "ganc",
       reg_builtin_ganc},
      {"irq_ganc", "frame-done interrupt enabled, then disabled", {Level::kIp}, "ganc", irq_ganc},
      {"frames_ganc", "random-geometry frames (knob frames, default 10)", {Level::kIp}, "ganc", frames_ganc},
      {"vseq_ganc", "virtual sequence: configuration then one frame", {Level::kIp}, "ganc", vseq_ganc},
      {"reg_reuse", "one GANC configuration sequence at any level", {Level::kIp, Level::kSubsys, Level::kSoc},
       "ganc", reg_reuse},
      {"subsys_chain", "GANC into THR (knob frames, default 3)", {Level::kSubsys, Level::kSoc}, "ganc",
       subsys_chain},
      {"reuse_soc_vri", "software program configures GANC and sends a frame via VRI", {Level::kSoc}, "ganc",
       reuse_soc_vri},
      {"gsa_gain", "randomized configure_gain calls (knob calls, default 20)", {Level::kSoc}, "ganc", gsa_gain},
  };
  return tests;
}

}  // namespace vfab::demo
