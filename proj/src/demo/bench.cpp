#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "vfab/demo/harness.hpp"
#include "vfab/tb/phases.hpp"

namespace vfab::demo {

namespace embedded {
extern const std::string_view kGancBundle;
extern const std::string_view kThrBundle;
}  // namespace embedded

std::string to_string(Level l) {
  switch (l) {
    case Level::kIp:
      return "ip";
    case Level::kSubsys:
      return "subsys";
    case Level::kSoc:
      return "soc";
  }
  return "?";
}

std::optional<Level> parse_level(std::string_view text) {
  if (text == "ip") return Level::kIp;
  if (text == "subsys") return Level::kSubsys;
  if (text == "soc") return Level::kSoc;
  return std::nullopt;
}

const ipxact::Bundle& builtin_bundle(const std::string& block) {
  static const ipxact::Bundle ganc = ipxact::load_bundle(embedded::kGancBundle);
  static const ipxact::Bundle thr = ipxact::load_bundle(embedded::kThrBundle);
  if (block == "ganc") return ganc;
  if (block == "thr") return thr;
  throw UsageError(fmt::format("no shipped bundle for block {}", block));
}

namespace {

/// Non-daemon component running the test body under an objection.
class TestRunner : public tb::Component {
 public:
  TestRunner(std::string name, tb::Component* parent, Bench::Body body, TestContext* ctx)
      : tb::Component(std::move(name), parent, tb::ComponentKind::kCustom), body_(body), ctx_(ctx) {}

  bool daemon_run() const override { return false; }

  sim::Task<> run_phase() override {
    tree().raise_objection(*this);
    try {
      if (body_ != nullptr && ctx_ != nullptr) co_await body_(*ctx_);
    } catch (const std::exception& e) {
      fail("test.error", e.what());
    }
    // Let the last frame drain through the monitors.
    co_await kernel().delay(sim::kDefaultClockPeriod * 10);
    tree().drop_objection(*this);
  }

 private:
  Bench::Body body_;
  TestContext* ctx_;
};

void add_scoreboard(RunResult& r, const check::FrameScoreboard& sb) {
  ScoreboardStat s;
  s.path = sb.path();
  s.checked = sb.checked();
  s.passed = sb.passed();
  s.mismatches = sb.mismatches();
  s.pending = sb.pending();
  s.reports = sb.reports();
  s.snapshots = sb.snapshots();
  r.mismatches += s.mismatches;
  r.scoreboards.push_back(std::move(s));
}

}  // namespace

Bench::Bench(std::string name, tb::ComponentTree& tree, BenchSpec spec, check::CoverageDb& coverage)
    : tb::Component(std::move(name), tree), spec_(std::move(spec)), coverage_(coverage) {
  if (!spec_.ganc_bundle) spec_.ganc_bundle = std::shared_ptr<const ipxact::Bundle>(&builtin_bundle("ganc"), [](auto*) {});
  if (!spec_.thr_bundle) spec_.thr_bundle = std::shared_ptr<const ipxact::Bundle>(&builtin_bundle("thr"), [](auto*) {});

  sim::Kernel& k = kernel();
  sim::Signal& clk = k.make_signal("dut.clk", 1, 0);
  sim::Signal& rst_n = k.make_signal("dut.rst_n", 1, 0);
  rst_n.drive(1, sim::SimTime(25));
  clock_ = std::make_unique<sim::Clock>(k, clk, sim::kDefaultClockPeriod);

  switch (spec_.level) {
    case Level::kIp:
      make_ip_level();
      break;
    case Level::kSubsys:
      make_subsys("dut.ss", 0);
      break;
    case Level::kSoc: {
      make_subsys("dut.ss", kSocSubsysBase);
      core_bus_ = "dut.soc.srb";
      uvc::SrbIf soc = uvc::SrbIf::create(k, core_bus_, clk, rst_n);
      mailbox_ = std::make_unique<sw::VriMailbox>();
      auto xbar = std::make_unique<Interconnect>(k, "dut.soc.xbar", soc);
      xbar->add_bus(kSocSubsysBase, 0x10000000, uvc::SrbIf::bind(k, ss_spec_.host_bus));
      sw::VriMailbox* mb = mailbox_.get();
      xbar->add_route(Interconnect::Route{kSocVriBase, 0x1000,
                                          [mb](uvc::BusTxn t) { return sw::mailbox_access(mb, t); }});
      xbars_.push_back(std::move(xbar));
      break;
    }
  }
  for (auto& d : duts_) d->start();
  for (auto& x : xbars_) x->start();
}

Bench::~Bench() = default;

void Bench::make_ip_level() {
  sim::Kernel& k = kernel();
  const std::string& ip = spec_.ip;
  if (ip != "ganc" && ip != "thr") throw UsageError(fmt::format("unknown IP {}", ip));
  const std::string p = "dut." + ip;
  IpPorts ports;
  ports.bus = uvc::SrbIf::create(k, p + ".srb", k.signal("dut.clk"), k.signal("dut.rst_n"));
  ports.vin = uvc::VspIf::create(k, p + ".vin", k.signal("dut.clk"), k.signal("dut.rst_n"));
  ports.vout = uvc::VspIf::create(k, p + ".vout", k.signal("dut.clk"), k.signal("dut.rst_n"));
  ports.irq = &k.make_signal(p + ".irq", 1, 0);
  duts_.push_back(std::make_unique<PixelIp>(k, ip == "ganc" ? PixelIp::Kind::kGanc : PixelIp::Kind::kThr, ip,
                                            ports, spec_.fault));
  ip_spec_.block = ip;
  ip_spec_.bundle = ip == "ganc" ? spec_.ganc_bundle.get() : spec_.thr_bundle.get();
  ip_spec_.model = ip == "ganc" ? check::ganc_model() : check::thr_model();
  ip_spec_.base = 0;
  ip_spec_.bus = p + ".srb";
  ip_spec_.vin = p + ".vin";
  ip_spec_.vout = p + ".vout";
  ip_spec_.irq = p + ".irq";
  ip_spec_.active = true;
}

void Bench::make_subsys(const std::string& prefix, std::uint64_t base) {
  sim::Kernel& k = kernel();
  sim::Signal& clk = k.signal("dut.clk");
  sim::Signal& rst_n = k.signal("dut.rst_n");
  ss_spec_.ganc = spec_.ganc_bundle.get();
  ss_spec_.thr = spec_.thr_bundle.get();
  ss_spec_.base = base;
  ss_spec_.host_bus = prefix + ".srb";
  ss_spec_.ganc_bus = prefix + ".ganc.srb";
  ss_spec_.thr_bus = prefix + ".thr.srb";
  ss_spec_.vin = prefix + ".vin";
  ss_spec_.link = prefix + ".link";
  ss_spec_.vout = prefix + ".vout";
  ss_spec_.ganc_irq = prefix + ".ganc.irq";
  ss_spec_.thr_irq = prefix + ".thr.irq";
  ss_spec_.host_active = spec_.level == Level::kSubsys;

  uvc::SrbIf host = uvc::SrbIf::create(k, ss_spec_.host_bus, clk, rst_n);
  IpPorts g;
  g.bus = uvc::SrbIf::create(k, ss_spec_.ganc_bus, clk, rst_n);
  IpPorts t;
  t.bus = uvc::SrbIf::create(k, ss_spec_.thr_bus, clk, rst_n);
  const uvc::VspIf vin = uvc::VspIf::create(k, ss_spec_.vin, clk, rst_n);
  const uvc::VspIf link = uvc::VspIf::create(k, ss_spec_.link, clk, rst_n);
  const uvc::VspIf vout = uvc::VspIf::create(k, ss_spec_.vout, clk, rst_n);
  g.irq = &k.make_signal(ss_spec_.ganc_irq, 1, 0);
  t.irq = &k.make_signal(ss_spec_.thr_irq, 1, 0);
  if (spec_.fault.kind == FaultKind::kSwapChain) {
    t.vin = vin;
    t.vout = link;
    g.vin = link;
    g.vout = vout;
  } else {
    g.vin = vin;
    g.vout = link;
    t.vin = link;
    t.vout = vout;
  }
  // The structural fault lives in the wiring; the IP models stay clean.
  const FaultMode ip_fault = spec_.fault.kind == FaultKind::kSwapChain ? FaultMode{} : spec_.fault;
  duts_.push_back(std::make_unique<PixelIp>(k, PixelIp::Kind::kGanc, "ganc", g, ip_fault));
  duts_.push_back(std::make_unique<PixelIp>(k, PixelIp::Kind::kThr, "thr", t));

  auto xbar = std::make_unique<Interconnect>(k, prefix + ".xbar", host);
  xbar->add_bus(static_cast<std::uint32_t>(base), 0x1000, g.bus);
  xbar->add_bus(static_cast<std::uint32_t>(base + kThrOffset), 0x1000, t.bus);
  xbars_.push_back(std::move(xbar));
}

void Bench::build_phase() {
  switch (spec_.level) {
    case Level::kIp:
      ip_env_ = &create<IpEnv>(spec_.ip + "_env", ip_spec_, coverage_);
      break;
    case Level::kSubsys:
      ss_env_ = &create<SubsysEnv>("ss_env", ss_spec_, coverage_);
      break;
    case Level::kSoc:
      soc_env_ = &create<SocEnv>("soc_env", SocEnvSpec{ss_spec_, core_bus_, mailbox_.get()}, coverage_);
      break;
  }
  create<TestRunner>("test", body_, ctx_);
}

void Bench::connect_phase() {
  if (IpEnv* g = ganc_env()) {
    g->reg_agent().monitor().ap.connect([this](const uvc::BusTxn& t) { ganc_trace_.push_back(t); });
  }
}

SubsysEnv* Bench::subsys_env() const {
  if (ss_env_ != nullptr) return ss_env_;
  if (soc_env_ != nullptr) return &soc_env_->subsys();
  return nullptr;
}

IpEnv* Bench::ganc_env() const {
  if (ip_env_ != nullptr) return ip_env_->spec().block == "ganc" ? ip_env_ : nullptr;
  if (SubsysEnv* ss = subsys_env()) return &ss->ganc_env();
  return nullptr;
}

PixelIp* Bench::dut(const std::string& block) const {
  for (const auto& d : duts_) {
    if (d->name() == block) return d.get();
  }
  return nullptr;
}

TestContext::TestContext(Bench& bench, std::uint64_t seed, std::shared_ptr<seq::Sequence> injected)
    : bench_(bench), injected_(std::move(injected)), seed_(seed), rng_(seed, "tb.test") {}

std::int64_t TestContext::knob(const std::string& key, std::int64_t fallback) const {
  return bench_.config().get_as<std::int64_t>("tb.test", key).value_or(fallback);
}

std::optional<std::string> TestContext::text_knob(const std::string& key) const {
  const auto v = bench_.config().get("tb.test", key);
  if (!v) return std::nullopt;
  return tb::to_string(*v);
}

seq::SequencerBase& TestContext::reg_sequencer() const {
  switch (level()) {
    case Level::kIp:
      return *bench_.ip_env()->reg_agent().sequencer();
    case Level::kSubsys:
      return *bench_.subsys_env()->host_agent().sequencer();
    case Level::kSoc:
      return bench_.soc_env()->core_sequencer();
  }
  throw std::logic_error("unknown level");
}

uvc::VideoSequencer& TestContext::video_sequencer() const {
  if (level() == Level::kIp) return *bench_.ip_env()->video_agent().sequencer();
  return *bench_.subsys_env()->video_agent().sequencer();
}

uvc::VspMonitor& TestContext::output_monitor() const {
  if (level() == Level::kIp) return *bench_.ip_env()->video_agent().output_monitor();
  return *bench_.subsys_env()->video_agent().output_monitor();
}

sim::Task<> TestContext::run(seq::Sequence& s) {
  co_await seq::run_sequence(s, reg_sequencer(), rng_.substream(s.name()));
}

sim::Task<> TestContext::write(std::string reg, std::uint32_t value) {
  seq::SequenceContext sc(kernel(), &reg_sequencer(), rng_.substream("write"));
  co_await sc.reg_write(std::move(reg), value);
}

sim::Task<std::uint32_t> TestContext::read(std::string reg) {
  seq::SequenceContext sc(kernel(), &reg_sequencer(), rng_.substream("read"));
  co_return co_await sc.reg_read(std::move(reg));
}

sim::Task<> TestContext::send(std::vector<uvc::VideoItem> items) {
  uvc::FrameSequence fs("frames", std::move(items));
  co_await seq::run_sequence(fs, video_sequencer(), rng_.substream("frames"));
}

sim::Task<bool> TestContext::wait_output(std::uint64_t n, std::uint64_t timeout_cycles) {
  sim::Signal& clk = kernel().signal("dut.clk");
  const uvc::VspMonitor& mon = output_monitor();
  for (std::uint64_t i = 0; mon.collected() < n; ++i) {
    if (i >= timeout_cycles) co_return false;
    co_await clk.posedge();
  }
  co_return true;
}

sim::Task<> TestContext::cycles(std::uint64_t n) {
  sim::Signal& clk = kernel().signal("dut.clk");
  for (std::uint64_t i = 0; i < n; ++i) co_await clk.posedge();
}

const TestInfo* find_test(std::string_view name) {
  for (const auto& t : test_registry()) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

const ScoreboardStat* RunResult::scoreboard(std::string_view path_suffix) const {
  for (const auto& s : scoreboards) {
    if (s.path.size() >= path_suffix.size() &&
        std::string_view(s.path).substr(s.path.size() - path_suffix.size()) == path_suffix) {
      return &s;
    }
  }
  return nullptr;
}

std::size_t RunResult::count(std::string_view kind) const {
  std::size_t n = 0;
  for (const auto& f : failures) n += f.kind == kind ? 1 : 0;
  return n;
}

RunResult run_test(const RunOptions& options) {
  const TestInfo* info = find_test(options.test);
  if (info == nullptr) throw UsageError(fmt::format("unknown test '{}'", options.test));
  const Level level = options.level.value_or(info->levels.front());
  if (std::find(info->levels.begin(), info->levels.end(), level) == info->levels.end()) {
    throw UsageError(fmt::format("test {} does not run at level {}", info->name, to_string(level)));
  }

  tb::ConfigDB config;
  config.set("**", "seed", static_cast<std::int64_t>(options.seed));
  try {
    if (!options.config_file.empty()) {
      std::ifstream in(options.config_file);
      if (!in) throw UsageError(fmt::format("cannot read config file {}", options.config_file));
      config.load(in);
    }
    if (!options.config_lines.empty()) {
      std::istringstream in(fmt::format("{}", fmt::join(options.config_lines, "\n")));
      config.load(in);
    }
  } catch (const UsageError&) {
    throw;
  } catch (const std::runtime_error& e) {
    throw UsageError(fmt::format("config: {}", e.what()));
  }
  if (options.fault != "none" && !options.fault.empty()) config.set("dut", "fault", options.fault);

  BenchSpec spec;
  spec.level = level;
  spec.ip = info->ip;
  try {
    const auto fault = config.get("dut", "fault");
    spec.fault = FaultMode::parse(fault ? tb::to_string(*fault) : "none");
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (!options.bundle_file.empty()) {
    auto b = std::make_shared<const ipxact::Bundle>(ipxact::load_bundle(ipxact::read_file(options.bundle_file)));
    const std::string block = b->ir.blocks.empty() ? "" : b->ir.blocks.front().name;
    if (block == "ganc") {
      spec.ganc_bundle = b;
    } else if (block == "thr") {
      spec.thr_bundle = b;
    } else {
      throw UsageError(fmt::format("bundle {} describes no ganc or thr block", options.bundle_file));
    }
  }

  sim::Kernel kernel;
  check::CoverageDb coverage;
  tb::ComponentTree tree(kernel, std::move(config));
  Bench& bench = tree.make_root<Bench>("tb", spec, coverage);
  TestContext ctx(bench, options.seed, options.sequence);
  bench.set_test(info->body, &ctx);
  tb::TestResult tr = tb::run_phases(tree, options.watchdog);

  RunResult r;
  r.test = info->name;
  r.level = level;
  r.seed = options.seed;
  r.fault = spec.fault.to_string();
  r.passed = tr.passed;
  r.hang = tr.hang;
  r.end_time = tr.end_time;
  r.failures = std::move(tr.failures);
  r.report_lines = std::move(tr.report_lines);
  for (tb::Component* c : tree.all()) {
    if (auto* sb = dynamic_cast<check::FrameScoreboard*>(c)) add_scoreboard(r, *sb);
  }
  for (const auto& g : coverage.groups()) {
    CoverageStat s;
    s.group = g->name();
    s.percent = g->percent();
    s.hit_bins = g->hit_bins();
    s.total_bins = g->total_bins();
    for (const auto& cp : g->coverpoints()) {
      std::uint64_t hits = cp.uncovered();
      for (std::size_t i = 0; i < cp.bins().size(); ++i) hits += cp.hits(i);
      if (hits != cp.samples()) s.accounting_ok = false;
    }
    r.coverage.push_back(std::move(s));
  }
  r.coverage_report = check::cov_report(coverage);
  r.trace_hash = kernel.trace_hash();
  r.ganc_bus = bench.ganc_bus_trace();
  r.builtins = ctx.builtins;
  if (SocEnv* soc = bench.soc_env()) {
    r.gsa_calls = soc->gsa().history();
    r.vri_log = soc->vri().log();
  }
  for (auto& n : ctx.notes) r.report_lines.push_back("note: " + n);
  if (!options.report_dir.empty()) write_report(r, options.report_dir);
  return r;
}

std::string format_kv(const RunResult& r) {
  std::string out;
  auto line = [&out](std::string_view key, const std::string& value) { out += fmt::format("{}={}\n", key, value); };
  line("test", r.test);
  line("level", to_string(r.level));
  line("seed", std::to_string(r.seed));
  line("fault", r.fault);
  line("verdict", r.passed ? "pass" : "fail");
  line("end_time", std::to_string(r.end_time.ticks()));
  line("failures", std::to_string(r.failures.size()));
  line("mismatches", std::to_string(r.mismatches));
  for (const auto& c : r.coverage) line("coverage." + c.group, check::format_percent(c.percent));
  line("trace_hash", fmt::format("{:#018x}", r.trace_hash));
  return out;
}

std::string format_text(const RunResult& r) {
  std::string out = fmt::format("test {} at level {}, seed {}, fault {}\n", r.test, to_string(r.level), r.seed,
                                r.fault);
  out += fmt::format("verdict: {}{}\n", r.passed ? "PASS" : "FAIL", r.hang ? " (hang)" : "");
  out += fmt::format("end time: {} ns\n", r.end_time.ticks());
  out += fmt::format("failures: {}\n", r.failures.size());
  for (const auto& f : r.failures) {
    out += fmt::format("  [{}] {} at t={}: {}\n", f.kind, f.source, f.time.ticks(), f.message);
  }
  out += "scoreboards:\n";
  for (const auto& s : r.scoreboards) {
    out += fmt::format("  {}: checked {}, passed {}, pixel mismatches {}, pending {}\n", s.path, s.checked, s.passed,
                       s.mismatches, s.pending);
    for (const auto& m : s.reports) {
      if (m.clean()) continue;
      if (m.geometry_mismatch) {
        out += fmt::format("    frame {}: geometry {}\n", m.frame, m.geometry);
        continue;
      }
      out += fmt::format("    frame {}: {} pixel(s) differ\n", m.frame, m.total);
      for (const auto& d : m.details) {
        out += fmt::format("      ({},{}) expected {} got {}\n", d.x, d.y, d.expected, d.actual);
      }
    }
  }
  out += "coverage:\n";
  for (const auto& line : r.coverage_report) out += "  " + line + "\n";
  if (!r.report_lines.empty()) {
    out += "component reports:\n";
    for (const auto& line : r.report_lines) out += "  " + line + "\n";
  }
  out += fmt::format("trace hash: {:#018x}\n", r.trace_hash);
  return out;
}

void write_report(const RunResult& r, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto write = [&dir](const std::string& file, const std::string& text) {
    const auto path = std::filesystem::path(dir) / file;
    std::ofstream out(path);
    out << text;
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  };
  write("report.txt", format_text(r));
  write("report.kv", format_kv(r));
}

}  // namespace vfab::demo
