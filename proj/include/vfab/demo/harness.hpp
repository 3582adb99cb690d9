#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vfab/check/coverage.hpp"
#include "vfab/check/scoreboard.hpp"
#include "vfab/demo/dut.hpp"
#include "vfab/demo/env.hpp"
#include "vfab/ipxact/flow.hpp"
#include "vfab/reg/builtin.hpp"
#include "vfab/sim/kernel.hpp"
#include "vfab/sw/gsa.hpp"
#include "vfab/tb/component.hpp"
#include "vfab/tb/failure.hpp"
#include "vfab/uvc/bus_txn.hpp"

namespace vfab::demo {

enum class Level { kIp, kSubsys, kSoc };

std::string to_string(Level l);
std::optional<Level> parse_level(std::string_view text);

/// Unknown test, unsupported level, bad fault string.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shipped bundles, embedded at build time.
const ipxact::Bundle& builtin_bundle(const std::string& block);

struct BenchSpec {
  Level level = Level::kIp;
  std::string ip = "ganc";  // IP level only
  FaultMode fault;
  std::shared_ptr<const ipxact::Bundle> ganc_bundle;
  std::shared_ptr<const ipxact::Bundle> thr_bundle;
};

/// GANC register settings applied by GancConfigSeq.
struct GancSettings {
  bool enable = true;
  std::uint32_t gain = 0x10;
  std::uint32_t offset = 0;
  std::uint32_t width = 64;
  std::uint32_t height = 64;
  bool irq_enable = false;

  /// Random gain, offset and enable (on 9 times in 10); geometry unchanged.
  static GancSettings random(seq::Rng& rng);
};

/// Writes the GANC configuration by register name and reads GAIN and OFFSET
/// back. Runs unchanged on any level's register sequencer.
class GancConfigSeq : public seq::Sequence {
 public:
  explicit GancConfigSeq(GancSettings s) : seq::Sequence("ganc_config"), s_(s) {}
  sim::Task<> body(seq::SequenceContext& ctx) override;
  const GancSettings& settings() const { return s_; }

 private:
  GancSettings s_;
};

/// Frame and GANC settings derived from a seed; vseq_ganc and reuse_soc_vri
/// use the same one so their verdicts can be compared.
struct Scenario {
  GancSettings settings;
  uvc::Pattern pattern = uvc::Pattern::kRamp;
  std::uint32_t frame_seed = 0;
};
Scenario scenario_for(std::uint64_t seed);

class TestContext;

/// Top of the tree: owns the nets, the DUT models and the level's
/// environment, plus the component running the test body.
class Bench : public tb::Component {
 public:
  using Body = sim::Task<> (*)(TestContext&);

  Bench(std::string name, tb::ComponentTree& tree, BenchSpec spec, check::CoverageDb& coverage);
  ~Bench() override;

  void set_test(Body body, TestContext* ctx) {
    body_ = body;
    ctx_ = ctx;
  }
  void build_phase() override;
  void connect_phase() override;

  const BenchSpec& spec() const { return spec_; }
  Level level() const { return spec_.level; }
  check::CoverageDb& coverage() const { return coverage_; }

  IpEnv* ip_env() const { return ip_env_; }
  SubsysEnv* subsys_env() const;
  SocEnv* soc_env() const { return soc_env_; }
  /// GANC environment of this level (active or passive), if any.
  IpEnv* ganc_env() const;

  /// Transactions seen on the GANC register bus, in completion order.
  const std::vector<uvc::BusTxn>& ganc_bus_trace() const { return ganc_trace_; }
  PixelIp* dut(const std::string& block) const;
  sw::VriMailbox* mailbox() const { return mailbox_.get(); }

 private:
  void make_ip_level();
  void make_subsys(const std::string& prefix, std::uint64_t base);

  BenchSpec spec_;
  check::CoverageDb& coverage_;
  std::unique_ptr<sim::Clock> clock_;
  std::vector<std::unique_ptr<PixelIp>> duts_;
  std::vector<std::unique_ptr<Interconnect>> xbars_;
  std::unique_ptr<sw::VriMailbox> mailbox_;
  IpEnvSpec ip_spec_;
  SubsysEnvSpec ss_spec_;
  std::string core_bus_;
  IpEnv* ip_env_ = nullptr;
  SubsysEnv* ss_env_ = nullptr;
  SocEnv* soc_env_ = nullptr;
  Body body_ = nullptr;
  TestContext* ctx_ = nullptr;
  std::vector<uvc::BusTxn> ganc_trace_;
};

/// What a test body sees: level-independent register and video access.
class TestContext {
 public:
  TestContext(Bench& bench, std::uint64_t seed, std::shared_ptr<seq::Sequence> injected = nullptr);

  Bench& bench() const { return bench_; }
  Level level() const { return bench_.level(); }
  std::uint64_t seed() const { return seed_; }
  seq::Rng& rng() { return rng_; }
  sim::Kernel& kernel() const { return bench_.kernel(); }
  /// Test knob from config key `key` at path `tb.test`.
  std::int64_t knob(const std::string& key, std::int64_t fallback) const;
  std::optional<std::string> text_knob(const std::string& key) const;

  /// Register sequencer of this level: the IP register agent, the
  /// subsystem host agent, or the core sequencer at SoC level.
  seq::SequencerBase& reg_sequencer() const;
  uvc::VideoSequencer& video_sequencer() const;
  /// Output monitor at the level boundary.
  uvc::VspMonitor& output_monitor() const;

  sim::Task<> run(seq::Sequence& s);
  sim::Task<> write(std::string reg, std::uint32_t value);
  sim::Task<std::uint32_t> read(std::string reg);
  sim::Task<> send(std::vector<uvc::VideoItem> items);
  /// Waits until the boundary output monitor has collected `n` frames.
  sim::Task<bool> wait_output(std::uint64_t n, std::uint64_t timeout_cycles);
  sim::Task<> cycles(std::uint64_t n);

  /// Sequence handed in by the caller of run_test, if any.
  std::shared_ptr<seq::Sequence> injected() const { return injected_; }

  std::vector<reg::BuiltinResult> builtins;
  std::vector<std::string> notes;

 private:
  Bench& bench_;
  std::shared_ptr<seq::Sequence> injected_;
  std::uint64_t seed_;
  seq::Rng rng_;
};

struct TestInfo {
  std::string name;
  std::string description;
  std::vector<Level> levels;  // first is the default
  std::string ip = "ganc";
  Bench::Body body = nullptr;
};

const std::vector<TestInfo>& test_registry();
const TestInfo* find_test(std::string_view name);

struct RunOptions {
  std::string test;
  std::optional<Level> level;
  std::uint64_t seed = 1;
  std::string config_file;
  /// Extra `pattern key value` lines applied after the config file.
  std::vector<std::string> config_lines;
  std::string fault = "none";
  std::string report_dir;
  std::string bundle_file;
  sim::SimTime watchdog{200'000'000};
  /// Register sequence for tests that run a caller-supplied sequence
  /// (reg_reuse); ignored by the others.
  std::shared_ptr<seq::Sequence> sequence;
};

struct ScoreboardStat {
  std::string path;
  std::uint64_t checked = 0;
  std::uint64_t passed = 0;
  std::uint64_t mismatches = 0;
  std::size_t pending = 0;
  std::vector<check::MismatchReport> reports;
  std::vector<check::AttributeSet> snapshots;
};

struct CoverageStat {
  std::string group;
  double percent = 0;
  std::size_t hit_bins = 0;
  std::size_t total_bins = 0;
  bool accounting_ok = true;  // hits + uncovered == samples on every coverpoint
};

struct RunResult {
  std::string test;
  Level level = Level::kIp;
  std::uint64_t seed = 0;
  std::string fault = "none";
  bool passed = false;
  bool hang = false;
  sim::SimTime end_time;
  std::vector<tb::Failure> failures;
  std::vector<std::string> report_lines;
  std::uint64_t mismatches = 0;
  std::vector<ScoreboardStat> scoreboards;
  std::vector<CoverageStat> coverage;
  std::vector<std::string> coverage_report;
  std::uint64_t trace_hash = 0;
  std::vector<uvc::BusTxn> ganc_bus;
  std::vector<reg::BuiltinResult> builtins;
  std::vector<sw::InvocationRecord> gsa_calls;
  std::vector<sw::VriUvc::Dispatch> vri_log;

  const ScoreboardStat* scoreboard(std::string_view path_suffix) const;
  std::size_t count(std::string_view kind) const;
};

/// Builds the level, runs every phase and collects the result. Throws
/// UsageError for an unknown test or level, or a bad fault mode. Writes
/// the report when `report_dir` is set.
RunResult run_test(const RunOptions& options);

/// report.kv content.
std::string format_kv(const RunResult& r);
/// report.txt content.
std::string format_text(const RunResult& r);
void write_report(const RunResult& r, const std::string& dir);

}  // namespace vfab::demo
