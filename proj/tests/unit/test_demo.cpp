#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vfab/check/refmodel.hpp"
#include "vfab/demo/dut.hpp"
#include "vfab/demo/harness.hpp"
#include "vfab/ipxact/flow.hpp"
#include "ip_rig.hpp"

using namespace vfab;
using namespace vfab::demo;

TEST_CASE("fault modes parse and print") {
  for (const auto& name : fault_names()) {
    if (name.find(':') != std::string::npos) continue;
    CHECK(FaultMode::parse(name).to_string() == name);
  }
  const auto c = FaultMode::parse("corrupt_pixel:37");
  CHECK(c.kind == FaultKind::kCorruptPixel);
  CHECK(c.arg == 37);
  CHECK(c.to_string() == "corrupt_pixel:37");
  CHECK(FaultMode::parse("none") == FaultMode{});
  CHECK_THROWS_AS(FaultMode::parse("bogus"), std::invalid_argument);
  CHECK_THROWS_AS(FaultMode::parse("corrupt_pixel:"), std::invalid_argument);
  CHECK_THROWS_AS(FaultMode::parse("corrupt_pixel:x"), std::invalid_argument);
  CHECK_THROWS_AS(FaultMode::parse("gain_stuck0:3"), std::invalid_argument);
}

using testing::all_pixels;
using testing::IpRig;

TEST_CASE("GANC model matches the reference over the full pixel grid") {
  IpRig rig(PixelIp::Kind::kGanc);
  const auto frame = all_pixels();
  const auto ref = check::ganc_model();
  std::size_t diffs = 0;
  std::size_t compared = 0;
  for (std::uint32_t gain : {0x00U, 0x08U, 0x10U, 0x18U, 0x20U, 0xFFU}) {
    for (int offset : {-128, -5, 0, 5, 127}) {
      const auto raw_offset = static_cast<std::uint32_t>(offset) & 0xFFU;
      const auto out = rig.run({{regs::kCtrl, 1},
                                {regs::kGain, gain},
                                {regs::kOffset, raw_offset},
                                {regs::kWidth, 256},
                                {regs::kHeight, 1}},
                               frame);
      REQUIRE(out.size() == 256);
      const auto expected = ref->evaluate(frame, {{"enable", 1}, {"gain", gain}, {"offset", raw_offset}});
      for (std::uint32_t p = 0; p < 256; ++p) {
        const int v = std::clamp(static_cast<int>((p * gain) >> 4) + offset, 0, 255);
        diffs += out[p] != static_cast<std::uint32_t>(v) ? 1 : 0;
        diffs += expected.at(p, 0) != static_cast<std::uint32_t>(v) ? 1 : 0;
        ++compared;
      }
    }
  }
  CHECK(compared == 256 * 6 * 5);
  CHECK(diffs == 0);
}

TEST_CASE("GANC passes pixels through while disabled") {
  IpRig rig(PixelIp::Kind::kGanc);
  const auto out = rig.run({{regs::kCtrl, 0}, {regs::kGain, 0x30}, {regs::kWidth, 256}, {regs::kHeight, 1}},
                           all_pixels());
  REQUIRE(out.size() == 256);
  for (std::uint32_t p = 0; p < 256; ++p) CHECK(out[p] == p);
}

TEST_CASE("THR model thresholds every pixel") {
  IpRig rig(PixelIp::Kind::kThr);
  for (std::uint32_t t : {0U, 1U, 0x80U, 0xFFU}) {
    const auto out =
        rig.run({{regs::kCtrl, 1}, {regs::kThresh, t}, {regs::kWidth, 256}, {regs::kHeight, 1}}, all_pixels());
    REQUIRE(out.size() == 256);
    for (std::uint32_t p = 0; p < 256; ++p) CHECK(out[p] == (p >= t ? 255U : 0U));
  }
}

TEST_CASE("pixel IP register file") {
  IpRig rig(PixelIp::Kind::kGanc);
  PixelIp& ip = *rig.ip;
  CHECK(ip.peek(regs::kGain) == 0x10);
  CHECK(ip.peek(regs::kWidth) == 64);
  CHECK(ip.peek(regs::kHeight) == 64);
  CHECK_FALSE(ip.access(uvc::BusTxn::read(0x20)).ok());
  CHECK_FALSE(ip.access(uvc::BusTxn::read(0x06)).ok());
  ip.access(uvc::BusTxn::write(regs::kGain, 0x1FF));
  CHECK(ip.peek(regs::kGain) == 0xFF);
  ip.access(uvc::BusTxn::write(regs::kStatus, 1));
  CHECK(ip.peek(regs::kStatus) == 0);
  // The block decodes the low 12 address bits only.
  CHECK(ip.access(uvc::BusTxn::read(0x40000004)).rdata == 0xFF);

  IpRig stuck(PixelIp::Kind::kGanc, FaultMode::parse("gain_stuck0"));
  stuck.ip->access(uvc::BusTxn::write(regs::kGain, 0x21));
  CHECK(stuck.ip->peek(regs::kGain) == 0x20);
  IpRig narrow(PixelIp::Kind::kGanc, FaultMode::parse("bad_reset_width"));
  CHECK(narrow.ip->peek(regs::kWidth) == 32);
}

TEST_CASE("frame done raises INT_STATUS and the line follows INT_ENABLE") {
  IpRig rig(PixelIp::Kind::kGanc);
  uvc::Frame f(4, 2);
  rig.run({{regs::kCtrl, 1}, {regs::kWidth, 4}, {regs::kHeight, 2}, {regs::kIntEnable, 0}}, f);
  CHECK(rig.ip->frames_done() == 1);
  CHECK(rig.ip->peek(regs::kIntStatus) == 1);
  CHECK_FALSE(rig.ports.irq->high());
  rig.run({{regs::kIntEnable, 1}}, f);
  CHECK(rig.ports.irq->high());
  // W1C
  rig.ip->access(uvc::BusTxn::write(regs::kIntStatus, 1));
  CHECK(rig.ip->peek(regs::kIntStatus) == 0);
}

namespace {

RunResult run(std::string test, std::optional<Level> level, std::uint64_t seed, std::string fault = "none",
              std::vector<std::string> config = {}) {
  RunOptions o;
  o.test = std::move(test);
  o.level = level;
  o.seed = seed;
  o.fault = std::move(fault);
  o.config_lines = std::move(config);
  return run_test(o);
}

bool detected_by(const RunResult& r, const std::string& kind, const std::string& source_part) {
  return std::any_of(r.failures.begin(), r.failures.end(), [&](const tb::Failure& f) {
    return f.kind == kind && f.source.find(source_part) != std::string::npos;
  });
}

}  // namespace

TEST_CASE("every fault mode trips its designated checker") {
  struct Row {
    std::string fault;
    std::string test;
    Level level;
    std::string kind;
    std::string source;
  };
  const std::vector<Row> table{
      {"gain_stuck0", "reg_builtin_ganc", Level::kIp, "reg.builtin", "ganc_env"},
      {"bad_reset_width", "reg_builtin_ganc", Level::kIp, "reg.builtin", "ganc_env"},
      {"corrupt_pixel:5", "smoke_ganc", Level::kIp, "data.mismatch", "ganc_env.scoreboard"},
      {"drop_pixel", "smoke_ganc", Level::kIp, "vsp.geometry", "ganc_env.video_agent0"},
      {"drop_frame", "subsys_chain", Level::kSubsys, "data.leftover", "ss_env.ganc_env.scoreboard"},
      {"spurious_irq", "irq_ganc", Level::kIp, "irq.spurious", "ganc_env.irq_checker0"},
      {"drop_irq", "irq_ganc", Level::kIp, "irq.missing", "ganc_env.irq_checker0"},
      {"swap_chain", "subsys_chain", Level::kSubsys, "data.mismatch", "ss_env.ganc_env.scoreboard"},
  };
  std::vector<std::string> covered;
  for (const auto& row : table) {
    CAPTURE(row.fault);
    const auto r = run(row.test, row.level, 2, row.fault);
    CHECK_FALSE(r.passed);
    CHECK(detected_by(r, row.kind, row.source));
    covered.push_back(row.fault.substr(0, row.fault.find(':')));
    const auto clean = run(row.test, row.level, 2);
    CHECK(clean.passed);
  }
  for (auto name : fault_names()) {
    if (name == "none") continue;
    name = name.substr(0, name.find(':'));
    CAPTURE(name);
    CHECK(std::find_if(covered.begin(), covered.end(),
                       [&](const std::string& c) { return c.rfind(name, 0) == 0; }) != covered.end());
  }
}

TEST_CASE("corrupt_pixel reports one mismatch at the pixel's raster position") {
  for (unsigned k : {0U, 37U, 64U, 200U}) {
    CAPTURE(k);
    const auto r = run("smoke_ganc", Level::kIp, 9, fmt::format("corrupt_pixel:{}", k));
    const auto* sb = r.scoreboard("ganc_env.scoreboard");
    REQUIRE(sb != nullptr);
    CHECK(sb->mismatches == 1);
    REQUIRE(sb->reports.size() == 1);
    REQUIRE(sb->reports[0].details.size() == 1);
    CHECK(sb->reports[0].details[0].x == k % 64);
    CHECK(sb->reports[0].details[0].y == k / 64);
  }
}

TEST_CASE("subsystem output equals THR applied to GANC") {
  const auto r = run("subsys_chain", Level::kSubsys, 4, "none", {"tb.test frames 4"});
  CHECK(r.passed);
  const auto* chain = r.scoreboard("tb.ss_env.scoreboard");
  REQUIRE(chain != nullptr);
  CHECK(chain->checked == 4);
  CHECK(chain->passed == 4);
  REQUIRE(chain->snapshots.size() == 4);
  CHECK(chain->snapshots[0].at("ganc.gain") == 0x20);
  CHECK(chain->snapshots[0].at("thr.enable") == 1);
}

TEST_CASE("runs are reproducible per seed") {
  const auto a = run("smoke_ganc", Level::kIp, 7);
  const auto b = run("smoke_ganc", Level::kIp, 7);
  const auto c = run("smoke_ganc", Level::kIp, 8);
  CHECK(a.trace_hash == b.trace_hash);
  CHECK(a.end_time == b.end_time);
  CHECK(a.trace_hash != c.trace_hash);
}

TEST_CASE("usage errors") {
  CHECK_THROWS_AS(run("no_such_test", std::nullopt, 1), UsageError);
  CHECK_THROWS_AS(run("gsa_gain", Level::kIp, 1), UsageError);
  CHECK_THROWS_AS(run("smoke_ganc", Level::kIp, 1, "bogus"), UsageError);
  CHECK_THROWS_AS(run("smoke_ganc", Level::kIp, 1, "none", {"only_two fields"}), UsageError);
}

TEST_CASE("config file lines select the fault and the last match wins") {
  const auto r = run("smoke_ganc", Level::kIp, 1, "none", {"dut fault corrupt_pixel:3", "dut fault none"});
  CHECK(r.passed);
  CHECK(r.fault == "none");
  const auto f = run("smoke_ganc", Level::kIp, 1, "none", {"dut fault corrupt_pixel:3"});
  CHECK_FALSE(f.passed);
  CHECK(f.fault == "corrupt_pixel:3");
}

TEST_CASE("registry lists the shipped tests") {
  for (const char* name : {"smoke_ganc", "reg_builtin_ganc", "reuse_soc_vri", "gsa_gain", "subsys_chain"}) {
    CHECK(find_test(name) != nullptr);
  }
  for (const auto& t : test_registry()) {
    CHECK_FALSE(t.levels.empty());
    CHECK(t.body != nullptr);
  }
}

TEST_CASE("report.kv lines") {
  RunResult r;
  r.test = "smoke_ganc";
  r.seed = 3;
  r.passed = true;
  r.end_time = sim::SimTime(1234);
  r.trace_hash = 0xABC;
  r.coverage.push_back(CoverageStat{"gain_cov", 75.0, 3, 4, true});
  const std::string kv = format_kv(r);
  CHECK(kv.find("verdict=pass\n") != std::string::npos);
  CHECK(kv.find("seed=3\n") != std::string::npos);
  CHECK(kv.find("end_time=1234\n") != std::string::npos);
  CHECK(kv.find("failures=0\n") != std::string::npos);
  CHECK(kv.find("mismatches=0\n") != std::string::npos);
  CHECK(kv.find("coverage.gain_cov=75.0\n") != std::string::npos);
  CHECK(kv.find("trace_hash=0x0000000000000abc\n") != std::string::npos);

  r.passed = false;
  r.failures.push_back(tb::Failure{"x", "data.mismatch", "m", {}});
  CHECK(format_kv(r).find("verdict=fail\nend_time=1234\nfailures=1\n") != std::string::npos);
}

TEST_CASE("write_report creates both files") {
  const auto dir = std::filesystem::temp_directory_path() / "vfab-report-test";
  std::filesystem::remove_all(dir);
  RunOptions o;
  o.test = "smoke_ganc";
  o.seed = 1;
  o.report_dir = dir.string();
  const auto r = run_test(o);
  std::ifstream kv(dir / "report.kv");
  std::stringstream text;
  text << kv.rdbuf();
  CHECK(text.str() == format_kv(r));
  CHECK(std::filesystem::exists(dir / "report.txt"));
  std::filesystem::remove_all(dir);
}

namespace {

int cli(const std::string& args) {
  const int rc = std::system((std::string(VFAB_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("CLI exit codes") {
  CHECK(cli("run --test smoke_ganc --level ip --seed 1") == 0);
  CHECK(cli("run --test smoke_ganc --level ip --seed 1 --fault corrupt_pixel:37") == 1);
  CHECK(cli("run --test no_such_test") == 2);
  CHECK(cli("run --test smoke_ganc --level chip") == 2);
  CHECK(cli("run --test smoke_ganc --fault nonsense") == 2);
  CHECK(cli("list-tests") == 0);
  CHECK(cli("frobnicate") == 2);
}

TEST_CASE("CLI gen reproduces the shipped bundles") {
  const std::string fx = VFAB_FIXTURES;
  for (const char* block : {"ganc", "thr"}) {
    const auto out = std::filesystem::temp_directory_path() / fmt::format("vfab-gen-{}.bundle", block);
    CHECK(cli(fmt::format("gen --ipxact {0}/{1}.xml --attrmap {0}/{1}.map --out {2}", fx, block, out.string())) == 0);
    CHECK(ipxact::read_file(out.string()) == ipxact::read_file(fmt::format("{}/{}.bundle", fx, block)));
  }
  const auto broken = std::filesystem::temp_directory_path() / "vfab-broken.xml";
  std::ofstream(broken) << "<component><memoryMaps>";
  CHECK(cli(fmt::format("gen --ipxact {} --attrmap {}/ganc.map --out /dev/null", broken.string(), fx)) == 1);
}
