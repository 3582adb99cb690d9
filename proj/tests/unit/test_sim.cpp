#include <doctest.h>

#include <string>
#include <vector>

#include "vfab/sim/kernel.hpp"

using namespace vfab::sim;
using namespace vfab::sim::literals;

TEST_CASE("schedule runs actions at now + delay") {
  Kernel k;
  std::vector<std::pair<std::string, std::uint64_t>> ran;
  k.schedule([&] { ran.emplace_back("a", k.now().ticks()); }, 10_ns);
  k.run_until(100_ns);
  REQUIRE(ran.size() == 1);
  CHECK(ran[0].second == 10);
}

TEST_CASE("equal fire times execute in insertion order") {
  Kernel k;
  std::string order;
  k.schedule(
      [&] {
        k.schedule([&] { order += 'a'; }, 0_ns);
        k.schedule([&] { order += 'b'; }, 0_ns);
      },
      5_ns);
  k.run_until(5_ns);
  CHECK(order == "ab");
  CHECK(k.now() == 5_ns);
}

TEST_CASE("earlier fire time runs first regardless of insertion") {
  Kernel k;
  std::string order;
  k.schedule(
      [&] {
        k.schedule([&] { order += "a@" + std::to_string(k.now().ticks()); }, 10_ns);
        k.schedule([&] { order += "b@" + std::to_string(k.now().ticks()) + ","; }, 3_ns);
      },
      5_ns);
  k.run_until(100_ns);
  CHECK(order == "b@8,a@15");
}

TEST_CASE("run_until stops at the limit and reports last executed time") {
  Kernel k;
  bool a = false;
  bool b = false;
  k.schedule([&] { a = true; }, 10_ns);
  k.schedule([&] { b = true; }, 20_ns);
  CHECK(k.run_until(15_ns) == 10_ns);
  CHECK(a);
  CHECK_FALSE(b);
  CHECK_FALSE(k.idle());
}

TEST_CASE("idle kernel does not advance time") {
  Kernel k;
  CHECK(k.run_until(100_ns) == 0_ns);
  CHECK(k.now() == 0_ns);
}

TEST_CASE("stop request halts at the current timestep") {
  Kernel k;
  bool later = false;
  k.schedule([&] { k.request_stop(); }, 12_ns);
  k.schedule([&] { later = true; }, 50_ns);
  CHECK(k.run_until(100_ns) == 12_ns);
  CHECK_FALSE(later);
}

namespace {

Task<> wait_rising(Kernel& k, Signal& s, std::vector<std::string>& log, std::string tag) {
  co_await s.posedge();
  log.push_back(tag + "@" + std::to_string(k.now().ticks()));
}

}  // namespace

TEST_CASE("wait_edge on a clock resumes at period/2") {
  Kernel k;
  auto& clk = k.make_signal("tb.clk", 1);
  Clock clock(k, clk, 10_ns);
  std::vector<std::string> log;
  k.spawn(wait_rising(k, clk, log, "p"), "tb.p");
  k.run_until(7_ns);
  REQUIRE(log.size() == 1);
  CHECK(log[0] == "p@5");
}

TEST_CASE("two waiters on one edge resume in registration order") {
  Kernel k;
  auto& clk = k.make_signal("tb.clk", 1);
  Clock clock(k, clk, 10_ns);
  std::vector<std::string> log;
  k.spawn(wait_rising(k, clk, log, "first"), "tb.first");
  k.spawn(wait_rising(k, clk, log, "second"), "tb.second");
  k.run_until(20_ns);
  CHECK(log == std::vector<std::string>{"first@5", "second@5"});
}

TEST_CASE("waiting on a stuck signal never resumes") {
  Kernel k;
  auto& s = k.make_signal("tb.s", 1, 1);
  std::vector<std::string> log;
  const auto pid = k.spawn(wait_rising(k, s, log, "p"), "tb.p");
  k.run_until(1000_ns);
  CHECK(log.empty());
  CHECK_FALSE(k.finished(pid));
  CHECK(k.suspended_processes() == std::vector<std::string>{"tb.p"});
}

TEST_CASE("drive applies later in the same timestep") {
  Kernel k;
  auto& s = k.make_signal("tb.s", 8);
  s.drive(0xAB);
  CHECK(s.read() == 0);
  k.run_until(0_ns);
  CHECK(s.read() == 0xAB);
}

TEST_CASE("drive rejects values wider than the signal") {
  Kernel k;
  auto& s = k.make_signal("tb.s", 8);
  CHECK_THROWS_AS(s.drive(0x100), ContractViolation);
}

TEST_CASE("last writer in a timestep wins") {
  Kernel k;
  auto& s = k.make_signal("tb.s", 1);
  s.drive(1);
  s.drive(0);
  k.run_until(0_ns);
  CHECK(s.read() == 0);
  CHECK(s.change_count() == 2);
}

TEST_CASE("writes of the current value notify nobody") {
  Kernel k;
  auto& s = k.make_signal("tb.s", 4);
  int wakeups = 0;
  struct Counter {
    static Task<> run(Signal& sig, int& n) {
      for (;;) {
        co_await sig.change();
        ++n;
      }
    }
  };
  k.spawn(Counter::run(s, wakeups), "tb.counter", true);
  k.run_until(0_ns);
  const std::uint64_t values[] = {3, 3, 5, 5, 5, 0, 0};
  for (std::size_t i = 0; i < std::size(values); ++i) s.drive(values[i], SimTime(i + 1));
  k.run_until(100_ns);
  CHECK(s.change_count() == 3);
  CHECK(wakeups == 3);
}

TEST_CASE("exceptions escaping a process surface from run_until") {
  Kernel k;
  auto& s = k.make_signal("tb.s", 8);
  struct Bad {
    static Task<> run(Kernel& kk, Signal& sig) {
      co_await kk.delay(3_ns);
      sig.drive(0x1FF);
    }
  };
  k.spawn(Bad::run(k, s), "tb.bad");
  CHECK_THROWS_AS(k.run_until(10_ns), ContractViolation);
  CHECK(k.now() == 3_ns);
}

TEST_CASE("join resumes after the child process finishes") {
  Kernel k;
  std::vector<std::string> log;
  struct Procs {
    static Task<> child(Kernel& kk, std::vector<std::string>& out) {
      co_await kk.delay(7_ns);
      out.push_back("child@" + std::to_string(kk.now().ticks()));
    }
    static Task<> parent(Kernel& kk, std::vector<std::string>& out) {
      const auto a = kk.spawn(child(kk, out), "tb.a");
      const auto b = kk.spawn(child(kk, out), "tb.b");
      co_await kk.join(a);
      co_await kk.join(b);
      out.push_back("joined@" + std::to_string(kk.now().ticks()));
    }
  };
  k.spawn(Procs::parent(k, log), "tb.parent");
  k.run_until(100_ns);
  CHECK(log == std::vector<std::string>{"child@7", "child@7", "joined@7"});
}

TEST_CASE("nested tasks return values") {
  Kernel k;
  int result = 0;
  struct Procs {
    static Task<int> twice(Kernel& kk, int v) {
      co_await kk.delay(2_ns);
      co_return v * 2;
    }
    static Task<> top(Kernel& kk, int& out) {
      const int a = co_await twice(kk, 4);
      const int b = co_await twice(kk, a);
      out = b;
    }
  };
  k.spawn(Procs::top(k, result), "tb.top");
  k.run_until(100_ns);
  CHECK(result == 16);
  CHECK(k.now() == 4_ns);
}

namespace {

struct Toggler {
  static Task<> run(Kernel& k, Signal& clk, Signal& data, std::uint64_t stride) {
    std::uint64_t v = 0;
    for (int i = 0; i < 50; ++i) {
      co_await clk.posedge();
      v = (v + stride) & 0xFF;
      data.drive(v, SimTime(i % 3));
    }
    (void)k;
  }
};

std::pair<std::uint64_t, std::vector<std::string>> run_scenario() {
  Kernel k;
  k.enable_event_log(true);
  auto& clk = k.make_signal("tb.clk", 1);
  auto& d0 = k.make_signal("tb.d0", 8);
  auto& d1 = k.make_signal("tb.d1", 8);
  Clock clock(k, clk, 10_ns);
  k.spawn(Toggler::run(k, clk, d0, 3), "tb.t0");
  k.spawn(Toggler::run(k, clk, d1, 7), "tb.t1");
  k.run_until(1000_ns);
  return {k.trace_hash(), k.event_log()};
}

}  // namespace

TEST_CASE("identical runs produce identical event logs and hashes") {
  const auto first = run_scenario();
  const auto second = run_scenario();
  CHECK(first.first == second.first);
  CHECK(first.second == second.second);
  CHECK_FALSE(first.second.empty());
}

TEST_CASE("event log times never decrease") {
  const auto [hash, log] = run_scenario();
  std::uint64_t prev = 0;
  for (const auto& line : log) {
    const auto t = std::stoull(line.substr(0, line.find(':')));
    CHECK(t >= prev);
    prev = t;
  }
  CHECK(log.front().find(':') != std::string::npos);
}

TEST_CASE("trace hash equals FNV-1a of the event log lines") {
  const auto [hash, log] = run_scenario();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& line : log) h = fnv1a(line + "\n", h);
  CHECK(h == hash);
}

TEST_CASE("clock period must be even") {
  Kernel k;
  auto& clk = k.make_signal("tb.clk", 1);
  CHECK_THROWS_AS(Clock(k, clk, SimTime(7)), ContractViolation);
}
