#include <doctest.h>

#include <map>

#include "test_util.hpp"
#include "vfab/reg/builtin.hpp"
#include "vfab/reg/model.hpp"

using namespace vfab;
using namespace vfab::reg;
using sim::SimTime;
using testing::run_task;

namespace {

BlockDef ganc_block() {
  return BlockDef{"ganc",
                  {
                      {"CTRL", 0x00, {{"EN", 0, 1, Access::kRW, 0}}},
                      {"GAIN", 0x04, {{"GAIN", 0, 8, Access::kRW, 0x10}}},
                      {"OFFSET", 0x08, {{"OFFSET", 0, 8, Access::kRW, 0}}},
                      {"WIDTH", 0x0C, {{"WIDTH", 0, 16, Access::kRW, 64}}},
                      {"HEIGHT", 0x10, {{"HEIGHT", 0, 16, Access::kRW, 64}}},
                      {"INT_ENABLE", 0x14, {{"FRAME_DONE", 0, 1, Access::kRW, 0}}},
                      {"INT_STATUS", 0x18, {{"FRAME_DONE", 0, 2, Access::kW1C, 0}}},
                      {"STATUS", 0x1C, {{"BUSY", 0, 1, Access::kRO, 0}}},
                  }};
}

/// Register file answering bus transactions with its own reading of the
/// access rules. Faults are injected as stuck-at-0 masks or reset overrides.
struct FakeDevice : BusAdapter {
  FakeDevice(sim::Kernel& k, BlockDef block, std::uint64_t base) : kernel(k), def(std::move(block)), base(base) {
    reset();
  }
  void reset() {
    for (const auto& r : def.registers) {
      std::uint32_t v = 0;
      for (const auto& f : r.fields) v |= static_cast<std::uint32_t>(f.reset) << f.lsb;
      if (auto it = reset_override.find(r.name); it != reset_override.end()) v = it->second;
      regs[r.offset] = v;
    }
  }
  const RegisterDef* at(std::uint32_t offset) const {
    for (const auto& r : def.registers) {
      if (r.offset == offset) return &r;
    }
    return nullptr;
  }
  sim::Task<uvc::BusTxn> execute(uvc::BusTxn t) override {
    ++in_flight;
    max_in_flight = std::max(max_in_flight, in_flight);
    t.issue_time = kernel.now();
    co_await kernel.delay(SimTime(20));
    trace.push_back(t);
    const RegisterDef* r = t.addr >= base ? at(static_cast<std::uint32_t>(t.addr - base)) : nullptr;
    if (r == nullptr) {
      t.resp = uvc::BusResp::kError;
    } else if (t.is_write()) {
      std::uint32_t& cur = regs[r->offset];
      for (const auto& f : r->fields) {
        const std::uint32_t m = static_cast<std::uint32_t>(((std::uint64_t{1} << f.width) - 1) << f.lsb);
        if (f.access == Access::kRW || f.access == Access::kWO) cur = (cur & ~m) | (t.wdata & m);
        if (f.access == Access::kW1C) cur &= ~(t.wdata & m);
      }
      if (auto it = stuck0.find(r->name); it != stuck0.end()) cur &= ~it->second;
    } else {
      t.rdata = regs[r->offset];
    }
    t.complete_time = kernel.now();
    --in_flight;
    co_return t;
  }

  sim::Kernel& kernel;
  BlockDef def;
  std::uint64_t base;
  std::map<std::uint32_t, std::uint32_t> regs;
  std::map<std::string, std::uint32_t> stuck0;
  std::map<std::string, std::uint32_t> reset_override;
  std::vector<uvc::BusTxn> trace;
  int in_flight = 0;
  int max_in_flight = 0;
};

struct Bench {
  explicit Bench(std::uint64_t base = 0, BlockDef block = ganc_block())
      : device(kernel, block, base), map("map", base) {
    map.add_block(model.add_block(std::move(block)), 0);
    map.bind(device, kernel);
  }
  sim::Kernel kernel;
  RegisterModel model;
  FakeDevice device;
  AddressMap map;
};

std::size_t count_kind(const RegisterModel& m, std::string_view kind) {
  std::size_t n = 0;
  for (const auto& e : m.events()) n += e.kind == kind ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("field definitions are validated") {
  CHECK_NOTHROW(ganc_block().validate());
  RegisterDef overlap{"R", 0, {{"A", 0, 4, Access::kRW, 0}, {"B", 3, 2, Access::kRW, 0}}};
  CHECK_THROWS_AS(overlap.validate(), ModelError);
  RegisterDef wide{"R", 0, {{"A", 28, 8, Access::kRW, 0}}};
  CHECK_THROWS_AS(wide.validate(), ModelError);
  RegisterDef big_reset{"R", 0, {{"A", 0, 4, Access::kRW, 16}}};
  CHECK_THROWS_AS(big_reset.validate(), ModelError);
  RegisterDef misaligned{"R", 2, {}};
  CHECK_THROWS_AS(misaligned.validate(), ModelError);
  BlockDef dup{"b", {{"R", 0, {}}, {"R", 4, {}}}};
  CHECK_THROWS_AS(dup.validate(), ModelError);
}

TEST_CASE("lookup by name") {
  RegisterModel model;
  model.add_block(ganc_block());
  CHECK(model.lookup("ganc.GAIN").def().offset == 0x04);
  CHECK_THROWS_AS(model.lookup("ganc.NOPE"), LookupError);
  CHECK_THROWS_WITH(model.lookup("ganc.GAINN"), doctest::Contains("ganc.GAIN"));
  auto [reg, field] = model.lookup_field("ganc.WIDTH.WIDTH");
  REQUIRE(reg != nullptr);
  REQUIRE(field != nullptr);
  CHECK(field->width == 16);
}

TEST_CASE("one instance placed in maps with different bases") {
  RegisterModel model;
  auto& block = model.add_block(ganc_block());
  AddressMap ip("ip", 0);
  AddressMap soc("soc", 0);
  ip.add_block(block, 0);
  auto& subsys = soc.add_submap("subsys", 0x4000'0000);
  subsys.add_block(block, 0);
  RegisterInstance& gain = model.lookup("ganc.GAIN");
  CHECK(&gain == block.find("GAIN"));
  // Oracle: absolute address = map base + block offset + register offset.
  CHECK(ip.address_of(gain) == 0x0 + 0x0 + 0x04);
  CHECK(soc.address_of(gain) == 0x4000'0000 + 0x0 + 0x04);
  CHECK(subsys.address_of(gain) == soc.address_of(gain));
  CHECK(soc.resolve(0x4000'0004) == &gain);
  CHECK(soc.resolve(0x4000'0FFC) == nullptr);
}

TEST_CASE("two registers at one absolute address are rejected") {
  RegisterModel model;
  auto& a = model.add_block(BlockDef{"a", {{"R", 0, {}}}});
  auto& b = model.add_block(BlockDef{"b", {{"R", 0, {}}}});
  AddressMap map("m", 0x100);
  map.add_block(a, 0);
  CHECK_THROWS_AS(map.add_block(b, 0), ModelError);
}

TEST_CASE("reset_model applies field resets and zeroes reserved bits") {
  RegisterModel model;
  model.add_block(ganc_block());
  model.add_block(BlockDef{"x", {{"PART", 0, {{"LOW", 0, 8, Access::kRW, 0xAB}}}}});
  CHECK_FALSE(model.lookup("ganc.GAIN").known());
  model.reset();
  CHECK(model.lookup("ganc.GAIN").mirror() == 0x10);
  CHECK(model.lookup("ganc.WIDTH").mirror() == 64);
  CHECK(model.lookup("x.PART").mirror() == 0xAB);
  model.reset();
  CHECK(model.lookup("ganc.GAIN").mirror() == 0x10);
  CHECK(model.lookup("ganc.GAIN").known());
}

TEST_CASE("frontdoor write issues a bus write and updates the mirror") {
  Bench b;
  auto& gain = b.model.lookup("ganc.GAIN");
  CHECK(run_task(b.kernel, reg_write(b.model, gain, 0x20, b.map)));
  REQUIRE(b.device.trace.size() == 1);
  CHECK(b.device.trace[0].is_write());
  CHECK(b.device.trace[0].addr == 0x04);
  CHECK(b.device.trace[0].wdata == 0x20);
  CHECK(gain.mirror() == 0x20);
  CHECK(gain.known());
}

TEST_CASE("W1C mirror clears only written ones") {
  RegisterModel model;
  model.add_block(ganc_block());
  auto& st = model.lookup("ganc.INT_STATUS");
  st.set_mirror(0b11);
  st.predict_write(0b01);
  CHECK(st.mirror() == 0b10);
}

TEST_CASE("write to a read-only register warns and keeps the mirror") {
  Bench b;
  b.model.reset();
  auto& status = b.model.lookup("ganc.STATUS");
  run_task(b.kernel, reg_write(b.model, status, 1, b.map));
  CHECK(b.device.trace.size() == 1);
  CHECK(status.mirror() == 0);
  CHECK(count_kind(b.model, "reg.ro_write") == 1);
  CHECK(b.model.error_count() == 0);
}

TEST_CASE("read-back self-check") {
  Bench b;
  auto& gain = b.model.lookup("ganc.GAIN");

  SUBCASE("unknown mirror is not compared") {
    const auto rd = run_task(b.kernel, reg_read(b.model, gain, b.map));
    CHECK(rd.value == 0x10);
    CHECK(rd.mismatch == 0);
    CHECK(gain.known());
    CHECK(gain.mirror() == 0x10);
  }
  SUBCASE("write then read passes") {
    run_task(b.kernel, reg_write(b.model, gain, 0x20, b.map));
    const auto rd = run_task(b.kernel, reg_read(b.model, gain, b.map));
    CHECK(rd.value == 0x20);
    CHECK(b.model.error_count() == 0);
  }
  SUBCASE("stuck bit 0 is named") {
    b.device.stuck0["GAIN"] = 0x1;
    run_task(b.kernel, reg_write(b.model, gain, 0x21, b.map));
    const auto rd = run_task(b.kernel, reg_read(b.model, gain, b.map));
    CHECK(rd.value == 0x20);
    CHECK(rd.mismatch == 0x1);
    REQUIRE(b.model.error_count() == 1);
    CHECK(b.model.events().back().kind == "reg.mismatch");
    CHECK(b.model.events().back().message.find("bit(s) 0") != std::string::npos);
    CHECK(b.model.events().back().message.find("ganc.GAIN") != std::string::npos);
  }
}

TEST_CASE("bus errors are reported as register-access failures") {
  Bench b(0);
  RegisterModel other;
  auto& ghost_block = other.add_block(BlockDef{"ghost", {{"R", 0x40, {}}}});
  b.map.add_block(ghost_block, 0);  // device has nothing at 0x40
  CHECK_FALSE(run_task(b.kernel, reg_write(other, *ghost_block.find("R"), 1, b.map)));
  CHECK(count_kind(other, "reg.bus_error") == 1);
}

TEST_CASE("passive prediction") {
  RegisterModel model;
  auto& block = model.add_block(ganc_block());
  AddressMap map("soc", 0x4000'0000);
  map.add_block(block, 0);

  predict(model, map, uvc::BusTxn::write(0x4000'0004, 0x20));
  CHECK(model.lookup("ganc.GAIN").mirror() == 0x20);

  model.lookup("ganc.INT_STATUS").set_mirror(0);
  auto rd = uvc::BusTxn::read(0x4000'0018);
  rd.rdata = 0b10;
  predict(model, map, rd);
  REQUIRE(model.error_count() == 1);
  CHECK(model.events().back().message.find("(passive)") != std::string::npos);
  CHECK(model.lookup("ganc.INT_STATUS").mirror() == 0b10);

  predict(model, map, uvc::BusTxn::read(0x4000'0FFC));
  CHECK(count_kind(model, "reg.unmapped") == 1);
  CHECK(model.error_count() == 1);
}

TEST_CASE("hardware-set prediction keeps interrupt status reads clean") {
  RegisterModel model;
  model.add_block(ganc_block());
  model.reset();
  auto& st = model.lookup("ganc.INT_STATUS");
  st.predict_hw_set(0x1);
  CHECK(st.mirror() == 0x1);
  CHECK(st.read_mismatch(0x1) == 0);
  st.predict_write(0x1);
  CHECK(st.mirror() == 0);
}

TEST_CASE("built-in sequences pass on a correct device") {
  Bench b;
  seq::Rng rng(1, "test");
  const auto reset = run_task(b.kernel, reset_check_seq(b.model, b.map));
  const auto bash = run_task(b.kernel, bitbash_seq(b.model, b.map));
  const auto wra = run_task(b.kernel, write_read_all_seq(b.model, b.map, rng));
  CHECK(reset.passed());
  CHECK(bash.passed());
  CHECK(wra.passed());
  CHECK(reset.verdicts.size() == 8);
  CHECK(reset.reads == 8);
  CHECK(b.model.error_count() == 0);
  // RW field widths: 1 + 8 + 8 + 16 + 16 + 1.
  CHECK(bash.writes == 2 * (1 + 8 + 8 + 16 + 16 + 1));
  CHECK(bash.reads == bash.writes);
}

TEST_CASE("bitbash on an 8-bit field is 16 writes and 16 reads") {
  Bench b(0, BlockDef{"ganc", {{"GAIN", 0x04, {{"GAIN", 0, 8, Access::kRW, 0x10}}}}});
  const auto bash = run_task(b.kernel, bitbash_seq(b.model, b.map));
  CHECK(bash.writes == 16);
  CHECK(bash.reads == 16);
  std::size_t writes = 0;
  for (const auto& t : b.device.trace) writes += t.is_write() ? 1 : 0;
  CHECK(writes == 16);
}

TEST_CASE("reset_check names exactly the register with a bad reset") {
  Bench b;
  b.device.reset_override["WIDTH"] = 0;
  b.device.reset();
  const auto reset = run_task(b.kernel, reset_check_seq(b.model, b.map));
  CHECK_FALSE(reset.passed());
  CHECK(reset.failing_registers() == std::vector<std::string>{"ganc.WIDTH"});
  CHECK(b.model.error_count() == 1);
}

TEST_CASE("bitbash names the stuck bit") {
  Bench b;
  b.device.stuck0["GAIN"] = 0x1;
  const auto bash = run_task(b.kernel, bitbash_seq(b.model, b.map));
  CHECK(bash.failing_registers() == std::vector<std::string>{"ganc.GAIN"});
  for (const auto& v : bash.verdicts) {
    if (!v.passed) CHECK(v.failing_bits == 0x1);
  }
  CHECK(b.model.events().back().message.find("bit(s) 0 ") != std::string::npos);
}

TEST_CASE("built-in address traces differ only by the base") {
  constexpr std::uint64_t kDelta = 0x4000'0000;
  Bench ip(0);
  Bench soc(kDelta);
  seq::Rng rng_ip(5, "wra");
  seq::Rng rng_soc(5, "wra");
  for (Bench* b : {&ip, &soc}) {
    seq::Rng& rng = b == &ip ? rng_ip : rng_soc;
    run_task(b->kernel, reset_check_seq(b->model, b->map));
    run_task(b->kernel, bitbash_seq(b->model, b->map));
    run_task(b->kernel, write_read_all_seq(b->model, b->map, rng));
  }
  REQUIRE(ip.device.trace.size() == soc.device.trace.size());
  REQUIRE_FALSE(ip.device.trace.empty());
  for (std::size_t i = 0; i < ip.device.trace.size(); ++i) {
    CHECK(soc.device.trace[i].addr - ip.device.trace[i].addr == kDelta);
    CHECK(soc.device.trace[i].kind == ip.device.trace[i].kind);
    CHECK(soc.device.trace[i].wdata == ip.device.trace[i].wdata);
  }
}

namespace {

sim::Task<> random_traffic(Bench& b, seq::Rng rng, int ops) {
  auto regs = b.model.registers();
  for (int i = 0; i < ops; ++i) {
    RegisterInstance& r = *regs[rng.below(regs.size())];
    if (rng.chance(0.5)) {
      co_await reg_write(b.model, r, static_cast<std::uint32_t>(rng.next_u64()), b.map);
    } else {
      co_await reg_read(b.model, r, b.map);
    }
  }
}

}  // namespace

TEST_CASE("mirror coherence under random concurrent traffic") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Bench b;
    b.kernel.spawn(random_traffic(b, seq::Rng(seed, "a"), 40), "a");
    b.kernel.spawn(random_traffic(b, seq::Rng(seed, "b"), 40), "b");
    b.kernel.run_until(SimTime::max());
    CHECK(b.model.error_count() == 0);
    CHECK(b.device.max_in_flight == 1);
    CHECK(b.device.trace.size() == 80);
  }
}

TEST_CASE("W1C bits are only cleared by writes and only set by reads") {
  RegisterModel model;
  model.add_block(BlockDef{"b", {{"ST", 0, {{"C", 0, 4, Access::kW1C, 0}, {"D", 4, 4, Access::kRW, 0}}}}});
  auto& st = model.lookup("b.ST");
  st.reset();
  seq::Rng rng(3, "w1c");
  for (int i = 0; i < 2000; ++i) {
    const std::uint32_t before = st.mirror() & 0xF;
    const auto v = static_cast<std::uint32_t>(rng.next_u64());
    if (rng.chance(0.7)) {
      st.predict_write(v);
      const std::uint32_t after = st.mirror() & 0xF;
      CHECK((after & ~before) == 0);
      CHECK(after == (before & ~(v & 0xF)));
    } else {
      st.predict_read(v);
      CHECK((st.mirror() & 0xF) == (v & 0xF));
    }
  }
}
