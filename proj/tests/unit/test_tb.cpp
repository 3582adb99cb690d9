#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "vfab/tb/agent.hpp"
#include "vfab/tb/agent_plan.hpp"
#include "vfab/tb/component.hpp"
#include "vfab/tb/phases.hpp"

using namespace vfab;
using namespace vfab::tb;
using sim::SimTime;

namespace {

struct Top : Component {
  Top(std::string name, ComponentTree& tree) : Component(std::move(name), tree) {}
  std::function<void(Component&)> on_build;
  void build_phase() override {
    if (on_build) on_build(*this);
  }
};

struct StubMonitor : Component {
  StubMonitor(std::string name, Component* parent)
      : Component(std::move(name), parent, ComponentKind::kMonitor) {}
  AnalysisPort<int> ap{*this, "ap"};
};
struct LoudMonitor : StubMonitor {
  using StubMonitor::StubMonitor;
};
struct StubDriver : Component {
  StubDriver(std::string name, Component* parent)
      : Component(std::move(name), parent, ComponentKind::kDriver) {}
};
struct StubSequencer : Component {
  StubSequencer(std::string name, Component* parent)
      : Component(std::move(name), parent, ComponentKind::kSequencer) {}
};

struct StubAgent : Agent {
  using Agent::Agent;
  Component& make_monitor() override { return create_via_factory<StubMonitor, StubMonitor>("monitor"); }
  Component& make_sequencer() override { return create<StubSequencer>("sequencer"); }
  Component& make_driver() override { return create<StubDriver>("driver"); }
};

struct StubChecker : Component {
  StubChecker(std::string name, Component* parent)
      : Component(std::move(name), parent, ComponentKind::kChecker) {}
};

/// Environment whose agent set follows an interface profile.
struct ProfileEnv : Component {
  ProfileEnv(std::string name, Component* parent, InterfaceProfile profile)
      : Component(std::move(name), parent, ComponentKind::kEnv), profile_(profile) {}
  void build_phase() override {
    const auto plan = derive_agent_plan(profile_);
    for (const auto& n : plan.reg_agents) create<StubAgent>(n);
    for (const auto& v : plan.video_agents) create<StubAgent>(v.name);
    for (const auto& n : plan.interrupt_checkers) create<StubChecker>(n);
  }
  InterfaceProfile profile_;
};

const InterfaceProfile kGancProfile{1, 0, 1, 1, 1};

std::set<std::string> child_names(const Component& c) {
  std::set<std::string> out;
  for (const auto& ch : c.children()) out.insert(ch->name());
  return out;
}

void build_only(ComponentTree& tree) {
  tree.set_phase(Phase::kBuild);
  // Same order as run_phases: parent build, then children.
  std::function<void(Component&)> rec = [&](Component& c) {
    c.build_phase();
    for (std::size_t i = 0; i < c.children().size(); ++i) rec(*c.children()[i]);
  };
  rec(*tree.root());
}

}  // namespace

TEST_CASE("agent plan counts follow the interface profile") {
  const auto plan = derive_agent_plan({2, 1, 3, 4, 1});
  CHECK(plan.reg_agents.size() == 1);
  CHECK(plan.video_agents.size() == 3);
  CHECK(plan.interrupt_checkers.size() == 4);
  CHECK(plan.warnings.size() == 1);
  CHECK(plan.video_agents[1].drives_input);
  CHECK(plan.video_agents[1].monitors_output);
  CHECK_FALSE(plan.video_agents[2].drives_input);
  CHECK(plan.video_agents[2].monitors_output);

  const auto empty = derive_agent_plan({0, 0, 0, 0, 0});
  CHECK(empty.reg_agents.empty());
  CHECK(empty.video_agents.empty());
  CHECK(empty.interrupt_checkers.empty());
  CHECK(empty.warnings.empty());

  const auto ganc = derive_agent_plan(kGancProfile);
  CHECK(ganc.reg_agents.size() == 1);
  CHECK(ganc.video_agents.size() == 1);
  CHECK(ganc.interrupt_checkers.size() == 1);
}

TEST_CASE("video agent count is max(inputs, outputs) for every small profile") {
  for (unsigned a = 0; a < 6; ++a) {
    for (unsigned c = 0; c < 6; ++c) {
      const auto plan = derive_agent_plan({a, 0, c, 0, 0});
      REQUIRE(plan.video_agents.size() == std::max(a, c));
      for (const auto& v : plan.video_agents) {
        CHECK(v.drives_input == (v.index < a));
        CHECK(v.monitors_output == (v.index < c));
      }
    }
  }
}

TEST_CASE("config db glob matching and precedence") {
  ConfigDB db;
  db.set("**", "is_active", true);
  db.set("soc.ip1.*", "is_active", false);
  CHECK(db.get_as<bool>("soc.ip1.reg_agent", "is_active") == false);
  CHECK(db.get_as<bool>("soc.ip2.reg_agent", "is_active") == true);
  CHECK_FALSE(db.get("soc.ip1.reg_agent", "never_set").has_value());
  db.set("soc.*.video_agent", "bpp", std::int64_t{8});
  CHECK(db.get_as<std::int64_t>("soc.ip1.video_agent", "bpp") == 8);
  CHECK_FALSE(db.get("soc.ip1.x.video_agent", "bpp").has_value());

  CHECK(glob_match("**", "a"));
  CHECK(glob_match("a.**", "a"));
  CHECK(glob_match("a.**.d", "a.b.c.d"));
  CHECK(glob_match("*.ganc_env.*", "ip.ganc_env.reg_agent0"));
  CHECK_FALSE(glob_match("*.ganc_env.*", "ip.ganc_env.reg_agent0.monitor"));
  CHECK(glob_match("ip.video_agent*", "ip.video_agent3"));
}

TEST_CASE("config files use the pattern key value grammar") {
  std::istringstream in(
      "# comment\n"
      "**            is_active true\n"
      "ip.ganc_env.* is_active false  # trailing comment\n"
      "\n"
      "test          frames    0x10\n"
      "test          name      smoke\n");
  ConfigDB db;
  db.load(in);
  CHECK(db.entries().size() == 4);
  CHECK(db.get_as<bool>("ip.ganc_env.reg_agent0", "is_active") == false);
  CHECK(db.get_as<std::int64_t>("test", "frames") == 16);
  CHECK(db.get_as<std::string>("test", "name") == "smoke");

  std::istringstream bad("a.b key\n");
  CHECK_THROWS_WITH_AS(db.load(bad), "config line 1: expected `pattern key value`",
                       std::runtime_error);
}

TEST_CASE("default GANC-profile env builds active agents") {
  sim::Kernel k;
  ConfigDB cfg;
  cfg.set("**", "vif", std::string("ip.bus"));
  ComponentTree tree(k, cfg);
  auto& top = tree.make_root<Top>("ip");
  top.on_build = [](Component& self) { self.create<ProfileEnv>("ganc_env", kGancProfile); };
  build_only(tree);

  auto* reg = dynamic_cast<Agent*>(tree.find("ip.ganc_env.reg_agent0"));
  auto* video = dynamic_cast<Agent*>(tree.find("ip.ganc_env.video_agent0"));
  REQUIRE(reg != nullptr);
  REQUIRE(video != nullptr);
  CHECK(tree.find("ip.ganc_env.irq_checker0") != nullptr);
  CHECK(reg->is_active());
  CHECK(child_names(*reg) == std::set<std::string>{"driver", "monitor", "sequencer"});
  CHECK(child_names(*video) == std::set<std::string>{"driver", "monitor", "sequencer"});
}

TEST_CASE("passive configuration leaves monitors only") {
  sim::Kernel k;
  ConfigDB cfg;
  cfg.set("**", "vif", std::string("ip.bus"));
  cfg.set("*.ganc_env.*", "is_active", false);
  ComponentTree tree(k, cfg);
  auto& top = tree.make_root<Top>("soc");
  top.on_build = [](Component& self) { self.create<ProfileEnv>("ganc_env", kGancProfile); };
  build_only(tree);
  for (const char* p : {"soc.ganc_env.reg_agent0", "soc.ganc_env.video_agent0"}) {
    auto* agent = dynamic_cast<Agent*>(tree.find(p));
    REQUIRE(agent != nullptr);
    CHECK_FALSE(agent->is_active());
    CHECK(child_names(*agent) == std::set<std::string>{"monitor"});
  }
}

TEST_CASE("active/passive child sets hold for random configurations") {
  std::mt19937_64 gen(1234);
  for (int trial = 0; trial < 50; ++trial) {
    sim::Kernel k;
    ConfigDB cfg;
    cfg.set("**", "vif", std::string("x"));
    const InterfaceProfile profile{static_cast<unsigned>(gen() % 4), 0,
                                   static_cast<unsigned>(gen() % 4), static_cast<unsigned>(gen() % 3),
                                   static_cast<unsigned>(gen() % 3)};
    std::map<std::string, bool> expected;
    for (int i = 0; i < 4; ++i) {
      const bool active = (gen() & 1U) != 0;
      const auto name = fmt::format("top.env.video_agent{}", i);
      cfg.set(name, "is_active", active);
      expected[name] = active;
    }
    ComponentTree tree(k, cfg);
    auto& top = tree.make_root<Top>("top");
    top.on_build = [profile](Component& self) { self.create<ProfileEnv>("env", profile); };
    build_only(tree);
    for (Component* c : tree.all()) {
      auto* agent = dynamic_cast<Agent*>(c);
      if (agent == nullptr) continue;
      const auto names = child_names(*agent);
      if (agent->is_active()) {
        CHECK(names == std::set<std::string>{"driver", "monitor", "sequencer"});
      } else {
        CHECK(names == std::set<std::string>{"monitor"});
      }
      if (auto it = expected.find(agent->path()); it != expected.end()) {
        CHECK(agent->is_active() == it->second);
      }
    }
  }
}

TEST_CASE("duplicate child names are a build error") {
  sim::Kernel k;
  ComponentTree tree(k);
  auto& top = tree.make_root<Top>("ip");
  top.on_build = [](Component& self) {
    auto& agent = self.create<StubChecker>("agent");
    agent.create<StubMonitor>("mon");
    agent.create<StubMonitor>("mon");
  };
  CHECK_THROWS_AS(run_phases(tree, SimTime(100)), BuildError);
}

TEST_CASE("active agent without interface binding is a build error") {
  sim::Kernel k;
  ComponentTree tree(k);
  auto& top = tree.make_root<Top>("ip");
  top.on_build = [](Component& self) { self.create<StubAgent>("reg_agent0"); };
  CHECK_THROWS_AS(run_phases(tree, SimTime(100)), BuildError);
}

TEST_CASE("children cannot be created outside the build phase") {
  sim::Kernel k;
  ComponentTree tree(k);
  auto& top = tree.make_root<Top>("ip");
  CHECK_THROWS_AS(top.create<StubMonitor>("late"), PhaseError);
}

TEST_CASE("factory override substitutes the monitor by path pattern") {
  sim::Kernel k;
  ConfigDB cfg;
  cfg.set("**", "vif", std::string("x"));
  ComponentTree tree(k, cfg);
  tree.factory().set_override<StubMonitor>("ip.env.video_agent*.monitor",
                                           [](std::string name, Component* parent) {
                                             return std::make_unique<LoudMonitor>(std::move(name), parent);
                                           });
  auto& top = tree.make_root<Top>("ip");
  top.on_build = [](Component& self) { self.create<ProfileEnv>("env", kGancProfile); };
  build_only(tree);
  CHECK(dynamic_cast<LoudMonitor*>(tree.find("ip.env.video_agent0.monitor")) != nullptr);
  CHECK(dynamic_cast<LoudMonitor*>(tree.find("ip.env.reg_agent0.monitor")) == nullptr);
}

namespace {

struct Scoreboard : Component {
  Scoreboard(std::string name, Component* parent)
      : Component(std::move(name), parent, ComponentKind::kScoreboard) {}
  std::vector<int> seen;
  AnalysisExport<int> in{*this, "in", [this](const int& v) { seen.push_back(v); }};
  int fail_on = -1;
  void check_phase() override {
    for (int v : seen) {
      if (v == fail_on) fail("data.mismatch", fmt::format("item {} rejected", v));
    }
  }
};

struct Publisher : Component {
  Publisher(std::string name, Component* parent)
      : Component(std::move(name), parent, ComponentKind::kMonitor) {}
  AnalysisPort<int> ap{*this, "ap"};
  SimTime finish{5000};
  bool connect_late = false;
  Scoreboard* late_target = nullptr;
  sim::Task<> run_phase() override {
    tree().raise_objection(*this);
    co_await kernel().delay(SimTime(100));
    if (connect_late) ap.connect(late_target->in);
    ap.write(1);
    ap.write(2);
    co_await kernel().delay(finish - SimTime(100));
    tree().drop_objection(*this);
  }
  bool daemon_run() const override { return false; }
};

struct Env : Component {
  Env(std::string name, ComponentTree& tree) : Component(std::move(name), tree) {}
  Publisher* pub = nullptr;
  Scoreboard* sb1 = nullptr;
  Scoreboard* sb2 = nullptr;
  void build_phase() override {
    pub = &create<Publisher>("mon");
    sb1 = &create<Scoreboard>("sb1");
    sb2 = &create<Scoreboard>("sb2");
  }
  void connect_phase() override {
    tree().connect_analysis(pub->path(), "ap", sb1->path(), "in");
    pub->ap.connect(sb2->in);
  }
};

}  // namespace

TEST_CASE("run_phases passes when objections drop and no checker fails") {
  sim::Kernel k;
  ComponentTree tree(k);
  auto& env = tree.make_root<Env>("ip");
  const auto result = run_phases(tree, SimTime(1'000'000));
  CHECK(result.passed);
  CHECK(result.end_time == SimTime(5000));
  CHECK(env.sb1->seen == std::vector<int>{1, 2});
  CHECK(env.sb2->seen == std::vector<int>{1, 2});
}

TEST_CASE("a scoreboard mismatch fails the test with one entry") {
  sim::Kernel k;
  ComponentTree tree(k);
  struct FailingEnv : Env {
    using Env::Env;
    void connect_phase() override {
      Env::connect_phase();
      sb1->fail_on = 2;
    }
  };
  tree.make_root<FailingEnv>("ip");
  const auto result = run_phases(tree, SimTime(1'000'000));
  CHECK_FALSE(result.passed);
  CHECK_FALSE(result.hang);
  REQUIRE(result.failures.size() == 1);
  CHECK(result.failures[0].kind == "data.mismatch");
  CHECK(result.failures[0].source == "ip.sb1");
}

TEST_CASE("watchdog expiry reports a hang with suspended processes") {
  sim::Kernel k;
  ComponentTree tree(k);
  struct Stuck : Component {
    Stuck(std::string name, ComponentTree& t) : Component(std::move(name), t) {}
    sim::Signal* ack = nullptr;
    void build_phase() override { ack = &kernel().make_signal("ip.ack", 1); }
    sim::Task<> run_phase() override {
      tree().raise_objection(*this);
      co_await ack->posedge();  // never acknowledged
      tree().drop_objection(*this);
    }
    bool daemon_run() const override { return false; }
  };
  tree.make_root<Stuck>("ip");
  const auto result = run_phases(tree, SimTime(1'000'000));
  CHECK_FALSE(result.passed);
  CHECK(result.hang);
  REQUIRE(result.failures.size() == 1);
  CHECK(result.failures[0].kind == "hang");
  CHECK(result.failures[0].message.find("ip") != std::string::npos);
}

TEST_CASE("analysis connections during the run phase are rejected") {
  sim::Kernel k;
  ComponentTree tree(k);
  struct LateEnv : Env {
    using Env::Env;
    void connect_phase() override {
      Env::connect_phase();
      pub->connect_late = true;
      pub->late_target = sb1;
    }
  };
  tree.make_root<LateEnv>("ip");
  const auto result = run_phases(tree, SimTime(1'000'000));
  CHECK_FALSE(result.passed);
  REQUIRE_FALSE(result.failures.empty());
  CHECK(result.failures[0].kind == "error");
  CHECK(result.failures[0].message.find("only allowed before the run phase") != std::string::npos);
}

TEST_CASE("name-based connection checks item types") {
  sim::Kernel k;
  ComponentTree tree(k);
  struct Other : Component {
    Other(std::string name, Component* parent) : Component(std::move(name), parent) {}
    AnalysisExport<std::string> in{*this, "in", [](const std::string&) {}};
  };
  struct MixedEnv : Component {
    MixedEnv(std::string name, ComponentTree& t) : Component(std::move(name), t) {}
    void build_phase() override {
      create<Publisher>("mon");
      create<Other>("other");
    }
    void connect_phase() override { tree().connect_analysis("ip.mon", "ap", "ip.other", "in"); }
  };
  tree.make_root<MixedEnv>("ip");
  CHECK_THROWS_AS(run_phases(tree, SimTime(100)), BuildError);
}

TEST_CASE("phase stamps order build before connect before run") {
  sim::Kernel k;
  ConfigDB cfg;
  cfg.set("**", "vif", std::string("x"));
  ComponentTree tree(k, cfg);
  auto& top = tree.make_root<Top>("ip");
  top.on_build = [](Component& self) {
    self.create<ProfileEnv>("a", InterfaceProfile{2, 0, 1, 1, 2});
    self.create<ProfileEnv>("b", kGancProfile);
  };
  const auto result = run_phases(tree, SimTime(100));
  CHECK(result.passed);
  std::uint64_t last_build = 0;
  std::uint64_t first_connect = ~0ULL;
  std::uint64_t last_connect = 0;
  std::uint64_t first_run = ~0ULL;
  for (Component* c : tree.all()) {
    last_build = std::max(last_build, c->stamps().build_done);
    first_connect = std::min(first_connect, c->stamps().connect_begin);
    last_connect = std::max(last_connect, c->stamps().connect_done);
    first_run = std::min(first_run, c->stamps().run_begin);
    if (c->parent() != nullptr) CHECK(c->parent()->stamps().build_done < c->stamps().build_done);
  }
  CHECK(last_build < first_connect);
  CHECK(last_connect < first_run);
}
