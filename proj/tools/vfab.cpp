// vfab: regression runner and IP-XACT bundle generator.
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "vfab/demo/harness.hpp"
#include "vfab/ipxact/flow.hpp"

namespace {

using vfab::demo::Level;

int cmd_run(const vfab::demo::RunOptions& opts) {
  const auto r = vfab::demo::run_test(opts);
  std::cout << vfab::demo::format_text(r);
  if (!opts.report_dir.empty()) std::cout << "report written to " << opts.report_dir << "\n";
  return r.passed ? 0 : 1;
}

int cmd_gen(const std::string& xml_path, const std::string& map_path, const std::string& out_path) {
  try {
    const auto parsed = vfab::ipxact::parse_ipxact(vfab::ipxact::read_file(xml_path));
    for (const auto& w : parsed.warnings) std::cerr << "warning: " << w << "\n";
    const auto amap = vfab::ipxact::parse_attr_map(vfab::ipxact::read_file(map_path));
    const auto cross = vfab::ipxact::validate_cross(parsed.ir, amap);
    for (const auto& w : cross.warnings) std::cerr << "warning: " << w << "\n";
    if (!cross.ok()) {
      for (const auto& e : cross.errors) std::cerr << "error: " << e << "\n";
      return 1;
    }
    const std::string bundle = vfab::ipxact::emit_bundle(parsed.ir, amap);
    std::ofstream out(out_path, std::ios::binary);
    out << bundle;
    if (!out) {
      std::cerr << "error: cannot write " << out_path << "\n";
      return 1;
    }
  } catch (const vfab::ipxact::FlowError& e) {
    if (e.line() > 0) {
      std::cerr << fmt::format("error: line {}: {}\n", e.line(), e.what());
    } else {
      std::cerr << "error: " << e.what() << "\n";
    }
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int cmd_list() {
  for (const auto& t : vfab::demo::test_registry()) {
    std::string levels;
    for (Level l : t.levels) levels += (levels.empty() ? "" : ",") + vfab::demo::to_string(l);
    std::cout << fmt::format("{:<18} {:<16} {}\n", t.name, levels, t.description);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vfab: layered verification demo"};
  app.require_subcommand(1);

  vfab::demo::RunOptions opts;
  std::string level;
  std::uint64_t watchdog = opts.watchdog.ticks();
  auto* run = app.add_subcommand("run", "run one test");
  run->add_option("--test", opts.test, "registered test name")->required();
  run->add_option("--level", level, "ip, subsys or soc (default: the test's first level)");
  run->add_option("--seed", opts.seed, "random seed")->default_val(1);
  run->add_option("--config", opts.config_file, "config file of `pattern key value` lines");
  run->add_option("--set", opts.config_lines, "extra `pattern key value` config line");
  run->add_option("--fault", opts.fault, "fault mode injected into the DUT")->default_val("none");
  run->add_option("--report", opts.report_dir, "directory for report.txt and report.kv");
  run->add_option("--bundle", opts.bundle_file, "register bundle replacing the shipped one");
  run->add_option("--watchdog", watchdog, "simulated ns before a hang is declared");

  std::string xml_path, map_path, out_path;
  auto* gen = app.add_subcommand("gen", "generate a bundle from IP-XACT and an attribute map");
  gen->add_option("--ipxact", xml_path)->required();
  gen->add_option("--attrmap", map_path)->required();
  gen->add_option("--out", out_path)->required();

  auto* list = app.add_subcommand("list-tests", "list registered tests and their levels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) {
      if (!level.empty()) {
        opts.level = vfab::demo::parse_level(level);
        if (!opts.level) throw vfab::demo::UsageError(fmt::format("unknown level '{}'", level));
      }
      opts.watchdog = vfab::sim::SimTime(watchdog);
      return cmd_run(opts);
    }
    if (gen->parsed()) return cmd_gen(xml_path, map_path, out_path);
    if (list->parsed()) return cmd_list();
  } catch (const vfab::demo::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
