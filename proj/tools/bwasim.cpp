// bwasim: run authorization attack scenarios and overhead reports.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "bwa/harness.hpp"

using namespace bwa;

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::vector<std::string> protocols;
  std::vector<std::string> attacks;
  bool check = false;
};

ScenarioConfig resolve(const Flags& f) {
  ScenarioConfig cfg = f.config.empty() ? ScenarioConfig{} : load_scenario(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (f.out_dir) cfg.out_dir = *f.out_dir;
  if (!f.protocols.empty()) {
    cfg.protocols.clear();
    for (const auto& s : f.protocols) {
      auto p = parse_protocol(s);
      if (!p) throw ConfigError("unknown protocol '" + s + "'");
      cfg.protocols.push_back(*p);
    }
  }
  if (!f.attacks.empty()) {
    cfg.attacks.clear();
    for (const auto& s : f.attacks) {
      auto a = parse_attack(s);
      if (!a) throw ConfigError("unknown attack '" + s + "'");
      cfg.attacks.push_back(*a);
    }
  }
  cfg.validate();
  return cfg;
}

void print_matrix(const AttackMatrix& m) {
  fmt::print("{:<16} {:<6} {:<15} {}\n", "attack", "proto", "verdict", "reason");
  for (const auto& c : m.cells)
    fmt::print("{:<16} {:<6} {:<15} {}\n", to_string(c.attack), to_string(c.protocol),
               to_string(c.verdict), c.reason);
}

int cmd_matrix(const Flags& f) {
  const ScenarioConfig cfg = resolve(f);
  const AttackMatrix m = run_matrix(cfg);
  emit_reports(m, overheads_for(cfg), cfg.out_dir);
  print_matrix(m);
  fmt::print("reports written to {}\n", cfg.out_dir);
  if (!f.check) return 0;
  const auto bad = mismatches(m);
  for (const auto& line : bad) fmt::print(stderr, "MISMATCH {}\n", line);
  fmt::print("check: {}\n", bad.empty() ? "matrix matches expected" : "matrix differs");
  return bad.empty() ? 0 : 1;
}

AttackOutcome single(const Flags& f, ScenarioConfig& cfg) {
  cfg = resolve(f);
  if (cfg.attacks.size() != 1 || cfg.protocols.size() != 1)
    throw ConfigError("give exactly one --attack and one --protocol");
  return run_attack(cfg.attacks.front(), cfg.protocols.front(), cfg);
}

int cmd_attack(const Flags& f) {
  ScenarioConfig cfg;
  const AttackOutcome o = single(f, cfg);
  fmt::print("{} on {}: {}\n{}\n", to_string(o.attack), to_string(o.protocol),
             to_string(o.verdict), o.reason);
  for (const auto& [k, v] : o.metrics) fmt::print("  {} = {}\n", k, v);
  for (const auto& leak : o.leaks) fmt::print("  LEAK {}\n", leak);
  if (f.check) return o.verdict == expected_verdict(o.attack, o.protocol) ? 0 : 1;
  return 0;
}

int cmd_trace(const Flags& f) {
  ScenarioConfig cfg;
  const AttackOutcome o = single(f, cfg);
  std::cout << o.trace;
  if (f.out_dir) {
    std::filesystem::create_directories(cfg.out_dir);
    write_file((std::filesystem::path(cfg.out_dir) / "trace.log").string(), o.trace);
  }
  return 0;
}

int cmd_overhead(const Flags& f) {
  const ScenarioConfig cfg = resolve(f);
  const OverheadReport r = overheads_for(cfg);
  std::cout << to_csv(r);
  for (const auto& o : r.orderings) fmt::print("{:<14} {}\n", o.claim, o.holds ? "holds" : "FAILS");
  fmt::print("chi per node {} bytes, fleet of {} {} bytes\n", r.storage.chi_bytes, cfg.fleet,
             r.storage.fleet_bytes);
  if (f.out_dir) {
    std::filesystem::create_directories(cfg.out_dir);
    const std::filesystem::path d(cfg.out_dir);
    write_file((d / "overheads.json").string(), to_json(r).dump(2) + "\n");
    write_file((d / "overheads.csv").string(), to_csv(r));
  }
  if (f.check) return r.all_orderings_hold() ? 0 : 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate 802.16 authorization frameworks under attack"};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "JSON scenario file")->check(CLI::ExistingFile);
    sub->add_option("--seed", f.seed, "RNG seed");
    sub->add_option("--out-dir", f.out_dir, "Directory for reports");
    sub->add_option("--protocol", f.protocols, "PKMv1, PKMv2, TSA, HA or ISNAP (repeatable)");
    sub->add_option("--attack", f.attacks, "Attack name (repeatable)");
    sub->add_flag("--check", f.check, "Exit 1 unless results match the expected matrix");
  };

  int rc = 0;
  auto* matrix = app.add_subcommand("matrix", "Run every attack against every protocol");
  auto* attack = app.add_subcommand("attack", "Run one attack against one protocol");
  auto* overhead = app.add_subcommand("overhead", "Print storage, compute and byte overheads");
  auto* trace = app.add_subcommand("trace", "Print the event trace of one attack run");
  for (auto* sub : {matrix, attack, overhead, trace}) add_common(sub);

  CLI11_PARSE(app, argc, argv);
  try {
    if (matrix->parsed()) rc = cmd_matrix(f);
    else if (attack->parsed()) rc = cmd_attack(f);
    else if (overhead->parsed()) rc = cmd_overhead(f);
    else if (trace->parsed()) rc = cmd_trace(f);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return rc;
}
