#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bwa/harness.hpp"

using namespace bwa;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("expected matrix covers every cell once") {
  for (auto a : kAllAttacks)
    for (auto p : kAllProtocols) {
      int n = 0;
      for (const auto& c : kExpectedMatrix) n += c.attack == a && c.protocol == p;
      CHECK(n == 1);
    }
}

TEST_CASE("default matrix reproduces the reference grid") {
  const AttackMatrix m = run_matrix(ScenarioConfig{});
  CHECK(m.cells.size() == 35);
  CHECK(mismatches(m).empty());
  const std::string csv = to_csv(m);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 36);
  CHECK(csv.rfind("attack,protocol,verdict,metric_name,metric_value\n", 0) == 0);
}

TEST_CASE("one-protocol run agrees with the full grid") {
  ScenarioConfig cfg;
  cfg.protocols = {ProtocolId::HA};
  const AttackMatrix column = run_matrix(cfg);
  const AttackMatrix full = run_matrix(ScenarioConfig{});
  CHECK(column.cells.size() == 7);
  for (const auto& c : column.cells) CHECK(c.verdict == full.at(c.attack, ProtocolId::HA).verdict);
}

TEST_CASE("trials vote across seeds") {
  ScenarioConfig cfg;
  cfg.trials = 3;
  cfg.protocols = {ProtocolId::PKMv2};
  const AttackMatrix m = run_matrix(cfg);
  CHECK(mismatches(m).empty());
  for (const auto& c : m.cells) CHECK(c.metrics.at("trials_agreeing") == 3);
}

TEST_CASE("weakened protocol fails the check") {
  ScenarioConfig cfg;
  cfg.weaken = {ProtocolId::ISNAP};
  CHECK_FALSE(mismatches(run_matrix(cfg)).empty());
}

TEST_CASE("reports are written and deterministic") {
  const auto dir = std::filesystem::temp_directory_path() / "bwa_harness_test";
  std::filesystem::remove_all(dir);
  const ScenarioConfig cfg;
  emit_reports(run_matrix(cfg), overheads_for(cfg), (dir / "a").string());
  emit_reports(run_matrix(cfg), overheads_for(cfg), (dir / "b").string());
  for (const char* f : {"matrix.json", "matrix.csv", "overheads.json", "overheads.csv", "trace.log"}) {
    CAPTURE(f);
    REQUIRE(std::filesystem::exists(dir / "a" / f));
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("unwritable path names the path") {
  const std::string bad = "/proc/definitely/not/writable";
  try {
    emit_reports(AttackMatrix{}, transmission_report(SizeModel{}), bad);
    FAIL("expected an error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("/proc/definitely") != std::string::npos);
  }
}

TEST_CASE("scenario JSON parsing") {
  const auto c = scenario_from_json(nlohmann::json::parse(
      R"({"protocols": ["TSA", "HA"], "attacks": ["dos"], "seed": 9, "budget": 2,
          "overload": "queue", "weaken": ["HA"], "receiver_lag_s": 12.5})"));
  CHECK(c.protocols == std::vector{ProtocolId::TSA, ProtocolId::HA});
  CHECK(c.attacks == std::vector{AttackKind::DoS});
  CHECK(c.seed == 9);
  CHECK(c.budget == 2);
  CHECK(c.overload == OverloadPolicy::Queue);
  CHECK(c.weakened(ProtocolId::HA));
  CHECK(c.receiver_lag_s == 12.5);

  auto bad = [](const char* text) {
    CHECK_THROWS_AS(scenario_from_json(nlohmann::json::parse(text)), ConfigError);
  };
  bad(R"({"mystery": 1})");
  bad(R"({"protocols": ["PKMv3"]})");
  bad(R"({"attacks": ["teleport"]})");
  bad(R"({"seed": "one"})");
  bad(R"({"budget": -1})");
  bad(R"({"budget": 0})");
  bad(R"({"trials": 1.5})");
  bad(R"({"adversary_delay_s": 0})");
  bad(R"({"overload": "sometimes"})");
  bad(R"([1, 2])");
}

TEST_CASE("scenario JSON round trip") {
  ScenarioConfig c;
  c.seed = 77;
  c.protocols = {ProtocolId::ISNAP};
  const ScenarioConfig back = scenario_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
}
