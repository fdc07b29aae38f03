#include "bwa/harness.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

#include <fmt/format.h>

namespace bwa {

namespace {

using A = AttackKind;
using P = ProtocolId;
using V = Verdict;

}  // namespace

const std::array<ExpectedCell, 35> kExpectedMatrix = {{
    // A captured trigger restarts a cycle every time unless a freshness
    // window rejects it before any work is done.
    {A::WaterTorture, P::PKMv1, V::Success},
    {A::WaterTorture, P::PKMv2, V::Success},
    {A::WaterTorture, P::TSA, V::Success},
    {A::WaterTorture, P::HA, V::Success},
    {A::WaterTorture, P::ISNAP, V::Failed},
    // Same mechanism, measured as lost legitimate joins.
    {A::DoS, P::PKMv1, V::Success},
    {A::DoS, P::PKMv2, V::Success},
    {A::DoS, P::TSA, V::Success},
    {A::DoS, P::HA, V::Success},
    {A::DoS, P::ISNAP, V::Failed},
    // No freshness at all; nonces stop the ack but not the request; stamps
    // stop everything.
    {A::MessageReplay, P::PKMv1, V::Success},
    {A::MessageReplay, P::PKMv2, V::PartialSuccess},
    {A::MessageReplay, P::TSA, V::Failed},
    {A::MessageReplay, P::HA, V::Failed},
    {A::MessageReplay, P::ISNAP, V::Failed},
    // Fixed networks do not register MACs; a plaintext MAC in the ack can be
    // reused; a sealed one cannot.
    {A::IdentityTheft, P::PKMv1, V::NotApplicable},
    {A::IdentityTheft, P::PKMv2, V::Success},
    {A::IdentityTheft, P::TSA, V::NotApplicable},
    {A::IdentityTheft, P::HA, V::Success},
    {A::IdentityTheft, P::ISNAP, V::Failed},
    // Only a BS signature lets the SS tell a rogue BS apart.
    {A::Impersonation, P::PKMv1, V::Success},
    {A::Impersonation, P::PKMv2, V::Failed},
    {A::Impersonation, P::TSA, V::Success},
    {A::Impersonation, P::HA, V::Failed},
    {A::Impersonation, P::ISNAP, V::Failed},
    // Needs a two-sided handshake; stamps expose the held-back messages.
    {A::Interleaving, P::PKMv1, V::NotApplicable},
    {A::Interleaving, P::PKMv2, V::Success},
    {A::Interleaving, P::TSA, V::NotApplicable},
    {A::Interleaving, P::HA, V::Failed},
    {A::Interleaving, P::ISNAP, V::Failed},
    // A lagging receiver accepts held-back stamps unless its clock is kept
    // in sync.
    {A::SuppressReplay, P::PKMv1, V::NotApplicable},
    {A::SuppressReplay, P::PKMv2, V::NotApplicable},
    {A::SuppressReplay, P::TSA, V::Success},
    {A::SuppressReplay, P::HA, V::Success},
    {A::SuppressReplay, P::ISNAP, V::Failed},
}};

Verdict expected_verdict(AttackKind a, ProtocolId p) {
  for (const auto& c : kExpectedMatrix)
    if (c.attack == a && c.protocol == p) return c.verdict;
  throw std::logic_error("expected matrix is missing a cell");
}

const AttackOutcome& AttackMatrix::at(AttackKind a, ProtocolId p) const {
  for (const auto& c : cells)
    if (c.attack == a && c.protocol == p) return c;
  throw std::out_of_range(fmt::format("no matrix cell {}/{}", to_string(a), to_string(p)));
}

AttackMatrix run_matrix(const ScenarioConfig& cfg) {
  cfg.validate();
  AttackMatrix m;
  for (auto a : cfg.attacks) {
    for (auto p : cfg.protocols) {
      AttackOutcome first = run_attack(a, p, cfg);
      if (cfg.trials > 1) {
        // Majority verdict across seeds; ties keep the first trial's.
        std::map<Verdict, int> votes{{first.verdict, 1}};
        double sum = first.metric_value;
        for (int t = 1; t < cfg.trials; ++t) {
          ScenarioConfig c = cfg;
          c.seed = cfg.seed + static_cast<std::uint64_t>(t);
          const AttackOutcome o = run_attack(a, p, c);
          ++votes[o.verdict];
          sum += o.metric_value;
        }
        Verdict best = first.verdict;
        for (const auto& [v, n] : votes)
          if (n > votes[best]) best = v;
        first.metrics["trials"] = cfg.trials;
        first.metrics["trials_agreeing"] = votes[best];
        first.verdict = best;
        first.metric_value = sum / cfg.trials;
      }
      m.cells.push_back(std::move(first));
    }
  }
  return m;
}

std::vector<std::string> mismatches(const AttackMatrix& m) {
  std::vector<std::string> out;
  for (const auto& c : m.cells) {
    const Verdict want = expected_verdict(c.attack, c.protocol);
    if (c.verdict != want)
      out.push_back(fmt::format("{} on {}: got {}, expected {} ({})", to_string(c.attack),
                                to_string(c.protocol), to_string(c.verdict), to_string(want),
                                c.reason));
  }
  return out;
}

nlohmann::json to_json(const AttackMatrix& m) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : m.cells) {
    cells.push_back({{"attack", to_string(c.attack)},
                     {"protocol", to_string(c.protocol)},
                     {"verdict", to_string(c.verdict)},
                     {"expected", to_string(expected_verdict(c.attack, c.protocol))},
                     {"reason", c.reason},
                     {"metric_name", c.metric_name},
                     {"metric_value", c.metric_value},
                     {"metrics", c.metrics},
                     {"leaks", c.leaks}});
  }
  return {{"cells", cells}, {"mismatches", mismatches(m)}};
}

std::string to_csv(const AttackMatrix& m) {
  std::string out = "attack,protocol,verdict,metric_name,metric_value\n";
  for (const auto& c : m.cells)
    out += fmt::format("{},{},{},{},{}\n", to_string(c.attack), to_string(c.protocol),
                       to_string(c.verdict), c.metric_name.empty() ? "none" : c.metric_name,
                       c.metric_value);
  return out;
}

std::string combined_trace(const AttackMatrix& m) {
  std::string out;
  for (const auto& c : m.cells) {
    out += fmt::format("== {} / {} : {} ==\n", to_string(c.attack), to_string(c.protocol),
                       to_string(c.verdict));
    out += c.trace;
  }
  return out;
}

OverheadReport overheads_for(const ScenarioConfig& cfg, const SizeModel& sizes) {
  StorageParams s;
  s.psi = cfg.psi;
  s.delta = static_cast<std::uint64_t>(cfg.timestamp_width);
  s.rho = static_cast<std::uint64_t>(cfg.retention_days);
  s.fleet = cfg.fleet;
  ComputeParams c;
  c.sigma = cfg.sigma;
  return transmission_report(sizes, s, c);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path);
}

void emit_reports(const AttackMatrix& m, const OverheadReport& o, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error(fmt::format("cannot create {}: {}", dir, ec.message()));
  const std::filesystem::path d(dir);
  write_file((d / "matrix.json").string(), to_json(m).dump(2) + "\n");
  write_file((d / "matrix.csv").string(), to_csv(m));
  write_file((d / "overheads.json").string(), to_json(o).dump(2) + "\n");
  write_file((d / "overheads.csv").string(), to_csv(o));
  write_file((d / "trace.log").string(), combined_trace(m));
}

}  // namespace bwa
