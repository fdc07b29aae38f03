#include "bwa/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <type_traits>

#include <fmt/format.h>

namespace bwa {

namespace {

constexpr std::array<std::string_view, 7> kAttackNames = {
    "water_torture", "dos", "message_replay", "identity_theft",
    "impersonation", "interleaving", "suppress_replay"};

std::string_view overload_name(OverloadPolicy p) { return p == OverloadPolicy::Drop ? "drop" : "queue"; }

template <typename T>
T get_as(const nlohmann::json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(fmt::format("config key '{}' has the wrong type", key));
  }
}

std::vector<ProtocolId> protocol_list(const nlohmann::json& v, const std::string& key) {
  std::vector<ProtocolId> out;
  for (const auto& s : get_as<std::vector<std::string>>(v, key)) {
    auto p = parse_protocol(s);
    if (!p) throw ConfigError(fmt::format("config key '{}': unknown protocol '{}'", key, s));
    out.push_back(*p);
  }
  return out;
}

}  // namespace

std::string_view to_string(AttackKind a) { return kAttackNames[static_cast<std::size_t>(a)]; }

std::optional<AttackKind> parse_attack(std::string_view s) {
  for (std::size_t i = 0; i < kAttackNames.size(); ++i)
    if (kAttackNames[i] == s) return static_cast<AttackKind>(i);
  return std::nullopt;
}

void ScenarioConfig::validate() const {
  auto need = [](bool ok, std::string_view what) {
    if (!ok) throw ConfigError(fmt::format("invalid config: {}", what));
  };
  need(!protocols.empty(), "protocols must not be empty");
  need(!attacks.empty(), "attacks must not be empty");
  need(trials >= 1, "trials must be >= 1");
  need(latency_ms >= 0 && processing_ms >= 0, "latency and processing must be >= 0");
  need(budget >= 1, "budget must be >= 1");
  need(cycle_timeout_s > 0, "cycle_timeout_s must be > 0");
  need(window_s >= 0 && tolerance_s >= 0, "window_s and tolerance_s must be >= 0");
  need(timestamp_width >= 1, "timestamp_width must be >= 1");
  need(retention_days >= 1, "retention_days must be >= 1");
  need(isnap_resync_interval_s >= 0, "isnap_resync_interval_s must be >= 0");
  need(resync_residual_s >= 0, "resync_residual_s must be >= 0");
  need(flood_volume >= 1 && dos_flood_volume >= 1, "flood volumes must be >= 1");
  need(flood_interval_ms >= 1, "flood_interval_ms must be >= 1");
  need(legit_joins >= 1, "legit_joins must be >= 1");
  need(join_interval_ms >= 1, "join_interval_ms must be >= 1");
  need(adversary_delay_s > 0, "adversary_delay_s must be > 0");
  need(receiver_lag_s >= 0, "receiver_lag_s must be >= 0");
  need(interleave_delay_s >= 0 && replay_gap_s > 0, "interleave/replay delays out of range");
  need(water_torture_threshold > 0 && water_torture_threshold <= 1,
       "water_torture_threshold must be in (0, 1]");
  need(dos_threshold > 0 && dos_threshold <= 1, "dos_threshold must be in (0, 1]");
  need(psi >= 0 && sigma > 0, "psi must be >= 0 and sigma > 0");
  need(fleet >= 1, "fleet must be >= 1");
}

bool ScenarioConfig::weakened(ProtocolId p) const {
  return std::find(weaken.begin(), weaken.end(), p) != weaken.end();
}

WorldConfig ScenarioConfig::world(ProtocolId p) const {
  WorldConfig w;
  w.protocol = p;
  w.latency = latency_ms;
  w.processing = processing_ms;
  w.budget = budget;
  w.cycle_timeout = from_seconds(cycle_timeout_s);
  w.overload = overload;
  w.freshness_tolerance = tolerance_s;
  w.window = window_s;
  w.retention_days = retention_days;
  w.timestamp_width = timestamp_width;
  w.seed = seed;
  w.weaken_freshness = weakened(p);
  return w;
}

ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ScenarioConfig c;
  using Setter = std::function<void(const nlohmann::json&, const std::string&)>;
  auto num = [](auto& field) -> Setter {
    return [&field](const nlohmann::json& v, const std::string& k) {
      if (!v.is_number()) throw ConfigError(fmt::format("config key '{}' must be a number", k));
      using F = std::decay_t<decltype(field)>;
      if constexpr (std::is_integral_v<F>) {
        if (!v.is_number_integer())
          throw ConfigError(fmt::format("config key '{}' must be an integer", k));
        if constexpr (std::is_unsigned_v<F>)
          if (v.is_number_integer() && !v.is_number_unsigned())
            throw ConfigError(fmt::format("config key '{}' must be non-negative", k));
      }
      field = get_as<F>(v, k);
    };
  };
  const std::map<std::string, Setter> setters = {
      {"protocols", [&](const auto& v, const auto& k) { c.protocols = protocol_list(v, k); }},
      {"attacks",
       [&](const auto& v, const auto& k) {
         c.attacks.clear();
         for (const auto& s : get_as<std::vector<std::string>>(v, k)) {
           auto a = parse_attack(s);
           if (!a) throw ConfigError(fmt::format("config key '{}': unknown attack '{}'", k, s));
           c.attacks.push_back(*a);
         }
       }},
      {"weaken", [&](const auto& v, const auto& k) { c.weaken = protocol_list(v, k); }},
      {"overload",
       [&](const auto& v, const auto& k) {
         const auto s = get_as<std::string>(v, k);
         if (s == "drop") c.overload = OverloadPolicy::Drop;
         else if (s == "queue") c.overload = OverloadPolicy::Queue;
         else throw ConfigError(fmt::format("config key '{}': expected drop or queue", k));
       }},
      {"out_dir", [&](const auto& v, const auto& k) { c.out_dir = get_as<std::string>(v, k); }},
      {"seed", num(c.seed)},
      {"trials", num(c.trials)},
      {"latency_ms", num(c.latency_ms)},
      {"processing_ms", num(c.processing_ms)},
      {"budget", num(c.budget)},
      {"cycle_timeout_s", num(c.cycle_timeout_s)},
      {"window_s", num(c.window_s)},
      {"tolerance_s", num(c.tolerance_s)},
      {"timestamp_width", num(c.timestamp_width)},
      {"retention_days", num(c.retention_days)},
      {"isnap_resync_interval_s", num(c.isnap_resync_interval_s)},
      {"resync_residual_s", num(c.resync_residual_s)},
      {"flood_volume", num(c.flood_volume)},
      {"flood_interval_ms", num(c.flood_interval_ms)},
      {"dos_flood_volume", num(c.dos_flood_volume)},
      {"legit_joins", num(c.legit_joins)},
      {"join_interval_ms", num(c.join_interval_ms)},
      {"adversary_delay_s", num(c.adversary_delay_s)},
      {"receiver_lag_s", num(c.receiver_lag_s)},
      {"interleave_delay_s", num(c.interleave_delay_s)},
      {"replay_gap_s", num(c.replay_gap_s)},
      {"water_torture_threshold", num(c.water_torture_threshold)},
      {"dos_threshold", num(c.dos_threshold)},
      {"psi", num(c.psi)},
      {"sigma", num(c.sigma)},
      {"fleet", num(c.fleet)},
  };
  for (const auto& [key, value] : j.items()) {
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError(fmt::format("unknown config key '{}'", key));
    it->second(value, key);
  }
  c.validate();
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
  return scenario_from_json(j);
}

nlohmann::json to_json(const ScenarioConfig& c) {
  auto names = [](const auto& xs) {
    std::vector<std::string> out;
    for (auto x : xs) out.emplace_back(to_string(x));
    return out;
  };
  return {
      {"protocols", names(c.protocols)},
      {"attacks", names(c.attacks)},
      {"weaken", names(c.weaken)},
      {"seed", c.seed},
      {"trials", c.trials},
      {"latency_ms", c.latency_ms},
      {"processing_ms", c.processing_ms},
      {"budget", c.budget},
      {"cycle_timeout_s", c.cycle_timeout_s},
      {"overload", overload_name(c.overload)},
      {"window_s", c.window_s},
      {"tolerance_s", c.tolerance_s},
      {"timestamp_width", c.timestamp_width},
      {"retention_days", c.retention_days},
      {"isnap_resync_interval_s", c.isnap_resync_interval_s},
      {"resync_residual_s", c.resync_residual_s},
      {"flood_volume", c.flood_volume},
      {"flood_interval_ms", c.flood_interval_ms},
      {"dos_flood_volume", c.dos_flood_volume},
      {"legit_joins", c.legit_joins},
      {"join_interval_ms", c.join_interval_ms},
      {"adversary_delay_s", c.adversary_delay_s},
      {"receiver_lag_s", c.receiver_lag_s},
      {"interleave_delay_s", c.interleave_delay_s},
      {"replay_gap_s", c.replay_gap_s},
      {"water_torture_threshold", c.water_torture_threshold},
      {"dos_threshold", c.dos_threshold},
      {"psi", c.psi},
      {"sigma", c.sigma},
      {"fleet", c.fleet},
      {"out_dir", c.out_dir},
  };
}

}  // namespace bwa
