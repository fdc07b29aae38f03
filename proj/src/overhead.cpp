#include "bwa/overhead.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace bwa {

StorageOverhead storage_overhead(const StorageParams& p) {
  StorageOverhead o;
  o.chi_bytes = p.psi * static_cast<double>(p.delta) * static_cast<double>(p.rho);
  o.fleet_bytes = o.chi_bytes * static_cast<double>(p.fleet);
  return o;
}

ValidationCost validation_cost(const ComputeParams& c, const StorageParams& s) {
  if (!(c.sigma > 0)) throw std::invalid_argument("sigma must be positive");
  ValidationCost v;
  const double entries = c.entries.value_or(s.psi * static_cast<double>(s.rho));
  v.flops_linear = c.flops_per_compare * entries;
  v.seconds_linear = v.flops_linear / c.sigma;
  if (c.literal_lambda) {
    const double f = std::exp2(*c.literal_lambda);
    if (!std::isfinite(f)) {
      v.literal_saturated = true;
      v.flops_literal = std::numeric_limits<double>::max();
      v.seconds_literal = std::numeric_limits<double>::max();
    } else {
      v.flops_literal = f;
      v.seconds_literal = f / c.sigma;
    }
  }
  return v;
}

const ProtocolOverhead& OverheadReport::row(ProtocolId p) const {
  for (const auto& r : rows)
    if (r.protocol == p) return r;
  throw std::out_of_range("no overhead row for " + std::string(to_string(p)));
}

bool OverheadReport::all_orderings_hold() const {
  for (const auto& o : orderings)
    if (!o.holds) return false;
  return true;
}

std::vector<std::size_t> handshake_message_bytes(ProtocolId p, const SizeModel& m) {
  const NodeId bs{"bs"}, ss{"ss"};
  SessionConfig sc;
  sc.peer = bs;
  sc.mac = 1;
  sc.bcid = 1;
  sc.nonce = 1;
  SessionConfig bc;
  bc.ak_id = "ak";
  bc.nonce = 2;
  if (uses_table(p)) sc.table = bc.table = TimestampTable{};
  if (uses_window(p)) sc.window = bc.window = ValidationWindow{};

  SessionState s = init_session(p, Role::SS, ss, sc, 0);
  SessionState b = init_session(p, Role::BS, bs, bc, 0);
  std::vector<std::size_t> sizes;
  // One second per message so replay caches see distinct stamps.
  Timestamp now = 0;
  std::vector<Term> to_bs = s.outbox;
  std::vector<Term> to_ss;
  while (!to_bs.empty() || !to_ss.empty()) {
    for (const auto& t : to_bs) {
      sizes.push_back(encode_size(t, m));
      auto r = step(b, t, ++now);
      b = std::move(r.state);
      to_ss.insert(to_ss.end(), r.outgoing.begin(), r.outgoing.end());
    }
    to_bs.clear();
    for (const auto& t : to_ss) {
      sizes.push_back(encode_size(t, m));
      auto r = step(s, t, ++now);
      s = std::move(r.state);
      to_bs.insert(to_bs.end(), r.outgoing.begin(), r.outgoing.end());
    }
    to_ss.clear();
  }
  if (!s.outcome.authorized() || !b.outcome.authorized())
    throw std::logic_error("honest handshake did not complete for " + std::string(to_string(p)));
  return sizes;
}

OverheadReport transmission_report(const SizeModel& m, const StorageParams& s,
                                   const ComputeParams& c) {
  OverheadReport rep;
  rep.storage = storage_overhead(s);
  rep.validation = validation_cost(c, s);
  for (auto p : kAllProtocols) {
    ProtocolOverhead row;
    row.protocol = p;
    row.message_bytes = handshake_message_bytes(p, m);
    row.handshake_bytes =
        std::accumulate(row.message_bytes.begin(), row.message_bytes.end(), std::size_t{0});
    if (uses_table(p)) {
      row.chi_bytes = rep.storage.chi_bytes;
      row.fleet_bytes = rep.storage.fleet_bytes;
      row.flops_linear = rep.validation.flops_linear;
      row.seconds_linear = rep.validation.seconds_linear;
    }
    rep.rows.push_back(std::move(row));
  }
  auto bytes = [&](ProtocolId p) { return rep.row(p).handshake_bytes; };
  using P = ProtocolId;
  rep.orderings = {
      {"HA > PKMv2", bytes(P::HA) > bytes(P::PKMv2)},
      {"HA > ISNAP", bytes(P::HA) > bytes(P::ISNAP)},
      {"ISNAP > TSA", bytes(P::ISNAP) > bytes(P::TSA)},
      {"TSA >= PKMv1", bytes(P::TSA) >= bytes(P::PKMv1)},
  };
  return rep;
}

nlohmann::json to_json(const OverheadReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"protocol", to_string(row.protocol)},
                    {"handshake_bytes", row.handshake_bytes},
                    {"message_bytes", row.message_bytes},
                    {"chi_bytes", row.chi_bytes},
                    {"fleet_bytes", row.fleet_bytes},
                    {"flops_linear", row.flops_linear},
                    {"seconds_linear", row.seconds_linear}});
  }
  nlohmann::json orderings = nlohmann::json::array();
  for (const auto& o : r.orderings) orderings.push_back({{"claim", o.claim}, {"holds", o.holds}});
  nlohmann::json validation = {{"flops_linear", r.validation.flops_linear},
                               {"seconds_linear", r.validation.seconds_linear},
                               {"literal_saturated", r.validation.literal_saturated}};
  if (r.validation.flops_literal) {
    validation["flops_literal"] = *r.validation.flops_literal;
    validation["seconds_literal"] = *r.validation.seconds_literal;
  }
  return {{"protocols", rows},
          {"orderings", orderings},
          {"storage", {{"chi_bytes", r.storage.chi_bytes}, {"fleet_bytes", r.storage.fleet_bytes}}},
          {"validation", validation}};
}

std::string to_csv(const OverheadReport& r) {
  std::string out = "protocol,handshake_bytes,chi_bytes,fleet_bytes,flops_linear,seconds_linear\n";
  for (const auto& row : r.rows)
    out += fmt::format("{},{},{},{},{},{}\n", to_string(row.protocol), row.handshake_bytes,
                       row.chi_bytes, row.fleet_bytes, row.flops_linear, row.seconds_linear);
  return out;
}

}  // namespace bwa
