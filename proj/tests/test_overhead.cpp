#include <doctest.h>

#include "bwa/netsim.hpp"
#include "bwa/overhead.hpp"

using namespace bwa;

TEST_CASE("storage overhead examples") {
  CHECK(storage_overhead({100, 4, 15, 1}).chi_bytes == 6000);
  CHECK(storage_overhead({0, 4, 15, 1}).chi_bytes == 0);
  const StorageOverhead fleet = storage_overhead({100, 4, 15, 64});
  CHECK(fleet.fleet_bytes == 384000);
  CHECK(fleet.fleet_bytes >= 300000);
}

TEST_CASE("property: chi is linear in each factor") {
  const StorageParams base{37, 4, 9, 1};
  const double chi = storage_overhead(base).chi_bytes;
  StorageParams p = base;
  p.psi *= 2;
  CHECK(storage_overhead(p).chi_bytes == 2 * chi);
  p = base;
  p.delta *= 2;
  CHECK(storage_overhead(p).chi_bytes == 2 * chi);
  p = base;
  p.rho *= 2;
  CHECK(storage_overhead(p).chi_bytes == 2 * chi);
}

TEST_CASE("validation cost examples") {
  ComputeParams c;
  c.entries = 1500;
  c.sigma = 1e9;
  ValidationCost v = validation_cost(c);
  CHECK(v.flops_linear == 3000);
  CHECK(v.seconds_linear == doctest::Approx(3e-6));
  CHECK_FALSE(v.flops_literal);

  c.entries = 0;
  CHECK(validation_cost(c).flops_linear == 0);

  ComputeParams lit;
  lit.literal_lambda = 10;
  lit.sigma = 1024;
  v = validation_cost(lit);
  REQUIRE(v.flops_literal);
  CHECK(*v.flops_literal == 1024);
  CHECK(*v.seconds_literal == 1);
  CHECK_FALSE(v.literal_saturated);

  // entries default to psi * rho
  CHECK(validation_cost(ComputeParams{}, StorageParams{100, 4, 15, 1}).flops_linear == 3000);
}

TEST_CASE("literal mode saturates instead of overflowing") {
  ComputeParams c;
  c.literal_lambda = 100000;
  const ValidationCost v = validation_cost(c);
  CHECK(v.literal_saturated);
  CHECK(std::isfinite(*v.flops_literal));
}

TEST_CASE("default ordering and exact totals") {
  const OverheadReport r = transmission_report(SizeModel{});
  auto b = [&](ProtocolId p) { return r.row(p).handshake_bytes; };
  CHECK(b(ProtocolId::PKMv1) == 1175);
  CHECK(b(ProtocolId::TSA) == 1187);
  CHECK(b(ProtocolId::PKMv2) == 2101);
  CHECK(b(ProtocolId::HA) == 2113);
  CHECK(b(ProtocolId::ISNAP) == 1559);
  CHECK(b(ProtocolId::HA) > b(ProtocolId::PKMv2));
  CHECK(b(ProtocolId::HA) > b(ProtocolId::ISNAP));
  CHECK(b(ProtocolId::ISNAP) > b(ProtocolId::TSA));
  CHECK(b(ProtocolId::TSA) >= b(ProtocolId::PKMv1));
  CHECK(b(ProtocolId::TSA) == b(ProtocolId::PKMv1) + 3 * SizeModel{}.timestamp);
  CHECK(r.all_orderings_hold());
}

TEST_CASE("orderings follow the inputs") {
  const OverheadReport r = transmission_report(SizeModel::uniform(1));
  for (const auto& o : r.orderings) {
    const auto split = o.claim.find(' ');
    const auto lhs = *parse_protocol(o.claim.substr(0, split));
    const auto op = o.claim.substr(split + 1, o.claim.rfind(' ') - split - 1);
    const auto rhs = *parse_protocol(o.claim.substr(o.claim.rfind(' ') + 1));
    const auto l = r.row(lhs).handshake_bytes, rr = r.row(rhs).handshake_bytes;
    CHECK(o.holds == (op == ">" ? l > rr : l >= rr));
  }
  // With every field one byte, per-message sums are just field counts.
  // trigger 1, request 4, reply: enc 1 + lifetime 1 + seq 1 + two SAIDs 2
  CHECK(r.row(ProtocolId::PKMv1).handshake_bytes == 1 + 4 + 5);
}

TEST_CASE("property: analytical bytes equal simulated bytes") {
  for (const SizeModel& m : {SizeModel{}, SizeModel::uniform(1), SizeModel::uniform(7)}) {
    const OverheadReport r = transmission_report(m);
    for (auto p : kAllProtocols) {
      WorldConfig cfg;
      cfg.protocol = p;
      cfg.sizes = m;
      SimWorld w(cfg);
      w.add_base_station("bs1");
      w.add_subscriber("ss1", "bs1", 1, 1);
      w.schedule_join("ss1", 0);
      w.run_until(60'000);
      CHECK(w.metrics().honest_bytes == r.row(p).handshake_bytes);
    }
  }
}

TEST_CASE("report serialization") {
  const OverheadReport r = transmission_report(SizeModel{});
  const std::string csv = to_csv(r);
  CHECK(csv.rfind("protocol,handshake_bytes,chi_bytes,fleet_bytes,flops_linear,seconds_linear\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  const auto j = to_json(r);
  CHECK(j["protocols"].size() == 5);
  CHECK(j["storage"]["chi_bytes"] == 6000);
}
