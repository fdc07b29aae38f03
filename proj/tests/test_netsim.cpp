#include <doctest.h>

#include <functional>
#include <set>

#include "bwa/netsim.hpp"

using namespace bwa;

namespace {

SimWorld honest_world(ProtocolId p, std::uint64_t seed = 1) {
  WorldConfig cfg;
  cfg.protocol = p;
  cfg.seed = seed;
  SimWorld w(cfg);
  w.add_base_station("bs1");
  w.add_subscriber("ss1", "bs1", 0x00163e000001, 7);
  w.schedule_join("ss1", 0);
  return w;
}

}  // namespace

TEST_CASE("honest join completes on every protocol") {
  for (auto p : kAllProtocols) {
    CAPTURE(to_string(p));
    SimWorld w = honest_world(p);
    w.run_until(60'000);
    const Metrics m = w.metrics();
    CHECK(m.completed_auths == 1);
    CHECK(m.legit_success_rate == 1.0);
    CHECK(m.frames_sent == static_cast<std::uint64_t>(handshake_length(p)));
    CHECK(m.frames_sent == m.frames_delivered + m.frames_dropped + m.frames_in_flight);
    CHECK(w.cycles_in_flight() == 0);
    const auto& ss = w.node("ss1");
    REQUIRE(ss.session);
    CHECK(ss.session->outcome.authorized());
    CHECK(ss.session->peer_signature_verified == mutual_auth(p));
  }
}

TEST_CASE("honest byte totals") {
  const std::pair<ProtocolId, std::uint64_t> expected[] = {
      {ProtocolId::PKMv1, 1175}, {ProtocolId::TSA, 1187}, {ProtocolId::PKMv2, 2101},
      {ProtocolId::HA, 2113},    {ProtocolId::ISNAP, 1559}};
  for (auto [p, bytes] : expected) {
    CAPTURE(to_string(p));
    SimWorld w = honest_world(p);
    w.run_until(60'000);
    CHECK(w.metrics().honest_bytes == bytes);
  }
}

TEST_CASE("same seed gives the same trace") {
  for (auto p : kAllProtocols) {
    SimWorld a = honest_world(p, 9);
    SimWorld b = honest_world(p, 9);
    a.run_until(60'000);
    b.run_until(60'000);
    CHECK(a.trace().str() == b.trace().str());
  }
}

TEST_CASE("budget caps concurrent cycles") {
  WorldConfig cfg;
  cfg.protocol = ProtocolId::PKMv1;
  cfg.budget = 2;
  SimWorld w(cfg);
  w.add_base_station("bs1");
  for (int i = 0; i < 5; ++i) {
    const NodeId id{"ss" + std::to_string(i)};
    w.add_subscriber(id, "bs1", 100 + i, static_cast<std::uint16_t>(i));
    w.schedule_join(id, 0);
  }
  w.run_until(200'000);
  const Metrics m = w.metrics();
  CHECK(m.peak_cycles == 2);
  CHECK(m.dropped_cycles == 3);
  CHECK(m.completed_auths == 2);
}

TEST_CASE("run_until rejects going backwards") {
  SimWorld w = honest_world(ProtocolId::PKMv1);
  w.run_until(10);
  CHECK_THROWS(w.run_until(5));
}

namespace {

/// Applies one action to the n-th honest frame.
class OnFrame : public Adversary {
 public:
  OnFrame(int index, std::function<void(SimWorld&, const Frame&)> act)
      : index_(index), act_(std::move(act)) {}
  void on_transmit(SimWorld& w, const Frame& f) override {
    if (++seen_ == index_) act_(w, f);
  }

 private:
  int index_;
  int seen_ = 0;
  std::function<void(SimWorld&, const Frame&)> act_;
};

WorldConfig quiet(ProtocolId p) {
  WorldConfig cfg;
  cfg.protocol = p;
  cfg.eavesdrop = false;
  return cfg;
}

}  // namespace

TEST_CASE("empty queue advances time only") {
  SimWorld w(quiet(ProtocolId::PKMv1));
  w.run_until(5000);
  CHECK(w.now() == 5000);
  CHECK(w.trace().lines().empty());
}

TEST_CASE("honest PKMv1 join finishes within ten seconds") {
  SimWorld w = honest_world(ProtocolId::PKMv1);
  w.run_until(10'000);
  const Metrics m = w.metrics();
  CHECK(m.completed_auths == 1);
  CHECK(m.rejected_requests == 0);
  // 1 s to the BS, 1 s processing, 1 s back
  CHECK(m.mean_auth_latency == doctest::Approx(3.0));
}

TEST_CASE("capture on PKMv2 message 2 teaches its parts") {
  SimWorld w(quiet(ProtocolId::PKMv2));
  w.add_base_station("bs1");
  w.add_subscriber("ss1", "bs1", 1, 7);
  w.set_adversary(std::make_unique<OnFrame>(2, [](SimWorld& sw, const Frame& f) {
    sw.interpose(Capture{f.id});
  }));
  w.schedule_join("ss1", 0);
  w.run_until(60'000);
  const Knowledge& k = w.knowledge();
  CHECK(k.contains(Term::cert("ss1")));
  CHECK(k.contains(Term::capabilities(1)));
  CHECK(k.contains(Term::bcid(7)));
  CHECK(k.contains(Term::nonce(*w.node("ss1").session->my_nonce)));
  // delivery undisturbed
  CHECK(w.metrics().completed_auths == 1);
}

TEST_CASE("delay of zero changes nothing; positive delay shifts delivery") {
  for (SimTime d : {SimTime{0}, SimTime{2500}}) {
    SimWorld w(quiet(ProtocolId::PKMv1));
    w.add_base_station("bs1");
    w.add_subscriber("ss1", "bs1", 1, 7);
    w.set_adversary(std::make_unique<OnFrame>(1, [d](SimWorld& sw, const Frame& f) {
      sw.interpose(Delay{f.id, d});
    }));
    w.schedule_join("ss1", 0);
    w.run_until(60'000);
    CHECK(w.frames().at(1).deliver_at == 1000 + d);
  }
}

TEST_CASE("drop removes the frame") {
  SimWorld w(quiet(ProtocolId::PKMv1));
  w.add_base_station("bs1");
  w.add_subscriber("ss1", "bs1", 1, 7);
  w.set_adversary(std::make_unique<OnFrame>(1, [](SimWorld& sw, const Frame& f) {
    sw.interpose(Drop{f.id});
  }));
  w.schedule_join("ss1", 0);
  w.run_until(60'000);
  const Metrics m = w.metrics();
  CHECK(m.frames_dropped == 1);
  CHECK(m.completed_auths == 0);
  CHECK(m.frames_sent == m.frames_delivered + m.frames_dropped + m.frames_in_flight);
}

TEST_CASE("injecting an underivable AK is refused") {
  SimWorld w(quiet(ProtocolId::PKMv1));
  w.add_base_station("bs1");
  w.add_subscriber("ss1", "bs1", 1, 7);
  const Term forged = Term::tuple({Term::enc(public_key("ss1"), Term::auth_key("bs1-1")),
                                   Term::lifetime(1), Term::seq_no(0), Term::said_list({1})});
  CHECK_THROWS_AS(w.interpose(Inject{forged, "bs1", "ss1", 0}), DolevYaoViolation);
  // the same reply with an AK the adversary made up is fine
  w.note_generated(Term::auth_key("mine"));
  const Term own = Term::tuple({Term::enc(public_key("ss1"), Term::auth_key("mine")),
                                Term::lifetime(1), Term::seq_no(0), Term::said_list({1})});
  CHECK_THROWS_AS(w.interpose(Inject{own, "bs1", "ss1", 0}), DolevYaoViolation);
  w.knowledge().add(Term::cert("ss1"));
  CHECK(w.interpose(Inject{own, "bs1", "ss1", 0}).has_value());
}

TEST_CASE("frames in flight at the end are counted") {
  SimWorld w = honest_world(ProtocolId::PKMv2);
  w.run_until(2500);
  const Metrics m = w.metrics();
  CHECK(m.frames_in_flight > 0);
  CHECK(m.frames_sent == m.frames_delivered + m.frames_dropped + m.frames_in_flight);
}

TEST_CASE("queue overload serves everyone eventually") {
  WorldConfig cfg = quiet(ProtocolId::PKMv1);
  cfg.budget = 1;
  cfg.overload = OverloadPolicy::Queue;
  SimWorld w(cfg);
  w.add_base_station("bs1");
  for (int i = 0; i < 3; ++i) {
    const NodeId id{"ss" + std::to_string(i)};
    w.add_subscriber(id, "bs1", 100 + i, static_cast<std::uint16_t>(i));
    w.schedule_join(id, 0);
  }
  w.run_until(200'000);
  const Metrics m = w.metrics();
  CHECK(m.peak_cycles == 1);
  CHECK(m.dropped_cycles == 0);
  CHECK(m.cycles_started == 3);
}

TEST_CASE("resync events fire on schedule") {
  WorldConfig cfg = quiet(ProtocolId::ISNAP);
  SimWorld w(cfg);
  ClockSpec c;
  c.offset = -30;
  c.policy.resync_interval = 5.0;
  w.add_base_station("bs1", c);
  CHECK(w.clock().node_now("bs1") == -30);
  w.run_until(5000);
  CHECK(w.clock().node_now("bs1") == 5);
  CHECK(w.trace().lines().size() == 1);
}

TEST_CASE("trace lines have six fields") {
  SimWorld w = honest_world(ProtocolId::HA);
  w.run_until(60'000);
  for (const auto& line : w.trace().lines()) {
    std::size_t bars = 0;
    for (char ch : line) bars += ch == '|';
    CHECK(bars >= 5);
  }
}

TEST_CASE("nonces are unique within a run") {
  SimWorld w(quiet(ProtocolId::PKMv1));
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 10000; ++i) CHECK(seen.insert(w.fresh_nonce()).second);
}
