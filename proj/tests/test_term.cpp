#include <doctest.h>

#include <random>

#include "bwa/term.hpp"

using namespace bwa;

namespace {

// Small random generator of well-formed terms for the property checks.
Term random_term(std::mt19937_64& rng, int depth) {
  const NodeId owners[] = {"ss1", "bs1", "adv"};
  auto owner = [&] { return owners[rng() % 3]; };
  const int choice = static_cast<int>(rng() % (depth > 0 ? 9 : 6));
  switch (choice) {
    case 0: return Term::nonce(rng());
    case 1: return Term::timestamp(static_cast<Timestamp>(rng() % 100000));
    case 2: return Term::cert(owner());
    case 3: return Term::mac(rng() & 0xffffffffffff);
    case 4: return Term::bcid(static_cast<std::uint16_t>(rng()));
    case 5: return Term::auth_key("ak" + std::to_string(rng() % 50));
    case 6: return Term::enc(rng() % 2 ? public_key(owner()) : symmetric_key(owner()),
                             random_term(rng, depth - 1));
    case 7: return Term::sig(private_key(owner()), random_term(rng, depth - 1));
    default: {
      std::vector<Term> parts;
      const int n = static_cast<int>(rng() % 4);
      for (int i = 0; i < n; ++i) parts.push_back(random_term(rng, depth - 1));
      return Term::tuple(std::move(parts));
    }
  }
}

}  // namespace

TEST_CASE("encode_size examples") {
  CHECK(encode_size(Term::nonce(42)) == 8);
  CHECK(encode_size(Term::tuple({})) == 0);
  CHECK(encode_size(Term::tuple({Term::cert("ss1"), Term::nonce(1)})) == 520);
  CHECK(encode_size(Term::timestamp(0)) == 4);
  CHECK(encode_size(Term::mac(1)) == 6);
  CHECK(encode_size(Term::said_list({1, 2, 3})) == 6);
}

TEST_CASE("encryption rounds up to whole blocks") {
  // 20-byte AK under a public key fills one 128-byte block.
  CHECK(encode_size(Term::enc(public_key("ss1"), Term::auth_key("a"))) == 128);
  // 20 bytes under a symmetric key needs two 16-byte blocks.
  CHECK(encode_size(Term::enc(symmetric_key("k"), Term::auth_key("a"))) == 32);
  const Term big = Term::tuple({Term::cert("a"), Term::cert("b")});
  CHECK(encode_size(Term::enc(public_key("ss1"), big)) == 1024);
}

TEST_CASE("malformed terms are rejected") {
  const Term bad_sig = Term::sig(public_key("bs1"), Term::nonce(1));
  CHECK_FALSE(well_formed(bad_sig));
  CHECK_THROWS_AS(validate(bad_sig), TermError);
  CHECK_THROWS_AS(encode_size(bad_sig), TermError);
  CHECK_THROWS_AS(encode_size(Term::tuple({Term::enc(private_key("x"), Term::nonce(1))})),
                  TermError);
}

TEST_CASE("sym_decrypt") {
  const Term c = Term::enc(public_key("ss1"), Term::auth_key("ak1"));
  CHECK(sym_decrypt(c, private_key("ss1")) == Term::auth_key("ak1"));
  CHECK_FALSE(sym_decrypt(c, private_key("bs1")));
  CHECK_FALSE(sym_decrypt(c, public_key("ss1")));
  CHECK_FALSE(sym_decrypt(Term::nonce(1), private_key("ss1")));
  const Term s = Term::enc(symmetric_key("k"), Term::nonce(5));
  CHECK(sym_decrypt(s, symmetric_key("k")) == Term::nonce(5));
}

TEST_CASE("verify_sig") {
  const Term body = Term::tuple({Term::nonce(1)});
  CHECK(verify_sig(Term::sig(private_key("bs1"), body), "bs1"));
  CHECK_FALSE(verify_sig(Term::sig(private_key("adv"), body), "bs1"));
  CHECK_FALSE(verify_sig(Term::tuple({body}), "bs1"));
}

TEST_CASE("canonical text form is stable") {
  const Term t = Term::tuple({Term::cert("ss1"), Term::nonce(255),
                              Term::enc(public_key("ss1"), Term::auth_key("x"))});
  CHECK(to_string(t) == to_string(t));
  CHECK(to_string(t).find('\n') == std::string::npos);
  CHECK(to_string(Term::nonce(1)) != to_string(Term::nonce(2)));
}

TEST_CASE("property: round trip for every key pair") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 300; ++i) {
    const Term body = random_term(rng, 2);
    for (const NodeId owner : {"ss1", "bs1", "adv"}) {
      CHECK(sym_decrypt(Term::enc(public_key(owner), body), private_key(owner)) == body);
      CHECK(sym_decrypt(Term::enc(symmetric_key(owner), body), symmetric_key(owner)) == body);
    }
  }
}

TEST_CASE("property: tuple extension strictly grows size") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    std::vector<Term> xs;
    const int n = static_cast<int>(rng() % 5);
    for (int j = 0; j < n; ++j) xs.push_back(random_term(rng, 2));
    const std::size_t before = encode_size(Term::tuple(xs));
    const Term y = random_term(rng, 2);
    // A tuple of nothing but empty tuples weighs 0, so it cannot grow a sum.
    if (y.is(TermKind::Tuple) && encode_size(y) == 0) continue;
    xs.push_back(y);
    CHECK(encode_size(Term::tuple(xs)) > before);
  }
}

TEST_CASE("property: every non-tuple term has positive size") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 500; ++i) {
    const Term t = random_term(rng, 3);
    if (!t.is(TermKind::Tuple)) CHECK(encode_size(t) > 0);
  }
  CHECK(encode_size(Term::enc(public_key("a"), Term::tuple({}))) == 128);
}

TEST_CASE("property: tuple size is the sum, enc never shrinks") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 300; ++i) {
    const Term a = random_term(rng, 3);
    const Term b = random_term(rng, 3);
    CHECK(encode_size(Term::tuple({a, b})) == encode_size(a) + encode_size(b));
    CHECK(encode_size(Term::enc(public_key("x"), a)) >= encode_size(a));
    CHECK(encode_size(Term::enc(symmetric_key("x"), a)) >= encode_size(a));
  }
}

TEST_CASE("property: structural equality") {
  std::mt19937_64 a(3), b(3);
  for (int i = 0; i < 200; ++i) {
    const Term x = random_term(a, 3);
    const Term y = random_term(b, 3);
    CHECK(x == x);
    CHECK(x == y);
    CHECK((x <=> y) == std::strong_ordering::equal);
  }
  CHECK(Term::nonce(1) != Term::nonce(2));
  CHECK(Term::cert("a") != Term::cert("b"));
  CHECK(Term::enc(public_key("a"), Term::nonce(1)) != Term::enc(symmetric_key("a"), Term::nonce(1)));
}

TEST_CASE("uniform size model") {
  const SizeModel one = SizeModel::uniform(1);
  CHECK(encode_size(Term::tuple({Term::cert("a"), Term::nonce(1), Term::mac(2)}), one) == 3);
}
