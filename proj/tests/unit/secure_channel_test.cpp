/*
 * Copyright 2026 The heartvault Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <future>
#include <set>
#include <thread>

#include "heartvault/common/error.hpp"
#include "heartvault/secure/bench.hpp"
#include "heartvault/secure/channel.hpp"
#include "heartvault/signal/synth.hpp"

using namespace hv;
using namespace hv::secure;

namespace {

std::pair<SessionKey, SessionKey> pair_keys(Tamper tamper = {}) {
  auto [a, b] = memory_pair(std::move(tamper));
  auto r = std::async(std::launch::async, [t = b.get()] { return handshake(Role::Responder, *t); });
  auto i = handshake(Role::Initiator, *a);
  return {i, r.get()};
}

// Runs both sides and reports which error codes, if any, each side raised.
std::pair<std::optional<ErrorCode>, std::optional<ErrorCode>> run_tampered(Tamper tamper) {
  auto [a, b] = memory_pair(std::move(tamper));
  auto side = [](Role role, Transport* t) -> std::optional<ErrorCode> {
    try {
      handshake(role, *t);
      return std::nullopt;
    } catch (const Error& e) {
      t->close();
      return e.code();
    }
  };
  auto r = std::async(std::launch::async, side, Role::Responder, b.get());
  auto i = side(Role::Initiator, a.get());
  return {i, r.get()};
}

SessionKey fixed_key(std::uint8_t fill) {
  SessionKey k;
  k.key.fill(fill);
  k.session_id.fill(static_cast<std::uint8_t>(fill + 1));
  return k;
}

std::optional<ErrorCode> open_error(const SessionKey& k, ByteView wire) {
  try {
    open(k, Direction::InitiatorToResponder, parse_record(wire));
    return std::nullopt;
  } catch (const Error& e) {
    return e.code();
  }
}

}  // namespace

TEST(Handshake, BothSidesDeriveTheSameKey) {
  auto [i, r] = pair_keys();
  EXPECT_EQ(i.key, r.key);
  EXPECT_EQ(i.session_id, r.session_id);
  EXPECT_EQ(i.mode, Mode::Ecdh);
}

TEST(Handshake, HundredHandshakesGiveDistinctKeys) {
  std::set<Key32> keys;
  std::set<SessionId> ids;
  for (int n = 0; n < 100; ++n) {
    auto [i, r] = pair_keys();
    ASSERT_EQ(i.key, r.key);
    keys.insert(i.key);
    ids.insert(i.session_id);
  }
  EXPECT_EQ(keys.size(), 100u);
  EXPECT_EQ(ids.size(), 100u);
}

TEST(Handshake, CorruptedPublicValueFailsConfirmation) {
  for (int from = 0; from < 2; ++from) {
    for (std::size_t byte = 2; byte < 34; ++byte) {
      bool first = true;
      auto [ei, er] = run_tampered([&, from, byte](int side, Bytes& data) {
        if (side == from && first) {
          first = false;
          data[byte] ^= 0x01;
        }
      });
      EXPECT_TRUE(ei == ErrorCode::ConfirmFailure || er == ErrorCode::ConfirmFailure)
          << "from " << from << " byte " << byte;
    }
  }
}

TEST(Handshake, CorruptedConfirmationFails) {
  int sends = 0;
  auto [ei, er] = run_tampered([&](int side, Bytes& data) {
    if (side == 1 && ++sends == 2) data.back() ^= 0x80;  // responder's confirmation
  });
  EXPECT_EQ(ei, ErrorCode::ConfirmFailure);
  EXPECT_TRUE(er.has_value());
}

TEST(Handshake, TruncatedTransportIsTransportClosed) {
  auto [a, b] = memory_pair();
  b->close();
  try {
    handshake(Role::Initiator, *a);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TransportClosed);
  }
}

TEST(Handshake, PreSharedModeAgreesAndDetectsWrongKey) {
  const auto psk = parse_psk(std::string(64, 'a'));
  auto other = psk;
  other[0] ^= 1;
  {
    auto [a, b] = memory_pair();
    auto r = std::async(std::launch::async, [&, t = b.get()] { return handshake_psk(Role::Responder, *t, psk); });
    auto i = handshake_psk(Role::Initiator, *a, psk);
    auto rk = r.get();
    EXPECT_EQ(i.key, rk.key);
    EXPECT_EQ(i.mode, Mode::PreShared);
  }
  {
    auto [a, b] = memory_pair();
    auto r = std::async(std::launch::async, [&, t = b.get()]() -> std::optional<ErrorCode> {
      try {
        handshake_psk(Role::Responder, *t, other);
        return std::nullopt;
      } catch (const Error& e) {
        t->close();
        return e.code();
      }
    });
    try {
      handshake_psk(Role::Initiator, *a, psk);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ConfirmFailure);
    }
    EXPECT_TRUE(r.get().has_value());
  }
  EXPECT_THROW(parse_psk("abcd"), Error);
  EXPECT_THROW(parse_psk(std::string(64, 'z')), Error);
}

TEST(Handshake, OverTcp) {
  TcpListener listener("127.0.0.1:0");
  auto server = std::async(std::launch::async, [&] {
    auto conn = listener.accept();
    return handshake(Role::Responder, *conn);
  });
  auto client = tcp_connect("127.0.0.1:" + std::to_string(listener.port()));
  auto ki = handshake(Role::Initiator, *client);
  EXPECT_EQ(ki.key, server.get().key);
}

TEST(Record, WireLayoutIsExact) {
  CipherRecord r;
  r.header = {RecordKind::Pulse, "p1", 0x0102030405060708ULL, 5};
  r.nonce.fill(0xAA);
  r.ciphertext = {1, 2, 3};
  r.tag.fill(0xBB);
  const Bytes expect = {'E', 'P', 'P', 'S', 1, 3, 2, 0, 'p', '1', 8, 7, 6, 5, 4, 3, 2, 1, 5, 0, 0, 0, 0, 0, 0, 0,
                        0xAA, 0xAA, 0xAA, 0xAA, 0xAA, 0xAA, 0xAA, 0xAA, 0xAA, 0xAA, 0xAA, 0xAA,
                        3, 0, 0, 0, 1, 2, 3,
                        0xBB, 0xBB, 0xBB, 0xBB, 0xBB, 0xBB, 0xBB, 0xBB,
                        0xBB, 0xBB, 0xBB, 0xBB, 0xBB, 0xBB, 0xBB, 0xBB};
  EXPECT_EQ(serialize(r), expect);
  EXPECT_EQ(parse_record(expect), r);
  EXPECT_EQ(associated_data(r), Bytes(expect.begin(), expect.begin() + 38));
}

TEST(Record, ParseRejectsMalformed) {
  auto k = fixed_key(1);
  const auto wire = serialize(seal(k, Direction::InitiatorToResponder, {RecordKind::RawFrame, "x", 1, 1}, Bytes{9}));
  for (std::size_t cut = 0; cut < wire.size(); ++cut) {
    EXPECT_THROW(parse_record(ByteView(wire.data(), cut)), Error);
  }
  auto extra = wire;
  extra.push_back(0);
  EXPECT_THROW(parse_record(extra), Error);
  auto bad_kind = wire;
  bad_kind[5] = 9;
  EXPECT_THROW(parse_record(bad_kind), Error);
  auto bad_version = wire;
  bad_version[4] = 2;
  EXPECT_THROW(parse_record(bad_version), Error);
}

TEST(Seal, RoundTripRandomPayloads) {
  auto [i, r] = pair_keys();
  Sealer s(i, Direction::InitiatorToResponder);
  Opener o(r, Direction::InitiatorToResponder);
  for (int n = 0; n < 100; ++n) {
    const auto payload = random_bytes(1024);
    auto rec = s.seal_next(RecordKind::RawFrame, "patient-7", 1000 + n, payload);
    EXPECT_EQ(o.open(parse_record(serialize(rec))), payload);
  }
}

TEST(Seal, AnyBitFlipFailsToOpen) {
  const auto k = fixed_key(3);
  const auto rec = seal(k, Direction::InitiatorToResponder, {RecordKind::Segment, "abc", 77, 9}, random_bytes(40));
  const auto wire = serialize(rec);
  for (std::size_t bit = 0; bit < wire.size() * 8; ++bit) {
    auto m = wire;
    m[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    const auto err = open_error(k, m);
    ASSERT_TRUE(err.has_value()) << "bit " << bit;
    EXPECT_TRUE(*err == ErrorCode::AuthFailure || *err == ErrorCode::MalformedRecord) << "bit " << bit;
  }
}

TEST(Seal, RandomMutationsFail) {
  const auto k = fixed_key(4);
  signal::SplitMix rng(17);
  for (int n = 0; n < 1000; ++n) {
    const auto rec = seal(k, Direction::InitiatorToResponder, {RecordKind::RawFrame, "pid", rng.next(), rng.next() >> 1},
                          random_bytes(1 + rng.below(200)));
    auto m = serialize(rec);
    const auto flips = 1 + rng.below(4);
    for (std::size_t f = 0; f < flips; ++f) m[rng.below(m.size())] ^= static_cast<std::uint8_t>(1 + rng.below(255));
    if (m == serialize(rec)) continue;
    EXPECT_TRUE(open_error(k, m).has_value());
  }
}

TEST(Seal, WrongSessionKeyIsAuthFailure) {
  auto [a1, b1] = pair_keys();
  auto [a2, b2] = pair_keys();
  const auto rec = seal(a1, Direction::InitiatorToResponder, {RecordKind::RawFrame, "p", 1, 1}, Bytes{1, 2, 3});
  EXPECT_EQ(open_error(b2, serialize(rec)), ErrorCode::AuthFailure);
  EXPECT_EQ(open_error(b1, serialize(rec)), std::nullopt);
  // Opening in the wrong direction fails too.
  EXPECT_THROW(open(b1, Direction::ResponderToInitiator, rec), Error);
}

TEST(Seal, TruncatedCiphertextIsAuthFailure) {
  const auto k = fixed_key(5);
  auto rec = seal(k, Direction::InitiatorToResponder, {RecordKind::RawFrame, "p", 1, 1}, Bytes(32, 7));
  rec.ciphertext.pop_back();
  EXPECT_EQ(open_error(k, serialize(rec)), ErrorCode::AuthFailure);
}

TEST(Seal, SeqMustIncrease) {
  Sealer s(fixed_key(6), Direction::InitiatorToResponder);
  s.seal({RecordKind::RawFrame, "p", 0, 5}, Bytes{1});
  try {
    s.seal({RecordKind::RawFrame, "p", 0, 5}, Bytes{1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SeqReplay);
  }
  EXPECT_THROW(s.seal({RecordKind::RawFrame, "p", 0, 4}, Bytes{1}), Error);
  EXPECT_NO_THROW(s.seal({RecordKind::RawFrame, "p", 0, 6}, Bytes{1}));

  Sealer s2(fixed_key(6), Direction::InitiatorToResponder);
  Opener o(fixed_key(6), Direction::InitiatorToResponder);
  const auto r1 = s2.seal_next(RecordKind::RawFrame, "p", 0, Bytes{1});
  o.open(r1);
  try {
    o.open(r1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SeqReplay);
  }
}

TEST(Seal, NoncesAreDistinctAcrossSeqAndDirection) {
  const auto k = fixed_key(8);
  std::set<std::array<std::uint8_t, 12>> seen;
  for (std::uint64_t seq = 0; seq < 5000; ++seq) {
    seen.insert(derive_nonce(k, Direction::InitiatorToResponder, seq));
    seen.insert(derive_nonce(k, Direction::ResponderToInitiator, seq));
  }
  EXPECT_EQ(seen.size(), 10000u);
}

TEST(Escrow, WrapUnwrap) {
  const auto analyst = X25519::generate();
  const auto secret = random_bytes(48);
  const auto wrapped = wrap_to(analyst.public_key(), secret, "ctx");
  EXPECT_EQ(unwrap_with(analyst, wrapped, "ctx"), secret);
  EXPECT_THROW(unwrap_with(analyst, wrapped, "other"), Error);
  EXPECT_THROW(unwrap_with(X25519::generate(), wrapped, "ctx"), Error);
  auto bad = wrapped;
  bad[40] ^= 1;
  EXPECT_THROW(unwrap_with(analyst, bad, "ctx"), Error);
  const auto again = X25519::from_private(analyst.private_key());
  EXPECT_EQ(again.public_key(), analyst.public_key());
}

TEST(Crypto, KnownAnswers) {
  const std::string abc = "abc";
  EXPECT_EQ(to_hex(sha256(ByteView(reinterpret_cast<const std::uint8_t*>(abc.data()), 3))),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  // RFC 5869 test case 1.
  const auto okm = hkdf_sha256(from_hex("0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b"),
                               from_hex("000102030405060708090a0b0c"),
                               std::string("\xf0\xf1\xf2\xf3\xf4\xf5\xf6\xf7\xf8\xf9", 10), 42);
  EXPECT_EQ(to_hex(okm),
            "3cb25f25faacd57a90434f64d0362f2a2d2d0a90cf1a5a4c5db02d56ecc4c5bf34007208d5b887185865");
}

TEST(Bench, ModeProperties) {
  const auto r = bench_modes(1024, 2000);
  ASSERT_EQ(r.modes.size(), 2u);
  EXPECT_EQ(r.modes[0].mode, Mode::PreShared);
  EXPECT_EQ(r.modes[0].setup_ms, 0.0);
  EXPECT_GT(r.modes[1].setup_ms, 0.0);
  const double ratio = r.modes[1].seal_median_us / r.modes[0].seal_median_us;
  EXPECT_GE(ratio, 0.5);
  EXPECT_LE(ratio, 2.0);
  const auto j = to_json(r);
  EXPECT_EQ(j["modes"].size(), 2u);
  EXPECT_EQ(j["modes"][1]["mode"], "ecdh");
  EXPECT_NE(format_table({r}).find("preshared"), std::string::npos);
}

TEST(Bench, ThroughputFallsWithPayload) {
  double prev = 1e300;
  for (std::size_t size : {64u, 1024u, 16384u, 65536u}) {
    const auto r = bench_modes(size, 300);
    EXPECT_LT(r.modes[0].throughput_rps, prev) << size;
    prev = r.modes[0].throughput_rps;
  }
}
