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

#include "heartvault/secure/channel.hpp"

#include <algorithm>
#include <cstring>

#include "heartvault/common/error.hpp"

namespace hv::secure {

const char* mode_name(Mode m) { return m == Mode::PreShared ? "preshared" : "ecdh"; }

std::optional<Mode> mode_from_name(std::string_view name) {
  if (name == "preshared") return Mode::PreShared;
  if (name == "ecdh") return Mode::Ecdh;
  return std::nullopt;
}

const char* kind_name(RecordKind k) {
  switch (k) {
    case RecordKind::RawFrame: return "RawFrame";
    case RecordKind::Segment: return "Segment";
    case RecordKind::Pulse: return "Pulse";
    case RecordKind::AnalysisInput: return "AnalysisInput";
  }
  return "?";
}

std::optional<RecordKind> kind_from_name(std::string_view name) {
  for (auto k : {RecordKind::RawFrame, RecordKind::Segment, RecordKind::Pulse, RecordKind::AnalysisInput}) {
    if (name == kind_name(k)) return k;
  }
  return std::nullopt;
}

namespace {

constexpr std::string_view kSaltLabel = "EPPS-v1";

Bytes concat(ByteView a, ByteView b) {
  Bytes out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

Key32 to_key(const Bytes& b) {
  Key32 k{};
  std::copy_n(b.begin(), 32, k.begin());
  return k;
}

Key32 confirmation(const Bytes& kc, std::string_view who, ByteView transcript) {
  Bytes msg(who.begin(), who.end());
  msg.insert(msg.end(), transcript.begin(), transcript.end());
  return hmac_sha256(kc, msg);
}

// Runs the two confirmation messages; the responder speaks first.
void confirm(Role role, Transport& t, const Bytes& kc, ByteView transcript) {
  const auto mine = confirmation(kc, role == Role::Initiator ? "initiator" : "responder", transcript);
  const auto theirs = confirmation(kc, role == Role::Initiator ? "responder" : "initiator", transcript);
  auto check = [&] {
    Bytes got;
    try {
      got = recv_frame16(t, 64);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::TransportClosed) throw;
      t.close();
      throw Error(ErrorCode::ConfirmFailure, "malformed confirmation");
    }
    if (!equal_ct(got, theirs)) {
      t.close();
      throw Error(ErrorCode::ConfirmFailure, "key confirmation mismatch");
    }
  };
  if (role == Role::Responder) {
    send_frame16(t, mine);
    check();
  } else {
    check();
    send_frame16(t, mine);
  }
}

}  // namespace

SessionKey handshake(Role role, Transport& t) {
  const auto eph = X25519::generate();
  Bytes pub_i, pub_r;
  try {
    if (role == Role::Initiator) {
      pub_i.assign(eph.public_key().begin(), eph.public_key().end());
      send_frame16(t, pub_i);
      pub_r = recv_frame16(t, 64);
    } else {
      pub_i = recv_frame16(t, 64);
      pub_r.assign(eph.public_key().begin(), eph.public_key().end());
      send_frame16(t, pub_r);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MalformedRecord) {
      t.close();
      throw Error(ErrorCode::ConfirmFailure, "malformed public value");
    }
    throw;
  }
  const Bytes transcript = concat(pub_i, pub_r);
  // A peer value of the wrong size or low order can only come from tampering;
  // it fails the same way a confirmation mismatch does.
  Key32 shared{};
  try {
    shared = eph.agree(role == Role::Initiator ? ByteView(pub_r) : ByteView(pub_i));
  } catch (const Error&) {
    t.close();
    throw Error(ErrorCode::ConfirmFailure, "peer public value rejected");
  }
  Bytes salt_in(kSaltLabel.begin(), kSaltLabel.end());
  salt_in.insert(salt_in.end(), transcript.begin(), transcript.end());
  const auto salt = sha256(salt_in);

  SessionKey out;
  out.mode = Mode::Ecdh;
  out.key = to_key(hkdf_sha256(shared, salt, "EPPS key", 32));
  const auto kc = hkdf_sha256(shared, salt, "EPPS confirm", 32);
  const auto sid = hkdf_sha256(shared, salt, "EPPS session", 16);
  std::copy(sid.begin(), sid.end(), out.session_id.begin());
  confirm(role, t, kc, transcript);
  return out;
}

SessionKey handshake_psk(Role role, Transport& t, const Key32& psk) {
  SessionKey out;
  out.mode = Mode::PreShared;
  Bytes sid;
  if (role == Role::Initiator) {
    sid = random_bytes(16);
    send_frame16(t, sid);
  } else {
    try {
      sid = recv_frame16(t, 64);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MalformedRecord) throw;
      sid.clear();
    }
    if (sid.size() != 16) {
      t.close();
      throw Error(ErrorCode::ConfirmFailure, "malformed session id");
    }
  }
  std::copy(sid.begin(), sid.end(), out.session_id.begin());
  out.key = to_key(hkdf_sha256(psk, sid, "EPPS psk key", 32));
  const auto kc = hkdf_sha256(psk, sid, "EPPS psk confirm", 32);
  confirm(role, t, kc, sid);
  return out;
}

Key32 parse_psk(std::string_view hex) {
  if (hex.size() != 64) throw Error(ErrorCode::BadRequest, "pre-shared key must be 64 hex characters");
  return to_key(from_hex(hex));
}

Bytes associated_data(const CipherRecord& r) {
  if (r.header.patient_id.size() > 0xFFFF) throw Error(ErrorCode::BadRequest, "patient id too long");
  Bytes out{'E', 'P', 'P', 'S'};
  put_u8(out, kRecordVersion);
  put_u8(out, static_cast<std::uint8_t>(r.header.kind));
  put_u16(out, static_cast<std::uint16_t>(r.header.patient_id.size()));
  put_string(out, r.header.patient_id);
  put_u64(out, r.header.timestamp_ms);
  put_u64(out, r.header.seq);
  put_bytes(out, r.nonce);
  return out;
}

Bytes serialize(const CipherRecord& r) {
  Bytes out = associated_data(r);
  put_u32(out, static_cast<std::uint32_t>(r.ciphertext.size()));
  put_bytes(out, r.ciphertext);
  put_bytes(out, r.tag);
  return out;
}

CipherRecord parse_record(ByteView bytes) {
  Reader rd(bytes, ErrorCode::MalformedRecord);
  const auto magic = rd.bytes(4);
  if (std::memcmp(magic.data(), "EPPS", 4) != 0) throw Error(ErrorCode::MalformedRecord, "bad magic");
  if (rd.u8() != kRecordVersion) throw Error(ErrorCode::MalformedRecord, "unsupported record version");
  const std::uint8_t kind = rd.u8();
  if (kind < 1 || kind > 4) throw Error(ErrorCode::MalformedRecord, "unknown record kind");
  CipherRecord r;
  r.header.kind = static_cast<RecordKind>(kind);
  const std::uint16_t pid_len = rd.u16();
  r.header.patient_id = rd.string(pid_len);
  r.header.timestamp_ms = rd.u64();
  r.header.seq = rd.u64();
  const auto nonce = rd.bytes(12);
  std::copy(nonce.begin(), nonce.end(), r.nonce.begin());
  const std::uint32_t ct_len = rd.u32();
  if (ct_len > rd.remaining()) throw Error(ErrorCode::MalformedRecord, "ciphertext length exceeds record");
  const auto ct = rd.bytes(ct_len);
  r.ciphertext.assign(ct.begin(), ct.end());
  const auto tag = rd.bytes(16);
  std::copy(tag.begin(), tag.end(), r.tag.begin());
  if (!rd.done()) throw Error(ErrorCode::MalformedRecord, "trailing bytes after record");
  return r;
}

std::array<std::uint8_t, 12> derive_nonce(const SessionKey& key, Direction dir, std::uint64_t seq) {
  Bytes in(key.session_id.begin(), key.session_id.end());
  put_u8(in, static_cast<std::uint8_t>(dir));
  const auto h = sha256(in);
  std::array<std::uint8_t, 12> n{};
  std::copy_n(h.begin(), 4, n.begin());
  for (int i = 0; i < 8; ++i) n[4 + i] = static_cast<std::uint8_t>(seq >> (8 * i));
  return n;
}

CipherRecord seal(const SessionKey& key, Direction dir, const RecordHeader& header, ByteView plaintext) {
  CipherRecord r;
  r.header = header;
  r.nonce = derive_nonce(key, dir, header.seq);
  auto s = aes256gcm_seal(key.key, r.nonce, associated_data(r), plaintext);
  r.ciphertext = std::move(s.ciphertext);
  r.tag = s.tag;
  return r;
}

Bytes open(const SessionKey& key, Direction dir, const CipherRecord& r) {
  if (r.nonce != derive_nonce(key, dir, r.header.seq)) throw Error(ErrorCode::AuthFailure, "authentication failed");
  auto pt = aes256gcm_open(key.key, r.nonce, associated_data(r), r.ciphertext, r.tag);
  if (!pt) throw Error(ErrorCode::AuthFailure, "authentication failed");
  return std::move(*pt);
}

CipherRecord Sealer::seal(const RecordHeader& header, ByteView plaintext) {
  if (last_ && header.seq <= *last_) {
    throw Error(ErrorCode::SeqReplay, "seq " + std::to_string(header.seq) + " not above " + std::to_string(*last_));
  }
  auto r = secure::seal(key_, dir_, header, plaintext);
  last_ = header.seq;
  return r;
}

CipherRecord Sealer::seal_next(RecordKind kind, const std::string& patient_id, std::uint64_t timestamp_ms,
                               ByteView plaintext) {
  return seal({kind, patient_id, timestamp_ms, last_ ? *last_ + 1 : 0}, plaintext);
}

Bytes Opener::open(const CipherRecord& record) {
  auto pt = secure::open(key_, dir_, record);
  if (last_ && record.header.seq <= *last_) {
    throw Error(ErrorCode::SeqReplay, "replayed seq " + std::to_string(record.header.seq));
  }
  last_ = record.header.seq;
  return pt;
}

}  // namespace hv::secure
