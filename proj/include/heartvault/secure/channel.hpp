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

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "heartvault/common/bytes.hpp"
#include "heartvault/secure/crypto.hpp"
#include "heartvault/secure/transport.hpp"

namespace hv::secure {

enum class Mode : std::uint8_t { PreShared = 0, Ecdh = 1 };
enum class Role : std::uint8_t { Initiator, Responder };
enum class Direction : std::uint8_t { InitiatorToResponder = 0, ResponderToInitiator = 1 };

using SessionId = std::array<std::uint8_t, 16>;

/// Per-session secret. Deliberately has no serializer.
struct SessionKey {
  Key32 key{};
  SessionId session_id{};
  Mode mode = Mode::Ecdh;
};

const char* mode_name(Mode m);
std::optional<Mode> mode_from_name(std::string_view name);

/// Ephemeral X25519 exchange:
///   I -> R  u16 len | pub_I
///   R -> I  u16 len | pub_R
///   R -> I  u16 len | HMAC(kc, "responder" | pub_I | pub_R)
///   I -> R  u16 len | HMAC(kc, "initiator" | pub_I | pub_R)
/// key, kc and session_id come from HKDF-SHA256 over the shared secret with
/// salt SHA256("EPPS-v1" | pub_I | pub_R). A confirmation mismatch throws
/// ConfirmFailure and closes the transport.
SessionKey handshake(Role role, Transport& transport);

/// Pre-shared mode: the initiator sends a fresh 16-byte session id, both sides
/// derive key = HKDF(psk, salt = session_id) and exchange the same
/// confirmations over the session id.
SessionKey handshake_psk(Role role, Transport& transport, const Key32& psk);

/// 64 hex characters; throws BadRequest otherwise.
Key32 parse_psk(std::string_view hex);

enum class RecordKind : std::uint8_t { RawFrame = 1, Segment = 2, Pulse = 3, AnalysisInput = 4 };
const char* kind_name(RecordKind k);
std::optional<RecordKind> kind_from_name(std::string_view name);

struct RecordHeader {
  RecordKind kind = RecordKind::RawFrame;
  std::string patient_id;
  std::uint64_t timestamp_ms = 0;
  std::uint64_t seq = 0;

  bool operator==(const RecordHeader&) const = default;
};

inline constexpr std::uint8_t kRecordVersion = 1;

/// Wire layout, little-endian:
///   "EPPS" | version u8 | kind u8 | patient_id_len u16 + bytes | timestamp_ms u64
///   | seq u64 | nonce 12 | ciphertext_len u32 + bytes | tag 16
/// The associated data is every byte before ciphertext_len.
struct CipherRecord {
  RecordHeader header;
  std::array<std::uint8_t, 12> nonce{};
  Bytes ciphertext;
  std::array<std::uint8_t, 16> tag{};

  bool operator==(const CipherRecord&) const = default;
};

Bytes associated_data(const CipherRecord& record);
Bytes serialize(const CipherRecord& record);
/// Throws MalformedRecord on any structural problem (magic, version, kind,
/// lengths, trailing bytes).
CipherRecord parse_record(ByteView bytes);

/// 4-byte SHA256(session_id | direction) prefix followed by seq as u64 LE.
std::array<std::uint8_t, 12> derive_nonce(const SessionKey& key, Direction dir, std::uint64_t seq);

/// Stateless AEAD. open throws AuthFailure for any modification, a wrong key
/// or a nonce that does not match the counter derivation.
CipherRecord seal(const SessionKey& key, Direction dir, const RecordHeader& header, ByteView plaintext);
Bytes open(const SessionKey& key, Direction dir, const CipherRecord& record);

/// Sending half of a session: enforces strictly increasing seq (SeqReplay).
class Sealer {
 public:
  Sealer(SessionKey key, Direction dir) : key_(key), dir_(dir) {}
  CipherRecord seal(const RecordHeader& header, ByteView plaintext);
  /// Seals with the next sequence number.
  CipherRecord seal_next(RecordKind kind, const std::string& patient_id, std::uint64_t timestamp_ms,
                         ByteView plaintext);
  const SessionKey& key() const { return key_; }

 private:
  SessionKey key_;
  Direction dir_;
  std::optional<std::uint64_t> last_;
};

/// Receiving half: authenticates, then rejects non-increasing seq (SeqReplay).
class Opener {
 public:
  Opener(SessionKey key, Direction dir) : key_(key), dir_(dir) {}
  Bytes open(const CipherRecord& record);
  const SessionKey& key() const { return key_; }

 private:
  SessionKey key_;
  Direction dir_;
  std::optional<std::uint64_t> last_;
};

}  // namespace hv::secure
