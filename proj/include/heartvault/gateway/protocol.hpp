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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "heartvault/fhe/pipeline.hpp"
#include "heartvault/secure/channel.hpp"
#include "heartvault/signal/stream.hpp"

namespace hv::gateway {

/// First record of every agent session (kind Segment): how to read the
/// RawFrame records that follow. Serialized as compact JSON.
struct SessionDescriptor {
  double fs_hz = 50.0;
  signal::Calibration calibration = signal::kSyntheticCalibration;
  std::uint64_t t0_ms = 0;  // timestamp of sample 0
  std::string source = "synthetic";

  bool operator==(const SessionDescriptor&) const = default;
};

Bytes encode_descriptor(const SessionDescriptor& d);
/// Throws BadRequest on malformed JSON or a non-positive rate.
SessionDescriptor parse_descriptor(ByteView bytes);
nlohmann::json to_json(const SessionDescriptor& d);
SessionDescriptor descriptor_from_json(const nlohmann::json& j);

/// Timestamp of sample `index` of a session.
std::uint64_t sample_time_ms(const SessionDescriptor& d, std::uint64_t index);

/// Session key wrapped to the analyst's X25519 key: key 32 | session_id 16 | mode u8.
Bytes escrow_session_key(const secure::Key32& analyst_public, const secure::SessionKey& key);
/// Throws AuthFailure for a blob not wrapped to `analyst`.
secure::SessionKey unescrow_session_key(const secure::X25519& analyst, ByteView blob);

/// Key the gateway seals its own AnalysisInput records with:
/// HKDF(secret, salt = session_id, "heartvault-at-rest").
secure::SessionKey at_rest_key(const secure::Key32& gateway_secret, const secure::SessionId& session,
                               secure::Mode mode);

/// True when the record's nonce carries the session's prefix for `dir`.
bool belongs_to(const secure::CipherRecord& record, const secure::SessionId& session, secure::Direction dir);

std::string session_hex(const secure::SessionId& id);
secure::SessionId session_from_hex(const std::string& hex);

/// Plaintext of an AnalysisInput record: one HE-encrypted block of a session.
///   "HVAI" | version u8 | session_id 16 | index u32 | first_sample u64 | n u32
///   | fs f64 | lead_off u8 | envelope_len u32 + envelope
struct AnalysisBlock {
  secure::SessionId session{};
  std::uint32_t index = 0;
  std::uint64_t first_sample = 0;
  std::uint32_t n = 0;
  double fs_hz = 0.0;
  bool lead_off = false;  // a lead-off event fell inside the block
  Bytes envelope;         // fhe ciphertext envelope of the n calibrated samples

  bool operator==(const AnalysisBlock&) const = default;
};

Bytes encode_block(const AnalysisBlock& b);
/// Throws MalformedRecord.
AnalysisBlock parse_block(ByteView bytes);

/// Registry entry for a session: what the analyst needs to open its records.
struct RegisteredSession {
  std::string session_id;  // hex
  std::string patient_id;
  secure::Mode mode = secure::Mode::Ecdh;
  std::string escrow;  // base64 escrow_session_key blob
  SessionDescriptor descriptor;

  bool operator==(const RegisteredSession&) const = default;
};

nlohmann::json to_json(const RegisteredSession& s);
/// Throws BadRequest.
RegisteredSession registered_from_json(const nlohmann::json& j);

enum class AnalysisMode : std::uint8_t { Plaintext, Encrypted, Compare };
const char* mode_name(AnalysisMode m);
/// Throws BadRequest.
AnalysisMode analysis_mode_from_name(const std::string& name);

struct AnalysisRequest {
  std::string patient_id;
  std::uint64_t t0_ms = 0;
  std::uint64_t t1_ms = 0;
  fhe::AnalysisSet analyses;
  AnalysisMode mode = AnalysisMode::Compare;
};

/// Throws BadRequest on a missing field, t0 > t1 or an empty analysis list.
AnalysisRequest request_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AnalysisRequest& r);

}  // namespace hv::gateway
