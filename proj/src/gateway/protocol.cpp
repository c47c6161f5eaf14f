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

#include "heartvault/gateway/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "heartvault/common/error.hpp"

namespace hv::gateway {

namespace {

constexpr std::string_view kEscrowContext = "heartvault-session-escrow";
constexpr std::uint8_t kBlockVersion = 1;

}  // namespace

nlohmann::json to_json(const SessionDescriptor& d) {
  return {{"fs_hz", d.fs_hz},
          {"gain", d.calibration.gain},
          {"offset", d.calibration.offset},
          {"t0_ms", d.t0_ms},
          {"source", d.source}};
}

SessionDescriptor descriptor_from_json(const nlohmann::json& j) {
  SessionDescriptor d;
  try {
    d.fs_hz = j.at("fs_hz").get<double>();
    d.calibration.gain = j.at("gain").get<double>();
    d.calibration.offset = j.at("offset").get<double>();
    d.t0_ms = j.at("t0_ms").get<std::uint64_t>();
    d.source = j.value("source", std::string{});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadRequest, std::string("session descriptor: ") + e.what());
  }
  if (!(d.fs_hz > 0.0) || !std::isfinite(d.fs_hz)) throw Error(ErrorCode::BadRequest, "descriptor rate must be positive");
  if (!(d.calibration.gain != 0.0) || !std::isfinite(d.calibration.gain)) {
    throw Error(ErrorCode::BadRequest, "descriptor gain must be non-zero");
  }
  return d;
}

Bytes encode_descriptor(const SessionDescriptor& d) {
  const std::string s = to_json(d).dump();
  return Bytes(s.begin(), s.end());
}

SessionDescriptor parse_descriptor(ByteView bytes) {
  const auto j = nlohmann::json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::BadRequest, "session descriptor is not a JSON object");
  return descriptor_from_json(j);
}

std::uint64_t sample_time_ms(const SessionDescriptor& d, std::uint64_t index) {
  return d.t0_ms + static_cast<std::uint64_t>(std::llround(1000.0 * static_cast<double>(index) / d.fs_hz));
}

Bytes escrow_session_key(const secure::Key32& analyst_public, const secure::SessionKey& key) {
  Bytes plain(key.key.begin(), key.key.end());
  put_bytes(plain, key.session_id);
  put_u8(plain, static_cast<std::uint8_t>(key.mode));
  return secure::wrap_to(analyst_public, plain, kEscrowContext);
}

secure::SessionKey unescrow_session_key(const secure::X25519& analyst, ByteView blob) {
  const Bytes plain = secure::unwrap_with(analyst, blob, kEscrowContext);
  if (plain.size() != 32 + 16 + 1) throw Error(ErrorCode::AuthFailure, "escrow blob has the wrong size");
  secure::SessionKey k;
  std::memcpy(k.key.data(), plain.data(), 32);
  std::memcpy(k.session_id.data(), plain.data() + 32, 16);
  if (plain[48] > 1) throw Error(ErrorCode::AuthFailure, "escrow blob has an unknown mode");
  k.mode = static_cast<secure::Mode>(plain[48]);
  return k;
}

secure::SessionKey at_rest_key(const secure::Key32& gateway_secret, const secure::SessionId& session,
                               secure::Mode mode) {
  const Bytes k = secure::hkdf_sha256(gateway_secret, session, "heartvault-at-rest", 32);
  secure::SessionKey out;
  std::copy(k.begin(), k.end(), out.key.begin());
  out.session_id = session;
  out.mode = mode;
  return out;
}

bool belongs_to(const secure::CipherRecord& record, const secure::SessionId& session, secure::Direction dir) {
  secure::SessionKey probe;
  probe.session_id = session;
  const auto n = secure::derive_nonce(probe, dir, 0);
  return std::equal(n.begin(), n.begin() + 4, record.nonce.begin());
}

std::string session_hex(const secure::SessionId& id) { return to_hex(id); }

secure::SessionId session_from_hex(const std::string& hex) {
  const Bytes b = from_hex(hex);
  if (b.size() != 16) throw Error(ErrorCode::BadRequest, "session id must be 32 hex characters");
  secure::SessionId id;
  std::copy(b.begin(), b.end(), id.begin());
  return id;
}

Bytes encode_block(const AnalysisBlock& b) {
  Bytes out;
  put_string(out, "HVAI");
  put_u8(out, kBlockVersion);
  put_bytes(out, b.session);
  put_u32(out, b.index);
  put_u64(out, b.first_sample);
  put_u32(out, b.n);
  put_f64(out, b.fs_hz);
  put_u8(out, b.lead_off ? 1 : 0);
  put_u32(out, static_cast<std::uint32_t>(b.envelope.size()));
  put_bytes(out, b.envelope);
  return out;
}

AnalysisBlock parse_block(ByteView bytes) {
  Reader rd(bytes);
  if (rd.string(4) != "HVAI") throw Error(ErrorCode::MalformedRecord, "analysis block magic");
  if (rd.u8() != kBlockVersion) throw Error(ErrorCode::MalformedRecord, "analysis block version");
  AnalysisBlock b;
  const auto sid = rd.bytes(16);
  std::copy(sid.begin(), sid.end(), b.session.begin());
  b.index = rd.u32();
  b.first_sample = rd.u64();
  b.n = rd.u32();
  b.fs_hz = rd.f64();
  const std::uint8_t lo = rd.u8();
  if (lo > 1) throw Error(ErrorCode::MalformedRecord, "analysis block flag");
  b.lead_off = lo == 1;
  const std::uint32_t len = rd.u32();
  const auto env = rd.bytes(len);
  b.envelope.assign(env.begin(), env.end());
  if (!rd.done()) throw Error(ErrorCode::MalformedRecord, "trailing bytes after analysis block");
  if (b.n == 0 || !(b.fs_hz > 0.0)) throw Error(ErrorCode::MalformedRecord, "empty analysis block");
  return b;
}

const char* mode_name(AnalysisMode m) {
  switch (m) {
    case AnalysisMode::Plaintext: return "plaintext";
    case AnalysisMode::Encrypted: return "encrypted";
    case AnalysisMode::Compare: return "compare";
  }
  return "?";
}

AnalysisMode analysis_mode_from_name(const std::string& name) {
  if (name == "plaintext") return AnalysisMode::Plaintext;
  if (name == "encrypted") return AnalysisMode::Encrypted;
  if (name == "compare") return AnalysisMode::Compare;
  throw Error(ErrorCode::BadRequest, "unknown analysis mode '" + name + "'");
}

AnalysisRequest request_from_json(const nlohmann::json& j) {
  AnalysisRequest r;
  try {
    r.patient_id = j.at("patient_id").get<std::string>();
    if (!j.at("t0").is_number_unsigned() || !j.at("t1").is_number_unsigned()) {
      throw Error(ErrorCode::BadRequest, "t0 and t1 must be non-negative integers (ms)");
    }
    r.t0_ms = j.at("t0").get<std::uint64_t>();
    r.t1_ms = j.at("t1").get<std::uint64_t>();
    const auto& a = j.at("analyses");
    std::string csv;
    if (a.is_array()) {
      for (const auto& x : a) csv += x.get<std::string>() + ",";
    } else {
      csv = a.get<std::string>();
    }
    r.analyses = fhe::parse_analyses(csv);
    r.mode = analysis_mode_from_name(j.value("mode", std::string("compare")));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadRequest, std::string("analysis request: ") + e.what());
  }
  if (r.analyses.empty()) throw Error(ErrorCode::BadRequest, "at least one analysis is required");
  if (r.patient_id.empty()) throw Error(ErrorCode::BadRequest, "patient_id must not be empty");
  if (r.t0_ms > r.t1_ms) throw Error(ErrorCode::BadRequest, "t0 must not exceed t1");
  return r;
}

nlohmann::json to_json(const AnalysisRequest& r) {
  auto names = nlohmann::json::array();
  const std::string csv = fhe::format_analyses(r.analyses);
  std::size_t pos = 0;
  while (pos < csv.size()) {
    const auto c = csv.find(',', pos);
    names.push_back(csv.substr(pos, c == std::string::npos ? std::string::npos : c - pos));
    if (c == std::string::npos) break;
    pos = c + 1;
  }
  return {{"patient_id", r.patient_id}, {"t0", r.t0_ms}, {"t1", r.t1_ms}, {"analyses", names}, {"mode", mode_name(r.mode)}};
}

nlohmann::json to_json(const RegisteredSession& s) {
  return {{"session_id", s.session_id},
          {"patient_id", s.patient_id},
          {"mode", secure::mode_name(s.mode)},
          {"escrow", s.escrow},
          {"descriptor", to_json(s.descriptor)}};
}

RegisteredSession registered_from_json(const nlohmann::json& j) {
  RegisteredSession s;
  try {
    s.session_id = j.at("session_id").get<std::string>();
    s.patient_id = j.at("patient_id").get<std::string>();
    const auto mode = secure::mode_from_name(j.at("mode").get<std::string>());
    if (!mode) throw Error(ErrorCode::BadRequest, "unknown session mode");
    s.mode = *mode;
    s.escrow = j.at("escrow").get<std::string>();
    s.descriptor = descriptor_from_json(j.at("descriptor"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadRequest, std::string("session entry: ") + e.what());
  }
  session_from_hex(s.session_id);
  return s;
}

}  // namespace hv::gateway
