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

#include "heartvault/gateway/agent.hpp"

#include <chrono>
#include <cmath>

#include "heartvault/common/error.hpp"
#include "heartvault/wire/codec.hpp"

namespace hv::gateway {

AgentReport run_agent(const AgentConfig& config, secure::Transport& transport) {
  AgentReport rep;
  std::vector<signal::TimedChunk> chunks;
  if (config.replay) {
    chunks = signal::replay_schedule(*config.replay, config.fs_hz, config.replay_chunk_bytes);
  } else {
    rep.window = signal::synth(config.profile, config.duration_s, config.fs_hz);
    chunks = signal::stream(rep.window, config.stream);
  }

  secure::SessionKey key;
  if (config.mode == secure::Mode::PreShared) {
    if (!config.psk) throw Error(ErrorCode::BadRequest, "pre-shared mode needs a key");
    key = secure::handshake_psk(secure::Role::Initiator, transport, *config.psk);
  } else {
    key = secure::handshake(secure::Role::Initiator, transport);
  }
  rep.session_id = session_hex(key.session_id);
  secure::Sealer sealer(key, secure::Direction::InitiatorToResponder);

  rep.descriptor.fs_hz = config.fs_hz;
  rep.descriptor.calibration = config.stream.calibration;
  rep.descriptor.source = config.replay ? "replay" : "synthetic";
  rep.descriptor.t0_ms = config.t0_ms != 0
                             ? config.t0_ms
                             : static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                                              std::chrono::system_clock::now().time_since_epoch())
                                                              .count());
  auto send = [&](secure::RecordKind kind, std::uint64_t ts, ByteView payload) {
    const auto rec = sealer.seal_next(kind, config.patient_id, ts, payload);
    secure::send_frame32(transport, secure::serialize(rec));
    ++rep.records;
  };
  send(secure::RecordKind::Segment, rep.descriptor.t0_ms, encode_descriptor(rep.descriptor));

  signal::pace(chunks, config.accelerated, [&](const signal::TimedChunk& c) {
    const auto ts = rep.descriptor.t0_ms + static_cast<std::uint64_t>(std::llround(1000.0 * c.stamp_s));
    send(secure::RecordKind::RawFrame, ts, c.bytes);
    rep.wire_bytes += c.bytes.size();
    for (const auto& e : wire::decode_all(c.bytes)) {
      if (e.kind != wire::FrameEvent::Kind::WaveSamples) continue;
      rep.samples += e.samples.size();
      rep.sent_samples.insert(rep.sent_samples.end(), e.samples.begin(), e.samples.end());
    }
    return true;
  });
  transport.close();
  return rep;
}

}  // namespace hv::gateway
