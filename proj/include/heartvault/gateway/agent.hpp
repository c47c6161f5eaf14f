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

#include "heartvault/gateway/protocol.hpp"
#include "heartvault/secure/transport.hpp"
#include "heartvault/signal/synth.hpp"

namespace hv::gateway {

/// Upper bound on one framed record between agent and gateway.
inline constexpr std::size_t kMaxRecordBytes = 1 << 20;

struct AgentConfig {
  std::string patient_id = "patient-1";
  secure::Mode mode = secure::Mode::Ecdh;
  std::optional<secure::Key32> psk;  // required for PreShared
  signal::SynthProfile profile;
  double fs_hz = 50.0;
  double duration_s = 60.0;
  signal::StreamOptions stream{signal::kSyntheticCalibration, 1.0, 25, {}};
  std::optional<Bytes> replay;       // raw wire bytes instead of the generator
  std::size_t replay_chunk_bytes = 64;
  bool accelerated = false;
  std::uint64_t t0_ms = 0;  // 0 = wall clock at start
};

struct AgentReport {
  std::string session_id;
  SessionDescriptor descriptor;
  std::uint64_t records = 0;  // including the descriptor
  std::uint64_t samples = 0;
  std::uint64_t wire_bytes = 0;
  std::vector<std::uint8_t> sent_samples;  // every raw sample, in order
  signal::SignalWindow window;             // the generated window (empty for replay)
};

/// Handshake as initiator, send the descriptor record, then one RawFrame
/// record per stream chunk stamped with the time of its first sample.
/// Closes the transport when done.
AgentReport run_agent(const AgentConfig& config, secure::Transport& transport);

}  // namespace hv::gateway
