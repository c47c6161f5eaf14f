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
#include <vector>

#include "heartvault/common/bytes.hpp"

namespace hv::wire {

inline constexpr std::uint8_t kWaveMarker = 0xF8;
inline constexpr std::uint8_t kPulseMarker = 0xFA;
inline constexpr std::uint8_t kInfoMarker = 0xFB;
inline constexpr std::uint8_t kLeadOff = 0x11;
/// Samples are data bytes strictly below the lowest marker.
inline constexpr std::uint8_t kMaxSample = 0xF7;

struct FrameEvent {
  enum class Kind : std::uint8_t { WaveSamples, Pulse, Info };

  Kind kind = Kind::WaveSamples;
  std::vector<std::uint8_t> samples;  // WaveSamples
  std::uint8_t value = 0;             // pulse bpm or info code

  static FrameEvent wave(std::vector<std::uint8_t> s) { return {Kind::WaveSamples, std::move(s), 0}; }
  static FrameEvent pulse(std::uint8_t bpm) { return {Kind::Pulse, {}, bpm}; }
  static FrameEvent info(std::uint8_t code) { return {Kind::Info, {}, code}; }

  bool is_lead_off() const { return kind == Kind::Info && value == kLeadOff; }

  friend bool operator==(const FrameEvent&, const FrameEvent&) = default;
};

struct DecoderState {
  enum class Mode : std::uint8_t { Idle, InWave, ExpectPulse, ExpectInfo };

  Mode mode = Mode::Idle;
  std::vector<std::uint8_t> pending_samples;
  // Diagnostics: data bytes seen in Idle and unknown marker bytes.
  std::uint64_t unexpected_data_bytes = 0;
  std::uint64_t unknown_markers = 0;

  friend bool operator==(const DecoderState&, const DecoderState&) = default;
};

/// Incremental decode. Events are appended to `out` in input order; a wave run
/// stays pending in `state` until a marker or flush() terminates it.
void feed(DecoderState& state, ByteView bytes, std::vector<FrameEvent>& out);

std::vector<FrameEvent> feed(DecoderState& state, ByteView bytes);

/// Terminates a pending wave run. A pending ExpectPulse/ExpectInfo is kept,
/// since its data byte may still arrive.
void flush(DecoderState& state, std::vector<FrameEvent>& out);

std::vector<FrameEvent> flush(DecoderState& state);

/// One-shot decode of a complete stream (feed + flush).
std::vector<FrameEvent> decode_all(ByteView bytes);

/// Inverse layout. Each WaveSamples event gets its own 0xF8 marker, so runs are
/// never merged on decode. Throws SampleOutOfRange for samples >= 0xF8.
Bytes encode(const std::vector<FrameEvent>& events);

void encode_into(const FrameEvent& event, Bytes& out);

/// Total samples carried by a list of events.
std::size_t sample_count(const std::vector<FrameEvent>& events);

}  // namespace hv::wire
