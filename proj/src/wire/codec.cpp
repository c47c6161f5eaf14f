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

#include "heartvault/wire/codec.hpp"

#include <string>

namespace hv::wire {

namespace {

void end_run(DecoderState& state, std::vector<FrameEvent>& out) {
  if (state.mode == DecoderState::Mode::InWave) {
    if (!state.pending_samples.empty()) {
      out.push_back(FrameEvent::wave(std::move(state.pending_samples)));
      state.pending_samples.clear();
    }
    state.mode = DecoderState::Mode::Idle;
  }
}

}  // namespace

void feed(DecoderState& state, ByteView bytes, std::vector<FrameEvent>& out) {
  using Mode = DecoderState::Mode;
  for (std::uint8_t b : bytes) {
    switch (state.mode) {
      case Mode::ExpectPulse:
        out.push_back(FrameEvent::pulse(b));
        state.mode = Mode::Idle;
        continue;
      case Mode::ExpectInfo:
        out.push_back(FrameEvent::info(b));
        state.mode = Mode::Idle;
        continue;
      case Mode::Idle:
      case Mode::InWave:
        break;
    }

    if (b <= kMaxSample) {
      if (state.mode == Mode::InWave) {
        state.pending_samples.push_back(b);
      } else {
        ++state.unexpected_data_bytes;
      }
      continue;
    }

    end_run(state, out);
    switch (b) {
      case kWaveMarker:
        state.mode = Mode::InWave;
        break;
      case kPulseMarker:
        state.mode = Mode::ExpectPulse;
        break;
      case kInfoMarker:
        state.mode = Mode::ExpectInfo;
        break;
      default:
        // 0xF9, 0xFC-0xFF: resync point.
        ++state.unknown_markers;
        state.mode = Mode::Idle;
        break;
    }
  }
}

std::vector<FrameEvent> feed(DecoderState& state, ByteView bytes) {
  std::vector<FrameEvent> out;
  feed(state, bytes, out);
  return out;
}

void flush(DecoderState& state, std::vector<FrameEvent>& out) { end_run(state, out); }

std::vector<FrameEvent> flush(DecoderState& state) {
  std::vector<FrameEvent> out;
  flush(state, out);
  return out;
}

std::vector<FrameEvent> decode_all(ByteView bytes) {
  DecoderState state;
  auto events = feed(state, bytes);
  flush(state, events);
  return events;
}

void encode_into(const FrameEvent& event, Bytes& out) {
  switch (event.kind) {
    case FrameEvent::Kind::WaveSamples:
      if (event.samples.empty()) throw Error(ErrorCode::SampleOutOfRange, "empty wave run");
      out.push_back(kWaveMarker);
      for (auto s : event.samples) {
        if (s > kMaxSample) {
          throw Error(ErrorCode::SampleOutOfRange,
                      "wave sample " + std::to_string(s) + " collides with marker range");
        }
        out.push_back(s);
      }
      break;
    case FrameEvent::Kind::Pulse:
      out.push_back(kPulseMarker);
      out.push_back(event.value);
      break;
    case FrameEvent::Kind::Info:
      out.push_back(kInfoMarker);
      out.push_back(event.value);
      break;
  }
}

Bytes encode(const std::vector<FrameEvent>& events) {
  Bytes out;
  for (const auto& e : events) encode_into(e, out);
  return out;
}

std::size_t sample_count(const std::vector<FrameEvent>& events) {
  std::size_t n = 0;
  for (const auto& e : events) {
    if (e.kind == FrameEvent::Kind::WaveSamples) n += e.samples.size();
  }
  return n;
}

}  // namespace hv::wire
