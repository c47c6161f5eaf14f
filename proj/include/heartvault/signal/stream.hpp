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

#include <chrono>
#include <cstdint>
#include <functional>
#include <vector>

#include "heartvault/common/bytes.hpp"
#include "heartvault/signal/synth.hpp"

namespace hv::signal {

/// amplitude = gain * raw + offset
struct Calibration {
  double gain = 1.0;
  double offset = 0.0;

  double forward(std::uint8_t raw) const { return gain * raw + offset; }
  bool operator==(const Calibration&) const = default;
};

/// Calibration used by the agent and gateway tools for synthetic data:
/// raw = (amplitude + 0.64) * 100, so amplitudes in [-0.64, 1.83] fit.
inline constexpr Calibration kSyntheticCalibration{0.01, -0.64};

/// Inverse-affine quantization. Throws QuantizationOverflow when a sample maps
/// outside 0..247.
std::vector<std::uint8_t> quantize(const std::vector<double>& samples, const Calibration& cal);
std::vector<double> dequantize(const std::vector<std::uint8_t>& raw, const Calibration& cal);

struct LeadOffFault {
  double at_s = 0.0;
  double duration_s = 0.0;  // wave samples inside [at, at + duration) are suppressed
};

enum class ChunkKind : std::uint8_t { Wave, Pulse, LeadOff };

struct TimedChunk {
  double emit_s;   // offset from stream start at which the chunk becomes available
  double stamp_s;  // time of the first sample (or of the event)
  ChunkKind kind;
  Bytes bytes;     // always starts with a marker byte
};

struct StreamOptions {
  Calibration calibration;
  double pulse_period_s = 1.0;
  std::size_t chunk_samples = 25;
  std::vector<LeadOffFault> faults;
};

/// Mean of the per-interval BPM over the last (up to) 5 RR intervals ending at
/// or before `t_s`; nullopt before two beats have been seen.
std::optional<double> smoothed_bpm(const std::vector<std::size_t>& peaks, double fs_hz, double t_s);

/// Produces the timed chunk schedule for a window. Wave runs carry up to
/// chunk_samples samples and are emitted when their last sample exists. A
/// Pulse chunk goes out every pulse_period_s once a BPM estimate exists.
/// Pulse values use truth_peaks when present.
std::vector<TimedChunk> stream(const SignalWindow& window, const StreamOptions& options);

/// Splits a recorded byte stream into chunks of roughly `target` bytes, cutting
/// only where a marker starts so every chunk decodes on its own.
std::vector<Bytes> split_at_markers(ByteView bytes, std::size_t target);

/// Timed schedule for a replayed raw stream: chunk emission is paced by the
/// number of samples seen at `fs_hz`.
std::vector<TimedChunk> replay_schedule(ByteView bytes, double fs_hz, std::size_t target);

/// Delivers chunks to `sink`, sleeping until each emit time unless
/// `accelerated`. Returning false from the sink stops the run.
void pace(const std::vector<TimedChunk>& chunks, bool accelerated,
          const std::function<bool(const TimedChunk&)>& sink);

}  // namespace hv::signal
