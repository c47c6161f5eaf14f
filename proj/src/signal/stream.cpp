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

#include "heartvault/signal/stream.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "heartvault/common/error.hpp"
#include "heartvault/wire/codec.hpp"

namespace hv::signal {

std::vector<std::uint8_t> quantize(const std::vector<double>& samples, const Calibration& cal) {
  if (cal.gain == 0.0) throw Error(ErrorCode::QuantizationOverflow, "calibration gain is zero");
  std::vector<std::uint8_t> raw(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double q = std::round((samples[i] - cal.offset) / cal.gain);
    if (!(q >= 0.0 && q <= wire::kMaxSample)) {
      throw Error(ErrorCode::QuantizationOverflow,
                  "sample " + std::to_string(i) + " maps to " + std::to_string(q));
    }
    raw[i] = static_cast<std::uint8_t>(q);
  }
  return raw;
}

std::vector<double> dequantize(const std::vector<std::uint8_t>& raw, const Calibration& cal) {
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = cal.forward(raw[i]);
  return out;
}

std::optional<double> smoothed_bpm(const std::vector<std::size_t>& peaks, double fs_hz, double t_s) {
  const auto limit = static_cast<std::size_t>(std::floor(t_s * fs_hz));
  const auto end = std::upper_bound(peaks.begin(), peaks.end(), limit);
  const auto seen = static_cast<std::size_t>(end - peaks.begin());
  if (seen < 2) return std::nullopt;
  const std::size_t intervals = std::min<std::size_t>(5, seen - 1);
  double sum = 0.0;
  for (std::size_t k = seen - intervals; k < seen; ++k) {
    sum += 60.0 * fs_hz / static_cast<double>(peaks[k] - peaks[k - 1]);
  }
  return sum / static_cast<double>(intervals);
}

std::vector<TimedChunk> stream(const SignalWindow& window, const StreamOptions& opt) {
  validate(window);
  if (opt.chunk_samples == 0) throw Error(ErrorCode::InvalidProfile, "chunk_samples must be positive");
  const auto raw = quantize(window.samples, opt.calibration);
  const double fs = window.fs_hz;
  const double duration = static_cast<double>(raw.size()) / fs;

  auto suppressed = [&](std::size_t i) {
    const double t = static_cast<double>(i) / fs;
    for (const auto& f : opt.faults) {
      if (t >= f.at_s && t < f.at_s + f.duration_s) return true;
    }
    return false;
  };

  std::vector<TimedChunk> out;
  std::size_t i = 0;
  while (i < raw.size()) {
    if (suppressed(i)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < raw.size() && j - i < opt.chunk_samples && !suppressed(j)) ++j;
    TimedChunk c{static_cast<double>(j) / fs, static_cast<double>(i) / fs, ChunkKind::Wave, {}};
    wire::encode_into(wire::FrameEvent::wave({raw.begin() + i, raw.begin() + j}), c.bytes);
    out.push_back(std::move(c));
    i = j;
  }

  for (const auto& f : opt.faults) {
    if (f.at_s < 0.0 || f.at_s > duration) continue;
    TimedChunk c{f.at_s, f.at_s, ChunkKind::LeadOff, {}};
    wire::encode_into(wire::FrameEvent::info(wire::kLeadOff), c.bytes);
    out.push_back(std::move(c));
  }

  if (opt.pulse_period_s > 0.0 && window.truth_peaks) {
    for (int k = 1; k * opt.pulse_period_s <= duration + 1e-9; ++k) {
      const double t = k * opt.pulse_period_s;
      const auto bpm = smoothed_bpm(*window.truth_peaks, fs, t);
      if (!bpm) continue;
      const auto v = static_cast<std::uint8_t>(std::clamp(std::lround(*bpm), 0L, 255L));
      TimedChunk c{t, t, ChunkKind::Pulse, {}};
      wire::encode_into(wire::FrameEvent::pulse(v), c.bytes);
      out.push_back(std::move(c));
    }
  }

  std::stable_sort(out.begin(), out.end(),
                   [](const TimedChunk& a, const TimedChunk& b) { return a.emit_s < b.emit_s; });
  return out;
}

std::vector<Bytes> split_at_markers(ByteView bytes, std::size_t target) {
  if (target == 0) target = 1;
  std::vector<Bytes> out;
  Bytes cur;
  bool awaiting_value = false;  // the byte after 0xFA / 0xFB is data even if >= 0xF8
  for (std::uint8_t b : bytes) {
    const bool is_marker = !awaiting_value && b >= wire::kWaveMarker;
    if (is_marker && cur.size() >= target) {
      out.push_back(std::move(cur));
      cur.clear();
    }
    cur.push_back(b);
    if (awaiting_value) {
      awaiting_value = false;
    } else if (b == wire::kPulseMarker || b == wire::kInfoMarker) {
      awaiting_value = true;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<TimedChunk> replay_schedule(ByteView bytes, double fs_hz, std::size_t target) {
  if (!(fs_hz > 0.0)) throw Error(ErrorCode::InvalidProfile, "fs must be positive");
  std::vector<TimedChunk> out;
  std::size_t samples_seen = 0;
  for (auto& chunk : split_at_markers(bytes, target)) {
    const double stamp = static_cast<double>(samples_seen) / fs_hz;
    samples_seen += wire::sample_count(wire::decode_all(chunk));
    ChunkKind kind = ChunkKind::Wave;
    if (!chunk.empty() && chunk[0] == wire::kPulseMarker) kind = ChunkKind::Pulse;
    if (chunk.size() >= 2 && chunk[0] == wire::kInfoMarker && chunk[1] == wire::kLeadOff) {
      kind = ChunkKind::LeadOff;
    }
    out.push_back({static_cast<double>(samples_seen) / fs_hz, stamp, kind, std::move(chunk)});
  }
  return out;
}

void pace(const std::vector<TimedChunk>& chunks, bool accelerated,
          const std::function<bool(const TimedChunk&)>& sink) {
  const auto start = std::chrono::steady_clock::now();
  for (const auto& c : chunks) {
    if (!accelerated) {
      std::this_thread::sleep_until(start + std::chrono::duration<double>(c.emit_s));
    }
    if (!sink(c)) return;
  }
}

}  // namespace hv::signal
