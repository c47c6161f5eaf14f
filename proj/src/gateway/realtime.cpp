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

#include "heartvault/gateway/realtime.hpp"

#include <algorithm>
#include <cmath>

#include "heartvault/common/error.hpp"
#include "heartvault/dsp/analysis.hpp"

namespace hv::gateway {

nlohmann::json to_json(const LiveMetrics& m) {
  nlohmann::json j;
  j["class"] = m.beat_class ? nlohmann::json(std::string(1, label_char(*m.beat_class))) : nlohmann::json(nullptr);
  j["pulse"] = m.pulse_bpm ? nlohmann::json(*m.pulse_bpm) : nlohmann::json(nullptr);
  j["device_pulse"] = m.device_pulse ? nlohmann::json(*m.device_pulse) : nlohmann::json(nullptr);
  j["latency_ms"] = m.latency_ms ? nlohmann::json(*m.latency_ms) : nlohmann::json(nullptr);
  j["ingest_ms"] = m.ingest_ms;
  j["result_ms"] = m.result_ms;
  j["count"] = m.processed;
  j["hops"] = m.hops;
  j["lead_off"] = m.lead_off;
  return j;
}

RealtimeMonitor::RealtimeMonitor(const SessionDescriptor& descriptor, RealtimeConfig config,
                                 std::shared_ptr<const classifier::CnnModel> model)
    : descriptor_(descriptor), config_(config), model_(std::move(model)) {
  const double fs = descriptor_.fs_hz;
  capacity_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(config_.window_s * fs)));
  hop_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(config_.hop_s * fs)));
  dsp::FilterSpec spec;
  spec.order = config_.filter_order;
  spec.fs_hz = fs;
  spec.lowcut_hz = config_.filter_low_hz;
  spec.highcut_hz = std::min(config_.filter_high_hz, 0.45 * fs);
  try {
    bandpass_ = dsp::design_bandpass(spec);
  } catch (const Error&) {
    bandpass_.reset();  // rate too low for the band; filtering becomes a no-op
  }
}

bool RealtimeMonitor::consume(const wire::FrameEvent& e) {
  switch (e.kind) {
    case wire::FrameEvent::Kind::Pulse:
      metrics_.device_pulse = e.value;
      return false;
    case wire::FrameEvent::Kind::Info:
      if (e.is_lead_off()) {
        metrics_.lead_off = true;
        metrics_.beat_class.reset();
        buffer_.clear();  // the trace is discontinuous across the fault
        since_hop_ = 0;
      }
      return false;
    case wire::FrameEvent::Kind::WaveSamples:
      break;
  }
  if (e.samples.empty()) return false;
  metrics_.lead_off = false;
  bool hop = false;
  for (std::uint8_t raw : e.samples) {
    buffer_.push_back(descriptor_.calibration.forward(raw));
    if (buffer_.size() > capacity_) buffer_.pop_front();
    ++metrics_.processed;
    if (++since_hop_ >= hop_) {
      since_hop_ = 0;
      hop = true;
    }
  }
  return hop;
}

void RealtimeMonitor::run_hop(std::uint64_t ingest_ms) {
  ++metrics_.hops;
  metrics_.ingest_ms = ingest_ms;
  const double fs = descriptor_.fs_hz;
  std::vector<double> x(buffer_.begin(), buffer_.end());
  if (static_cast<double>(x.size()) < 2.0 * fs) return;
  if (filter_on_ && bandpass_ && x.size() > dsp::filtfilt_padlen(*bandpass_)) x = dsp::filtfilt(*bandpass_, x);

  const auto peaks = dsp::pan_tompkins(x, fs);
  if (const auto bpm = signal::smoothed_bpm(peaks, fs, static_cast<double>(x.size()) / fs)) metrics_.pulse_bpm = *bpm;
  if (!model_ || peaks.empty()) return;

  signal::SignalWindow w;
  w.samples = std::move(x);
  w.fs_hz = fs;
  std::vector<std::size_t> at_model_rate = peaks;
  if (fs != classifier::kModelRateHz) {
    w = classifier::resample(w, classifier::kModelRateHz);
    for (auto& p : at_model_rate) p = classifier::map_index(p, fs, classifier::kModelRateHz);
  }
  const auto seg = classifier::segment_beats(w, at_model_rate);
  if (seg.segments.empty()) return;
  const auto pred = classifier::predict(*model_, classifier::normalize(seg.segments.back()));
  metrics_.beat_class = pred.label;
}

}  // namespace hv::gateway
