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
#include <deque>
#include <memory>
#include <optional>
#include <vector>

#include "json.hpp"

#include "heartvault/classifier/cnn.hpp"
#include "heartvault/dsp/filter.hpp"
#include "heartvault/gateway/protocol.hpp"
#include "heartvault/wire/codec.hpp"

namespace hv::gateway {

struct RealtimeConfig {
  double window_s = 10.0;  // rolling buffer
  double hop_s = 2.0;
  double filter_low_hz = 0.5;
  double filter_high_hz = 40.0;  // clamped to 0.45 fs
  int filter_order = 2;
};

/// The four live readouts plus timing detail.
struct LiveMetrics {
  std::optional<ClassLabel> beat_class;
  std::optional<double> pulse_bpm;         // from detected peaks
  std::optional<std::uint8_t> device_pulse;  // last Pulse event from the agent
  std::optional<double> latency_ms;        // result_ms - ingest_ms of the latest hop
  std::uint64_t ingest_ms = 0;
  std::uint64_t result_ms = 0;
  std::uint64_t processed = 0;  // decoded samples
  std::uint64_t hops = 0;
  bool lead_off = false;
};

nlohmann::json to_json(const LiveMetrics& m);

/// Per-session signal processing: rolling buffer, one analysis every hop
/// (optional bandpass, Pan-Tompkins, newest-beat classification, pulse).
/// Single-threaded; the owner publishes snapshots.
class RealtimeMonitor {
 public:
  RealtimeMonitor(const SessionDescriptor& descriptor, RealtimeConfig config,
                  std::shared_ptr<const classifier::CnnModel> model);

  /// Feeds the events decoded from one record. `ingest_ms` is the wall time
  /// the record arrived; `now_ms` reads the clock when a hop finishes.
  /// Returns true when at least one hop ran.
  template <typename Clock>
  bool push(const std::vector<wire::FrameEvent>& events, std::uint64_t ingest_ms, Clock now_ms) {
    bool ran = false;
    for (const auto& e : events) {
      if (consume(e)) {
        run_hop(ingest_ms);
        metrics_.result_ms = now_ms();
        metrics_.latency_ms = static_cast<double>(metrics_.result_ms) - static_cast<double>(ingest_ms);
        ran = true;
      }
    }
    return ran;
  }

  void set_filter(bool on) { filter_on_ = on; }
  bool filter_enabled() const { return filter_on_; }
  const LiveMetrics& metrics() const { return metrics_; }
  std::size_t buffered() const { return buffer_.size(); }
  const SessionDescriptor& descriptor() const { return descriptor_; }

 private:
  // True when a hop boundary was crossed inside this event.
  bool consume(const wire::FrameEvent& e);
  void run_hop(std::uint64_t ingest_ms);

  SessionDescriptor descriptor_;
  RealtimeConfig config_;
  std::shared_ptr<const classifier::CnnModel> model_;
  std::optional<dsp::FilterCoefficients> bandpass_;
  std::size_t capacity_ = 0;
  std::size_t hop_ = 0;
  std::size_t since_hop_ = 0;
  std::deque<double> buffer_;
  bool filter_on_ = false;
  LiveMetrics metrics_;
};

}  // namespace hv::gateway
