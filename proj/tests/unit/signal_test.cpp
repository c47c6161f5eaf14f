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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "heartvault/common/error.hpp"
#include "heartvault/dsp/analysis.hpp"
#include "heartvault/signal/stream.hpp"
#include "heartvault/signal/synth.hpp"
#include "heartvault/wire/codec.hpp"

using namespace hv;
using namespace hv::signal;

namespace {

SynthProfile only(ClassLabel c, double bpm = 60.0) {
  SynthProfile p;
  p.bpm = bpm;
  p.class_mix.fill(0.0);
  p.class_mix[static_cast<std::size_t>(c)] = 1.0;
  return p;
}

SynthProfile mixed(std::uint64_t seed) {
  SynthProfile p;
  p.class_mix = {0.6, 0.1, 0.1, 0.1, 0.1};
  p.seed = seed;
  return p;
}

}  // namespace

TEST(Synth, SixtyBpmAtFiftyHzSpacedFiftySamples) {
  auto w = synth(only(ClassLabel::N), 10.0, 50.0);
  ASSERT_TRUE(w.truth_peaks);
  ASSERT_GE(w.truth_peaks->size(), 9u);
  for (std::size_t i = 1; i < w.truth_peaks->size(); ++i) {
    EXPECT_EQ((*w.truth_peaks)[i] - (*w.truth_peaks)[i - 1], 50u);
  }
  EXPECT_EQ(w.samples.size(), 500u);
}

TEST(Synth, SingleClassMixGivesOnlyThatLabel) {
  auto w = synth(only(ClassLabel::N), 20.0, 360.0);
  for (auto l : *w.truth_labels) EXPECT_EQ(l, ClassLabel::N);
}

TEST(Synth, RrOfPointEightFiveSeconds) {
  auto w = synth(only(ClassLabel::N, 60.0 / 0.85), 30.0, 360.0);
  const auto r = dsp::hrv(*w.truth_peaks, 360.0);
  EXPECT_NEAR(r.mean_rr, 0.85, 1.0 / 360.0);
}

TEST(Synth, RejectsMalformedProfiles) {
  auto p = only(ClassLabel::N);
  p.bpm = 19.0;
  EXPECT_THROW(synth(p, 10, 50), Error);
  p.bpm = 301.0;
  EXPECT_THROW(synth(p, 10, 50), Error);
  p = only(ClassLabel::N);
  p.class_mix[1] = 0.1;
  try {
    synth(p, 10, 50);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidProfile);
  }
  p = only(ClassLabel::N);
  p.class_mix = {1.1, -0.1, 0, 0, 0};
  EXPECT_THROW(synth(p, 10, 50), Error);
  p = only(ClassLabel::N);
  EXPECT_THROW(synth(p, 0.0, 50), Error);
  p.rr_jitter = 0.05;
  EXPECT_THROW(synth(p, 10, 50), Error);
}

TEST(Synth, DeterministicForSeed) {
  for (std::uint64_t seed : {1ull, 7ull, 12345ull}) {
    auto p = mixed(seed);
    p.noise_std = 0.02;
    p.rr_jitter = 0.02;
    auto a = synth(p, 15.0, 360.0);
    auto b = synth(p, 15.0, 360.0);
    EXPECT_EQ(a.samples, b.samples);
    EXPECT_EQ(*a.truth_peaks, *b.truth_peaks);
    EXPECT_EQ(*a.truth_labels, *b.truth_labels);
  }
  EXPECT_NE(synth(mixed(1), 15, 360).truth_labels, synth(mixed(2), 15, 360).truth_labels);
}

TEST(Synth, WindowInvariantsHold) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SplitMix rng(seed);
    auto p = mixed(seed);
    p.bpm = 20.0 + 280.0 * rng.uniform();
    p.rr_jitter = 0.02 * rng.uniform();
    const double fs = rng.uniform() < 0.5 ? 50.0 : 360.0;
    auto w = synth(p, 5.0 + 20.0 * rng.uniform(), fs);
    EXPECT_NO_THROW(validate(w));
  }
}

TEST(Synth, TruthPeakIsBeatMaximum) {
  for (auto c : kAllClasses) {
    for (double fs : {50.0, 360.0}) {
      auto w = synth(only(c), 6.0, fs);
      for (auto k : *w.truth_peaks) {
        const auto lo = k - static_cast<std::size_t>(0.05 * fs);
        const auto hi = std::min(w.samples.size() - 1, k + static_cast<std::size_t>(0.05 * fs));
        for (auto i = lo; i <= hi; ++i) EXPECT_LE(w.samples[i], w.samples[k]);
      }
    }
  }
}

TEST(Synth, TemplatesAreDistinct) {
  // Pairwise L2 distance between sampled templates at 360 Hz.
  std::vector<std::vector<double>> shapes;
  for (auto c : kAllClasses) {
    std::vector<double> s;
    for (int i = -90; i < 90; ++i) s.push_back(template_value(c, i / 360.0));
    shapes.push_back(s);
  }
  for (std::size_t a = 0; a < shapes.size(); ++a) {
    for (std::size_t b = a + 1; b < shapes.size(); ++b) {
      double d = 0;
      for (std::size_t i = 0; i < shapes[a].size(); ++i) d += std::pow(shapes[a][i] - shapes[b][i], 2);
      EXPECT_GT(std::sqrt(d), 0.5) << label_char(kAllClasses[a]) << " vs " << label_char(kAllClasses[b]);
    }
  }
  // P-wave presence: V has no bump before the QRS.
  EXPECT_NEAR(template_value(ClassLabel::V, -0.2), 0.0, 1e-6);
  EXPECT_GT(template_value(ClassLabel::N, -0.2), 0.1);
}

TEST(Synth, PanTompkinsRecoversTruth) {
  for (double fs : {50.0, 360.0}) {
    for (auto c : kAllClasses) {
      for (double bpm : {45.0, 60.0, 90.0, 120.0}) {
        auto w = synth(only(c, bpm), 20.0, fs);
        const auto found = dsp::pan_tompkins(w.samples, fs);
        const auto& truth = *w.truth_peaks;
        ASSERT_EQ(found.size(), truth.size()) << label_char(c) << " fs=" << fs << " bpm=" << bpm;
        for (std::size_t i = 0; i < truth.size(); ++i) {
          EXPECT_LE(std::abs(static_cast<long>(found[i]) - static_cast<long>(truth[i])), 2)
              << label_char(c) << " fs=" << fs << " bpm=" << bpm << " beat " << i;
        }
      }
    }
  }
}

TEST(Synth, PanTompkinsRecoversTruthOnMixedRhythms) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto p = mixed(seed);
    p.rr_jitter = 0.02;
    const double fs = seed % 2 ? 50.0 : 360.0;
    auto w = synth(p, 30.0, fs);
    const auto found = dsp::pan_tompkins(w.samples, fs);
    const auto& truth = *w.truth_peaks;
    ASSERT_EQ(found.size(), truth.size()) << "seed " << seed;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      EXPECT_LE(std::abs(static_cast<long>(found[i]) - static_cast<long>(truth[i])), 2);
    }
  }
}

// Narrow beats next to runs of wide ectopics carry a fraction of their
// energy at 50 Hz; the detector must still find every one.
TEST(Synth, PanTompkinsLowRateEctopicRuns) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    SynthProfile p;
    p.class_mix = {0.6, 0.1, 0.1, 0.1, 0.1};
    p.bpm = 45.0 + static_cast<double>((seed * 13) % 86);
    p.rr_jitter = seed % 3 == 0 ? 0.02 : 0.0;
    p.seed = 1000 + seed;
    auto w = synth(p, 20.0, 50.0);
    const auto found = dsp::pan_tompkins(w.samples, 50.0);
    const auto& truth = *w.truth_peaks;
    ASSERT_EQ(found.size(), truth.size()) << "seed " << seed << " bpm " << p.bpm;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      EXPECT_LE(std::abs(static_cast<long>(found[i]) - static_cast<long>(truth[i])), 2) << "seed " << seed;
    }
  }
}

TEST(Synth, JitteredMeanRr) {
  auto p = only(ClassLabel::N);
  p.rr_jitter = 0.02;
  p.seed = 99;
  auto w = synth(p, 60.0, 360.0);
  EXPECT_NEAR(dsp::hrv(*w.truth_peaks, 360.0).mean_rr, 1.0, 0.02);
}

TEST(Profile, ParseAndFormatRoundTrip) {
  const std::string text =
      "# demo\n"
      "bpm = 72\n"
      "class_mix = N:0.8, L:0.05, R:0.05, A:0.05, V:0.05\n"
      "noise_std = 0.01\n"
      "seed = 42   # trailing\n";
  auto p = parse_profile(text);
  EXPECT_DOUBLE_EQ(p.bpm, 72.0);
  EXPECT_DOUBLE_EQ(p.class_mix[0], 0.8);
  EXPECT_DOUBLE_EQ(p.class_mix[4], 0.05);
  EXPECT_EQ(p.seed, 42u);
  auto q = parse_profile(format_profile(p));
  EXPECT_EQ(q.bpm, p.bpm);
  EXPECT_EQ(q.class_mix, p.class_mix);
  EXPECT_EQ(q.noise_std, p.noise_std);
  EXPECT_EQ(q.seed, p.seed);
}

TEST(Profile, RejectsBadInput) {
  EXPECT_THROW(parse_profile("bpm 60\n"), Error);
  EXPECT_THROW(parse_profile("tempo = 60\n"), Error);
  EXPECT_THROW(parse_profile("bpm = fast\n"), Error);
  EXPECT_THROW(parse_profile("class_mix = X:1.0\n"), Error);
  EXPECT_THROW(parse_profile("class_mix = N:0.5\n"), Error);
}

TEST(Stream, ConstantZeroWindow) {
  SignalWindow w;
  w.fs_hz = 50.0;
  w.samples.assign(100, 0.0);
  StreamOptions o;
  o.calibration = {1.0, -64.0};  // 0 -> 0x40
  o.chunk_samples = 10;
  auto chunks = stream(w, o);
  ASSERT_EQ(chunks.size(), 10u);
  for (const auto& c : chunks) {
    ASSERT_EQ(c.bytes.size(), 11u);
    EXPECT_EQ(c.bytes[0], 0xF8);
    for (std::size_t i = 1; i < c.bytes.size(); ++i) EXPECT_EQ(c.bytes[i], 0x40);
  }
}

TEST(Stream, QuantizationOverflow) {
  SignalWindow w;
  w.fs_hz = 50.0;
  w.samples = {0.0, 300.0};
  try {
    stream(w, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::QuantizationOverflow);
  }
  w.samples = {-1.0};
  EXPECT_THROW(stream(w, {}), Error);
  w.samples = {247.4};
  EXPECT_NO_THROW(stream(w, {}));
}

TEST(Stream, RoundTripEqualsQuantizedSamples) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto p = mixed(seed);
    p.noise_std = 0.02;
    auto w = synth(p, 12.0, seed % 2 ? 50.0 : 360.0);
    StreamOptions o;
    o.calibration = kSyntheticCalibration;
    o.chunk_samples = 1 + seed * 7;
    Bytes all;
    for (const auto& c : stream(w, o)) all.insert(all.end(), c.bytes.begin(), c.bytes.end());
    std::vector<std::uint8_t> decoded;
    for (const auto& e : wire::decode_all(all)) {
      if (e.kind == wire::FrameEvent::Kind::WaveSamples) {
        decoded.insert(decoded.end(), e.samples.begin(), e.samples.end());
      }
    }
    const auto q = quantize(w.samples, o.calibration);
    EXPECT_EQ(decoded, q);
    const auto back = dequantize(decoded, o.calibration);
    EXPECT_EQ(quantize(back, o.calibration), q);
  }
}

TEST(Stream, PulseNearSixtyAfterWarmup) {
  auto p = only(ClassLabel::N);
  p.rr_jitter = 0.02;
  auto w = synth(p, 30.0, 50.0);
  StreamOptions o;
  o.calibration = kSyntheticCalibration;
  int pulses = 0;
  for (const auto& c : stream(w, o)) {
    if (c.kind != ChunkKind::Pulse) continue;
    ++pulses;
    ASSERT_EQ(c.bytes.size(), 2u);
    EXPECT_EQ(c.bytes[0], 0xFA);
    if (c.stamp_s >= 6.0) EXPECT_NEAR(c.bytes[1], 60, 2);
  }
  EXPECT_GE(pulses, 25);
}

TEST(Stream, LeadOffFaultAtTwoSeconds) {
  auto w = synth(only(ClassLabel::N), 10.0, 50.0);
  StreamOptions o;
  o.calibration = kSyntheticCalibration;
  o.faults = {{2.0, 1.0}};
  const auto chunks = stream(w, o);
  Bytes all;
  std::size_t lead_off_at = 0;
  std::size_t samples_before = 0;
  bool seen = false;
  for (const auto& c : chunks) {
    if (c.kind == ChunkKind::LeadOff) {
      lead_off_at = all.size();
      seen = true;
    }
    if (!seen && c.kind == ChunkKind::Wave) samples_before += c.bytes.size() - 1;
    all.insert(all.end(), c.bytes.begin(), c.bytes.end());
  }
  int pairs = 0;
  for (std::size_t i = 0; i + 1 < all.size(); ++i) {
    if (all[i] == 0xFB && all[i + 1] == 0x11) ++pairs;
  }
  EXPECT_EQ(pairs, 1);
  EXPECT_EQ(all[lead_off_at], 0xFB);
  EXPECT_EQ(samples_before, 100u);
  const auto events = wire::decode_all(all);
  EXPECT_EQ(wire::sample_count(events), 500u - 50u);
}

TEST(Stream, SplitAtMarkersKeepsChunksSelfContained) {
  Bytes raw = {0xF8, 1, 2, 3, 0xFA, 0xF9, 0xF8, 4, 5, 0xFB, 0x11, 0xF8, 6, 0xFA, 0xFB};
  for (std::size_t target = 1; target < 20; ++target) {
    auto parts = split_at_markers(raw, target);
    Bytes joined;
    std::vector<wire::FrameEvent> piecewise;
    for (const auto& p : parts) {
      joined.insert(joined.end(), p.begin(), p.end());
      auto ev = wire::decode_all(p);
      piecewise.insert(piecewise.end(), ev.begin(), ev.end());
    }
    EXPECT_EQ(joined, raw);
    EXPECT_EQ(piecewise, wire::decode_all(raw)) << "target " << target;
  }
}

TEST(Stream, ReplayScheduleTimesBySamples) {
  Bytes raw;
  for (int k = 0; k < 10; ++k) wire::encode_into(wire::FrameEvent::wave(std::vector<std::uint8_t>(5, 7)), raw);
  auto sched = replay_schedule(raw, 50.0, 6);
  ASSERT_EQ(sched.size(), 10u);
  EXPECT_DOUBLE_EQ(sched.back().emit_s, 1.0);
  EXPECT_DOUBLE_EQ(sched[1].stamp_s, 0.1);
}
