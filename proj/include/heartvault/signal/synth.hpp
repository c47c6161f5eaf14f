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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "heartvault/classifier/label.hpp"

namespace hv::signal {

struct SignalWindow {
  std::vector<double> samples;
  double fs_hz = 0.0;
  std::int64_t t0_ms = 0;
  std::optional<std::vector<std::size_t>> truth_peaks;
  std::optional<std::vector<ClassLabel>> truth_labels;

  double duration_s() const { return static_cast<double>(samples.size()) / fs_hz; }
};

/// Checks the window invariants (fs > 0, peaks strictly increasing and in
/// range, labels aligned with peaks). Throws InvalidProfile on violation.
void validate(const SignalWindow& window);

struct SynthProfile {
  double bpm = 60.0;
  std::array<double, kNumClasses> class_mix{1.0, 0.0, 0.0, 0.0, 0.0};  // indexed by ClassLabel
  double noise_std = 0.0;
  double baseline_wander_hz = 0.0;
  double baseline_wander_amplitude = 0.1;
  double rr_jitter = 0.0;  // uniform fraction of RR, at most 0.02
  std::uint64_t seed = 1;
};

/// Throws InvalidProfile unless bpm is in [20, 300], class_mix is a
/// probability vector (sum 1 +- 1e-9) and rr_jitter is in [0, 0.02].
void validate(const SynthProfile& profile);

/// One Gaussian bump of a beat template, times relative to the R peak.
struct Bump {
  double offset_s;
  double amplitude;
  double sigma_s;
};

/// P-QRS-T template for a class. Templates differ in QRS width, R amplitude
/// and P-wave presence/polarity:
///   N  narrow QRS (sigma 10 ms), R 1.0, upright P, upright T
///   L  wide notched QRS (16 ms + early notch), R 0.85, upright P, inverted T
///   R  narrow R then S and a late R' (rSR'), R 0.8, upright P
///   A  narrow QRS, R 0.9, early inverted P (-140 ms)
///   V  very wide QRS (30 ms), R 1.3, no P, deep inverted T
const std::vector<Bump>& beat_template(ClassLabel label);

/// Template value at `t_s` seconds from the nominal R position.
double template_value(ClassLabel label, double t_s);

/// Offset in samples from the nominal R position to the sampled template's
/// maximum; synthesis shifts each beat by this amount so the truth index is
/// the beat's argmax.
int template_argmax_offset(ClassLabel label, double fs_hz);

/// Renders one beat per RR interval. The first R sits at half an RR; beats are
/// added while their template (up to 0.4 s after R) fits in the window.
SignalWindow synth(const SynthProfile& profile, double duration_s, double fs_hz,
                   std::int64_t t0_ms = 0);

/// Key-value profile file:
///   bpm = 60
///   class_mix = N:0.8, L:0.05, R:0.05, A:0.05, V:0.05
///   noise_std = 0.0
///   baseline_wander_hz = 0.0
///   baseline_wander_amplitude = 0.1
///   rr_jitter = 0.0
///   seed = 42
/// Blank lines and '#' comments are ignored; omitted keys keep defaults.
SynthProfile parse_profile(const std::string& text);
SynthProfile load_profile(const std::filesystem::path& path);
std::string format_profile(const SynthProfile& profile);

/// Deterministic 64-bit generator (splitmix64) with uniform and normal draws;
/// identical sequences on every platform.
class SplitMix {
 public:
  explicit SplitMix(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform();  // [0, 1)
  double normal();
  std::size_t below(std::size_t n);

 private:
  std::uint64_t state_;
  std::optional<double> spare_;
};

}  // namespace hv::signal
