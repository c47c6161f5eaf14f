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

#include <span>
#include <vector>

namespace hv::dsp {

struct FilterSpec {
  int order = 2;
  double lowcut_hz = 5.0;
  double highcut_hz = 15.0;
  double fs_hz = 200.0;

  double nyquist() const { return 0.5 * fs_hz; }
  double normalized_low() const { return lowcut_hz / nyquist(); }
  double normalized_high() const { return highcut_hz / nyquist(); }
};

/// Transfer function b(z)/a(z) with a[0] == 1.
struct FilterCoefficients {
  std::vector<double> b;
  std::vector<double> a;
};

/// Digital Butterworth bandpass: analog prototype, pre-warped band edges,
/// lowpass-to-bandpass transform, bilinear map. Throws InvalidFilterSpec when
/// the band is not inside (0, Nyquist) and UnstableDesign when the expanded
/// denominator fails the Schur-Cohn stability test.
FilterCoefficients design_bandpass(const FilterSpec& spec);

/// Schur-Cohn step-down test: true iff every root of `a` is strictly inside
/// the unit circle.
bool is_stable(std::span<const double> a);

/// Direct form II transposed. `zi` (optional) holds the initial delay line.
std::vector<double> lfilter(const FilterCoefficients& c, std::span<const double> x,
                            std::span<const double> zi = {});

/// Steady-state delay line for a unit step input.
std::vector<double> lfilter_zi(const FilterCoefficients& c);

/// Edge padding used by filtfilt: 3 * (max(len(a), len(b)) - 1).
std::size_t filtfilt_padlen(const FilterCoefficients& c);

/// Zero-phase forward/backward filter with odd reflection and steady-state
/// initial conditions. Requires x.size() > filtfilt_padlen(c).
std::vector<double> filtfilt(const FilterCoefficients& c, std::span<const double> x);

/// Complex frequency response magnitude at `freq_hz`.
double magnitude_response(const FilterCoefficients& c, double freq_hz, double fs_hz);

/// Plain FIR convolution y[i] = sum_j taps[j] * x[i - j], zero history,
/// output length equal to input length.
std::vector<double> fir(std::span<const double> taps, std::span<const double> x);

}  // namespace hv::dsp
