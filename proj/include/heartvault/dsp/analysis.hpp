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

#include <cstddef>
#include <span>
#include <vector>

#include "heartvault/dsp/filter.hpp"

namespace hv::dsp {

struct StatsReport {
  double mean = 0.0;
  double std = 0.0;  // population (divisor N)
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct HrvReport {
  std::vector<double> rr_intervals;  // seconds
  double mean_rr = 0.0;
  double std_rr = 0.0;  // population
};

/// Throws EmptyInput for an empty vector. Median of an even-length input is
/// the average of the two middle values.
StatsReport basic_stats(std::span<const double> x);

/// Population variance, the quantity the encrypted path reproduces.
double population_variance(std::span<const double> x);

/// DFT magnitude at every bin k = 0 .. n/2 (bin k sits at k * fs / n).
std::vector<double> dft_magnitudes(std::span<const double> x);

/// The k bins (DC excluded) with the largest DFT magnitude, returned as
/// frequencies in ascending order. Ties go to the lower frequency.
std::vector<double> dominant_frequencies(std::span<const double> x, double fs_hz, std::size_t k);

/// Same ranking applied to a precomputed magnitude spectrum (index = bin).
std::vector<double> rank_bins(std::span<const double> magnitudes, std::size_t n_samples,
                              double fs_hz, std::size_t k);

/// RR intervals in seconds plus their mean and population std.
HrvReport hrv(std::span<const std::size_t> peaks, double fs_hz);

// ---------------------------------------------------------------------------
// Pan-Tompkins. The integrated waveform is produced by linear stages plus one
// squaring, so the same function can be evaluated on encrypted slots; peak
// picking works on the integrated waveform and the raw signal.

struct PanTompkinsStages {
  double fs_hz = 0.0;
  FilterCoefficients bandpass;        // order-2 Butterworth, 5-15 Hz
  std::vector<double> derivative;     // causal five-point kernel
  std::size_t integration_width = 0;  // round(0.150 * fs)
  std::size_t refractory = 0;         // samples, 200 ms
  std::size_t lookback = 0;           // samples searched before an integrated peak
};

PanTompkinsStages pan_tompkins_stages(double fs_hz);

/// Truncated impulse response of the causal bandpass, cut where the tail falls
/// below `rel_tol` of the peak response.
std::vector<double> bandpass_impulse(const PanTompkinsStages& stages, double rel_tol = 1e-9);

/// Bandpass and derivative merged into one FIR: conv(impulse, derivative).
std::vector<double> front_end_taps(const PanTompkinsStages& stages, double rel_tol = 1e-9);

/// Linear + squaring stages: subtract x[0], causal bandpass, derivative,
/// square, moving-window average. Output length equals input length.
std::vector<double> integrated_waveform(std::span<const double> x, const PanTompkinsStages& stages);

/// Adaptive dual-threshold picking on an integrated waveform. Returned indices
/// refer to the raw signal `x` (argmax inside a lookback window) and are
/// strictly increasing with spacing >= refractory.
std::vector<std::size_t> pick_peaks(std::span<const double> integrated, std::span<const double> x,
                                    const PanTompkinsStages& stages);

/// Full detector. Throws InputTooShort below 2 s of data.
std::vector<std::size_t> pan_tompkins(std::span<const double> x, double fs_hz);

}  // namespace hv::dsp
