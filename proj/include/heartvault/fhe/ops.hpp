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

#include "heartvault/dsp/analysis.hpp"
#include "heartvault/fhe/backend.hpp"

namespace hv::fhe {

/// Sliding sum by binary decomposition: slot i receives
///   sum_{j<width} x[i + j]   (forward)
///   sum_{j<width} x[i - j]   (causal)
/// with indices taken cyclically over the slots.
CipherVector window_sum(const HeBackend& be, const CipherVector& ct, std::size_t width, bool causal);

/// Slot 0 holds sum_{i<n} x_i. Throws BadRequest unless 1 <= n <= logical_len.
CipherVector he_sum(const HeBackend& be, const CipherVector& ct, std::size_t n);

struct MeanVar {
  CipherVector mean;
  CipherVector variance;  // population
};

/// mean = T / n, variance = (n Q - T^2) / n^2 with T = sum x, Q = sum x^2,
/// both divisions by scale reinterpretation. Result in slot 0; one level.
MeanVar he_mean_var(const HeBackend& be, const CipherVector& ct, std::size_t n);

/// Causal FIR in slots, y[i] = sum_j taps[j] x[i - j], matching dsp::fir on
/// the first logical_len slots. Needs extent + taps - 1 <= slot_count.
/// Uniform taps reduce to a window sum and cost no level; otherwise one pt level.
CipherVector he_linear_filter(const HeBackend& be, const CipherVector& ct, std::span<const double> taps);

/// Slotwise square, one level.
CipherVector he_square(const HeBackend& be, const CipherVector& ct);

/// One probe frequency. Slot 0 decrypts to C - iS with C = sum x_j cos(2 pi f j / fs)
/// and S = sum x_j sin(2 pi f j / fs): both projections in one ciphertext.
struct DftProjection {
  double freq_hz;
  CipherVector ct;
};

/// Throws BadRequest for a frequency above fs/2 or outside the window.
std::vector<DftProjection> he_dft(const HeBackend& be, const CipherVector& ct, std::span<const double> freqs,
                                  double fs_hz, std::size_t n);

/// Client side: (cos projection, sin projection) from a decrypted slot 0.
std::pair<double, double> dft_components(const HeBackend& be, const DftProjection& p);

/// Full DFT bins k = 0 .. n/2 as a matrix-vector product (baby-step giant-step
/// diagonals). Slot k decrypts to the complex bin value; one pt level.
CipherVector he_spectrum(const HeBackend& be, const CipherVector& ct, std::size_t n);

/// Encrypted Pan-Tompkins front end: subtract x[0], bandpass + derivative as
/// one FIR, square, moving-window integration. Windows longer than
/// slot_count - guard are processed as overlapping chunks that carry their
/// filter history in the top slots.
struct EncryptedFrontEnd {
  std::size_t n = 0;
  std::size_t chunk_len = 0;
  std::vector<CipherVector> chunks;  // chunk k covers samples [k * chunk_len, ...)
};

/// Slots the filter history needs: taps + integration width - 2.
std::size_t front_end_guard(const dsp::PanTompkinsStages& stages);

EncryptedFrontEnd he_integrated_waveform(const HeBackend& be, const CipherVector& ct, std::size_t n,
                                         const dsp::PanTompkinsStages& stages);

/// Client side: decrypts and concatenates the chunks.
std::vector<double> decrypt_integrated(const HeBackend& be, const EncryptedFrontEnd& fe);

}  // namespace hv::fhe
