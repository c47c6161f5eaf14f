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

#include "heartvault/fhe/ops.hpp"

#include <cmath>
#include <numbers>
#include <optional>

#include "heartvault/common/error.hpp"

namespace hv::fhe {

namespace {

using cplx = std::complex<double>;

std::size_t pow2_at_least_sqrt(std::size_t m) {
  std::size_t g = 1;
  while (g * g < m) g <<= 1;
  return g;
}

// BSGS causal FIR without support checks: y[i] = sum_j taps[j] x[i - j].
CipherVector filter_raw(const HeBackend& be, const CipherVector& ct, std::span<const double> taps) {
  const std::size_t m = taps.size();
  const std::size_t g = std::min(pow2_at_least_sqrt(m), m);
  const std::size_t giants = (m + g - 1) / g;
  std::vector<CipherVector> babies{ct};
  for (std::size_t b = 1; b < g; ++b) babies.push_back(be.rotate(babies.back(), -1));
  auto inner = [&](std::size_t k) {
    const std::size_t len = std::min(g, m - g * k);
    return be.dot_scalar(std::span(babies).first(len), taps.subspan(g * k, len));
  };
  CipherVector acc = inner(giants - 1);
  for (std::size_t k = giants - 1; k-- > 0;) {
    acc = be.add(inner(k), be.rotate(acc, -static_cast<long>(g)));
  }
  return acc;
}

void check_length(const CipherVector& ct, std::size_t n) {
  if (n == 0 || n > ct.logical_len) {
    throw Error(ErrorCode::BadRequest, "length " + std::to_string(n) + " outside the ciphertext's logical length");
  }
}

}  // namespace

CipherVector window_sum(const HeBackend& be, const CipherVector& ct, std::size_t width, bool causal) {
  if (width == 0) throw Error(ErrorCode::BadRequest, "window width must be positive");
  if (width > be.slots()) throw Error(ErrorCode::BadRequest, "window wider than the slot count");
  const long dir = causal ? -1 : 1;
  // blocks[k] sums 2^k consecutive slots.
  std::vector<CipherVector> blocks{ct};
  int top = 0;
  while ((std::size_t{2} << top) <= width) {
    const CipherVector& b = blocks.back();
    blocks.push_back(be.add(b, be.rotate(b, dir * (1L << top))));
    ++top;
  }
  // Horner over the set bits, highest first.
  CipherVector acc = blocks[static_cast<std::size_t>(top)];
  for (int k = top - 1; k >= 0; --k) {
    if ((width >> k) & 1) acc = be.add(blocks[static_cast<std::size_t>(k)], be.rotate(acc, dir * (1L << k)));
  }
  return acc;
}

CipherVector he_sum(const HeBackend& be, const CipherVector& ct, std::size_t n) {
  check_length(ct, n);
  CipherVector out = n == 1 ? ct : window_sum(be, ct, n, false);
  out.logical_len = 1;
  return out;
}

MeanVar he_mean_var(const HeBackend& be, const CipherVector& ct, std::size_t n) {
  check_length(ct, n);
  if (ct.level < 1) throw Error(ErrorCode::LevelExhausted, "variance needs one ciphertext multiplication");
  const double dn = static_cast<double>(n);
  const CipherVector total = he_sum(be, ct, n);
  CipherVector squares = be.mul(ct, ct);
  const CipherVector q = he_sum(be, squares, n);
  const CipherVector t2 = be.mul(total, total);
  MeanVar out{be.divide_exact(total, dn),
              be.divide_exact(be.sub(be.mul_integer(q, static_cast<std::int64_t>(n)), t2), dn * dn)};
  out.mean.logical_len = 1;
  out.variance.logical_len = 1;
  return out;
}

CipherVector he_linear_filter(const HeBackend& be, const CipherVector& ct, std::span<const double> taps) {
  if (taps.empty()) throw Error(ErrorCode::BadRequest, "filter needs at least one tap");
  const std::size_t m = taps.size();
  if (ct.extent + m - 1 > be.slots()) {
    throw Error(ErrorCode::UnsupportedParams, "window plus filter length exceeds the slot count");
  }
  bool uniform = true;
  for (double t : taps) uniform = uniform && t == taps[0];
  CipherVector out;
  if (uniform && taps[0] == 0.0) {
    out = be.mul_integer(ct, 0);
  } else if (uniform) {
    out = be.divide_exact(window_sum(be, ct, m, true), 1.0 / taps[0]);
  } else {
    out = filter_raw(be, ct, taps);
  }
  out.logical_len = ct.logical_len;
  out.extent = static_cast<std::uint32_t>(std::min<std::size_t>(be.slots(), ct.extent + m - 1));
  return out;
}

CipherVector he_square(const HeBackend& be, const CipherVector& ct) { return be.mul(ct, ct); }

std::vector<DftProjection> he_dft(const HeBackend& be, const CipherVector& ct, std::span<const double> freqs,
                                  double fs_hz, std::size_t n) {
  check_length(ct, n);
  if (!(fs_hz > 0.0)) throw Error(ErrorCode::BadRequest, "sampling rate must be positive");
  std::vector<DftProjection> out;
  for (double f : freqs) {
    if (!(f >= 0.0) || f > fs_hz / 2.0) {
      throw Error(ErrorCode::BadRequest, "probe frequency must lie in [0, fs/2]");
    }
    std::vector<cplx> w(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double th = 2.0 * std::numbers::pi * f * static_cast<double>(j) / fs_hz;
      w[j] = {std::cos(th), -std::sin(th)};
    }
    out.push_back({f, he_sum(be, be.mul_plain(ct, w), n)});
  }
  return out;
}

std::pair<double, double> dft_components(const HeBackend& be, const DftProjection& p) {
  const auto z = be.decrypt_complex(p.ct);
  return {z[0].real(), -z[0].imag()};
}

CipherVector he_spectrum(const HeBackend& be, const CipherVector& ct, std::size_t n) {
  check_length(ct, n);
  if (n < 2) throw Error(ErrorCode::BadRequest, "spectrum needs at least two samples");
  const std::size_t slots = be.slots();
  const std::size_t bins = n / 2 + 1;
  const std::size_t g = pow2_at_least_sqrt(slots);
  const std::size_t giants = slots / g;
  std::vector<cplx> twiddle(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double th = 2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(n);
    twiddle[t] = {std::cos(th), -std::sin(th)};
  }
  // Row i, diagonal d holds M[i][(i + d) mod S], M[k][j] = exp(-2 pi i k j / n).
  auto diag_value = [&](std::size_t i, std::size_t d) -> cplx {
    if (i >= bins) return {0.0, 0.0};
    const std::size_t j = (i + d) % slots;
    if (j >= n) return {0.0, 0.0};
    return twiddle[(i * j) % n];
  };
  // Diagonal d is non-zero iff d = j - i (mod S) for some i < bins, j < n.
  auto diag_used = [&](std::size_t d) {
    const long s = static_cast<long>(slots);
    for (long off : {static_cast<long>(d), static_cast<long>(d) - s}) {
      if (off > -static_cast<long>(bins) && off < static_cast<long>(n)) return true;
    }
    return false;
  };
  std::vector<std::optional<CipherVector>> babies(g);
  // Baby b is ct rotated left by b, built incrementally.
  auto baby = [&](std::size_t b) -> const CipherVector& {
    for (std::size_t e = 0; e <= b; ++e) {
      if (!babies[e]) babies[e] = e == 0 ? ct : be.rotate(*babies[e - 1], 1);
    }
    return *babies[b];
  };
  std::optional<CipherVector> acc;
  std::size_t acc_k = 0;
  for (std::size_t k = giants; k-- > 0;) {
    std::vector<CipherVector> cts;
    std::vector<std::vector<cplx>> pts;
    for (std::size_t b = 0; b < g; ++b) {
      const std::size_t d = g * k + b;
      if (!diag_used(d)) continue;
      std::vector<cplx> v(slots);
      const std::size_t shift = g * k;
      for (std::size_t i = 0; i < slots; ++i) v[i] = diag_value((i + slots - shift) % slots, d);
      cts.push_back(baby(b));
      pts.push_back(std::move(v));
    }
    if (cts.empty()) continue;
    CipherVector inner = be.dot_plain(cts, pts);
    if (acc) {
      inner = be.add(inner, be.rotate(*acc, static_cast<long>(g * (acc_k - k))));
    }
    acc = std::move(inner);
    acc_k = k;
  }
  CipherVector out = acc_k == 0 ? *acc : be.rotate(*acc, static_cast<long>(g * acc_k));
  out.logical_len = static_cast<std::uint32_t>(bins);
  out.extent = static_cast<std::uint32_t>(bins);
  return out;
}

std::size_t front_end_guard(const dsp::PanTompkinsStages& stages) {
  return dsp::front_end_taps(stages).size() + stages.integration_width - 2;
}

EncryptedFrontEnd he_integrated_waveform(const HeBackend& be, const CipherVector& ct, std::size_t n,
                                         const dsp::PanTompkinsStages& stages) {
  check_length(ct, n);
  const std::size_t slots = be.slots();
  const auto taps = dsp::front_end_taps(stages);
  const std::size_t w = stages.integration_width;
  const std::size_t guard = taps.size() + w - 2;
  if (guard >= slots) throw Error(ErrorCode::UnsupportedParams, "slot count too small for the filter history");
  const std::size_t chunk = slots - guard;

  // Broadcast x[0] over slots [0, n) and subtract it.
  const std::vector<cplx> e0{1.0};
  const CipherVector first = be.mul_plain(ct, e0);
  const CipherVector centered = be.sub(ct, window_sum(be, first, n, true));

  EncryptedFrontEnd fe;
  fe.n = n;
  fe.chunk_len = chunk;
  const std::size_t count = (n + chunk - 1) / chunk;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t lo = k * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    CipherVector z = centered;
    if (count > 1 || centered.extent > n) {
      std::vector<cplx> mask(hi, 0.0);
      for (std::size_t i = lo >= guard ? lo - guard : 0; i < hi; ++i) mask[i] = 1.0;
      z = be.mul_plain(centered, mask);
      if (lo > 0) z = be.rotate(z, static_cast<long>(lo));
    }
    const CipherVector filtered = filter_raw(be, z, taps);
    const CipherVector energy = be.mul(filtered, filtered);
    CipherVector integrated = be.divide_exact(window_sum(be, energy, w, true), static_cast<double>(w));
    integrated.logical_len = static_cast<std::uint32_t>(hi - lo);
    fe.chunks.push_back(std::move(integrated));
  }
  return fe;
}

std::vector<double> decrypt_integrated(const HeBackend& be, const EncryptedFrontEnd& fe) {
  std::vector<double> out;
  out.reserve(fe.n);
  for (const auto& c : fe.chunks) {
    const auto v = be.decrypt(c);
    out.insert(out.end(), v.begin(), v.end());
  }
  out.resize(std::min(out.size(), fe.n));
  return out;
}

}  // namespace hv::fhe
