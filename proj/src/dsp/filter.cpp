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

#include "heartvault/dsp/filter.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "heartvault/common/error.hpp"

namespace hv::dsp {

namespace {

using Complex = std::complex<double>;

std::vector<Complex> poly_from_roots(const std::vector<Complex>& roots) {
  std::vector<Complex> p{1.0};
  for (const auto& r : roots) {
    std::vector<Complex> next(p.size() + 1, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
      next[i] += p[i];
      next[i + 1] -= r * p[i];
    }
    p = std::move(next);
  }
  return p;
}

std::vector<double> real_part(const std::vector<Complex>& p, double gain) {
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = gain * p[i].real();
  return out;
}

// Solves A x = rhs in place with partial pivoting; A is row-major n x n.
std::vector<double> solve(std::vector<double> A, std::vector<double> rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(A[r * n + col]) > std::abs(A[pivot * n + col])) pivot = r;
    }
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(A[col * n + c], A[pivot * n + c]);
      std::swap(rhs[col], rhs[pivot]);
    }
    const double d = A[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = A[r * n + col] / d;
      for (std::size_t c = col; c < n; ++c) A[r * n + c] -= f * A[col * n + c];
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = rhs[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= A[i * n + c] * x[c];
    x[i] = s / A[i * n + i];
  }
  return x;
}

}  // namespace

FilterCoefficients design_bandpass(const FilterSpec& spec) {
  if (spec.order < 1) throw Error(ErrorCode::InvalidFilterSpec, "order must be positive");
  if (!(spec.fs_hz > 0.0) || !(spec.lowcut_hz > 0.0) || !(spec.lowcut_hz < spec.highcut_hz) ||
      !(spec.highcut_hz < spec.nyquist())) {
    throw Error(ErrorCode::InvalidFilterSpec,
                "need 0 < lowcut < highcut < fs/2, got lowcut=" + std::to_string(spec.lowcut_hz) +
                    " highcut=" + std::to_string(spec.highcut_hz) +
                    " fs=" + std::to_string(spec.fs_hz));
  }
  const int n = spec.order;
  const double pi = std::numbers::pi;

  // Analog Butterworth lowpass prototype, unit cutoff.
  std::vector<Complex> proto;
  for (int k = 0; k < n; ++k) {
    proto.push_back(std::exp(Complex(0.0, pi * (2.0 * k + n + 1) / (2.0 * n))));
  }

  // Pre-warp the normalized band edges (design sample rate 2).
  const double design_fs = 2.0;
  const double wl = 2.0 * design_fs * std::tan(pi * spec.normalized_low() / design_fs);
  const double wh = 2.0 * design_fs * std::tan(pi * spec.normalized_high() / design_fs);
  const double bw = wh - wl;
  const double w0 = std::sqrt(wl * wh);

  // Lowpass -> bandpass: each prototype pole splits in two, n zeros at s = 0.
  std::vector<Complex> poles;
  for (const auto& p : proto) {
    const Complex lp = p * bw / 2.0;
    const Complex root = std::sqrt(lp * lp - w0 * w0);
    poles.push_back(lp + root);
    poles.push_back(lp - root);
  }
  double gain = std::pow(bw, n);

  // Bilinear transform.
  const double fs2 = 2.0 * design_fs;
  std::vector<Complex> zpoles;
  Complex denom_prod = 1.0;
  for (const auto& p : poles) {
    zpoles.push_back((fs2 + p) / (fs2 - p));
    denom_prod *= (fs2 - p);
  }
  Complex num_prod = 1.0;
  for (int i = 0; i < n; ++i) num_prod *= fs2;  // zeros at s = 0
  gain *= (num_prod / denom_prod).real();

  std::vector<Complex> zzeros;
  for (int i = 0; i < n; ++i) zzeros.emplace_back(1.0, 0.0);
  for (int i = 0; i < n; ++i) zzeros.emplace_back(-1.0, 0.0);

  FilterCoefficients c;
  c.b = real_part(poly_from_roots(zzeros), gain);
  c.a = real_part(poly_from_roots(zpoles), 1.0);

  if (!is_stable(c.a)) {
    throw Error(ErrorCode::UnstableDesign,
                "denominator roots drifted outside the unit circle for order " + std::to_string(n));
  }
  return c;
}

bool is_stable(std::span<const double> a) {
  if (a.empty() || a[0] == 0.0) return false;
  std::vector<double> p(a.begin(), a.end());
  for (auto& v : p) v /= a[0];
  while (p.size() > 1) {
    const std::size_t m = p.size() - 1;
    const double k = p[m];
    if (!(std::abs(k) < 1.0)) return false;
    const double scale = 1.0 - k * k;
    std::vector<double> next(m);
    for (std::size_t i = 0; i < m; ++i) next[i] = (p[i] - k * p[m - i]) / scale;
    p = std::move(next);
  }
  return true;
}

std::vector<double> lfilter(const FilterCoefficients& c, std::span<const double> x,
                            std::span<const double> zi) {
  const std::size_t order = std::max(c.a.size(), c.b.size());
  std::vector<double> b(c.b), a(c.a);
  b.resize(order, 0.0);
  a.resize(order, 0.0);
  const double a0 = a[0];
  for (auto& v : b) v /= a0;
  for (auto& v : a) v /= a0;

  std::vector<double> z(order - 1, 0.0);
  if (!zi.empty()) std::copy_n(zi.begin(), std::min(zi.size(), z.size()), z.begin());

  std::vector<double> y(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double out = b[0] * x[n] + (z.empty() ? 0.0 : z[0]);
    for (std::size_t i = 0; i + 1 < z.size(); ++i) z[i] = z[i + 1] + b[i + 1] * x[n] - a[i + 1] * out;
    if (!z.empty()) z.back() = b[order - 1] * x[n] - a[order - 1] * out;
    y[n] = out;
  }
  return y;
}

std::vector<double> lfilter_zi(const FilterCoefficients& c) {
  const std::size_t order = std::max(c.a.size(), c.b.size());
  std::vector<double> b(c.b), a(c.a);
  b.resize(order, 0.0);
  a.resize(order, 0.0);
  for (auto& v : b) v /= a[0];
  const double a0 = a[0];
  for (auto& v : a) v /= a0;

  const std::size_t n = order - 1;
  if (n == 0) return {};
  // (I - companion(a)^T) zi = b[1:] - a[1:] * b[0]
  std::vector<double> M(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) M[i * n + i] = 1.0;
  for (std::size_t i = 0; i < n; ++i) M[i * n + 0] += a[i + 1];
  for (std::size_t i = 0; i + 1 < n; ++i) M[i * n + i + 1] -= 1.0;
  std::vector<double> rhs(n);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = b[i + 1] - a[i + 1] * b[0];
  return solve(std::move(M), std::move(rhs));
}

std::size_t filtfilt_padlen(const FilterCoefficients& c) {
  return 3 * (std::max(c.a.size(), c.b.size()) - 1);
}

std::vector<double> filtfilt(const FilterCoefficients& c, std::span<const double> x) {
  const std::size_t pad = filtfilt_padlen(c);
  if (x.size() <= pad) {
    throw Error(ErrorCode::InputTooShort, "filtfilt needs more than " + std::to_string(pad) +
                                              " samples, got " + std::to_string(x.size()));
  }
  const std::size_t n = x.size();
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  const auto zi = lfilter_zi(c);
  auto scaled = [&](double v) {
    std::vector<double> z(zi);
    for (auto& e : z) e *= v;
    return z;
  };

  auto forward = lfilter(c, ext, scaled(ext.front()));
  std::reverse(forward.begin(), forward.end());
  auto backward = lfilter(c, forward, scaled(forward.front()));
  std::reverse(backward.begin(), backward.end());
  return {backward.begin() + static_cast<std::ptrdiff_t>(pad),
          backward.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

double magnitude_response(const FilterCoefficients& c, double freq_hz, double fs_hz) {
  const Complex z = std::exp(Complex(0.0, -2.0 * std::numbers::pi * freq_hz / fs_hz));
  Complex num = 0.0, den = 0.0, zk = 1.0;
  for (std::size_t k = 0; k < std::max(c.a.size(), c.b.size()); ++k) {
    if (k < c.b.size()) num += c.b[k] * zk;
    if (k < c.a.size()) den += c.a[k] * zk;
    zk *= z;
  }
  return std::abs(num / den);
}

std::vector<double> fir(std::span<const double> taps, std::span<const double> x) {
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double acc = 0.0;
    const std::size_t jmax = std::min(taps.size(), i + 1);
    for (std::size_t j = 0; j < jmax; ++j) acc += taps[j] * x[i - j];
    y[i] = acc;
  }
  return y;
}

}  // namespace hv::dsp
