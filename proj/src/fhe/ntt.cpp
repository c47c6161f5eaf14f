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

#include "heartvault/fhe/ntt.hpp"

#include <stdexcept>

namespace hv::fhe {

namespace {

std::size_t bit_reverse(std::size_t x, int bits) {
  std::size_t r = 0;
  for (int i = 0; i < bits; ++i) {
    r = (r << 1) | (x & 1);
    x >>= 1;
  }
  return r;
}

}  // namespace

NttTables::NttTables(std::size_t n, const Modulus& q) : n_(n), q_(q) {
  if (n < 2 || (n & (n - 1)) != 0) throw std::invalid_argument("ntt size must be a power of two");
  const int log_n = __builtin_ctzll(n);
  const u64 p = q.value();
  const u64 psi = primitive_root_of_unity(q, 2 * n);
  const u64 psi_inv = q.inv(psi);
  psi_rev_.resize(n);
  psi_inv_rev_.resize(n);
  psi_rev_shoup_.resize(n);
  psi_inv_rev_shoup_.resize(n);
  u64 pw = 1, pw_inv = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = bit_reverse(i, log_n);
    psi_rev_[r] = pw;
    psi_inv_rev_[r] = pw_inv;
    pw = q.mul(pw, psi);
    pw_inv = q.mul(pw_inv, psi_inv);
  }
  for (std::size_t i = 0; i < n; ++i) {
    psi_rev_shoup_[i] = shoup_precompute(psi_rev_[i], p);
    psi_inv_rev_shoup_[i] = shoup_precompute(psi_inv_rev_[i], p);
  }
  n_inv_ = q.inv(n % p);
  n_inv_shoup_ = shoup_precompute(n_inv_, p);
}

// Cooley-Tukey with Harvey's lazy reduction: values stay below 4q in flight.
void NttTables::forward(u64* a) const {
  const u64 q = q_.value();
  const u64 two_q = 2 * q;
  std::size_t t = n_;
  for (std::size_t m = 1; m < n_; m <<= 1) {
    t >>= 1;
    for (std::size_t i = 0; i < m; ++i) {
      const u64 w = psi_rev_[m + i];
      const u64 ws = psi_rev_shoup_[m + i];
      u64* x = a + 2 * i * t;
      u64* y = x + t;
      for (std::size_t j = 0; j < t; ++j) {
        u64 u = x[j];
        if (u >= two_q) u -= two_q;
        const u64 v = shoup_mul_lazy(y[j], w, ws, q);
        x[j] = u + v;
        y[j] = u + two_q - v;
      }
    }
  }
  for (std::size_t i = 0; i < n_; ++i) {
    u64 v = a[i];
    if (v >= two_q) v -= two_q;
    if (v >= q) v -= q;
    a[i] = v;
  }
}

// Gentleman-Sande, inputs and intermediates below 2q.
void NttTables::inverse(u64* a) const {
  const u64 q = q_.value();
  const u64 two_q = 2 * q;
  std::size_t t = 1;
  for (std::size_t m = n_; m > 1; m >>= 1) {
    const std::size_t h = m >> 1;
    for (std::size_t i = 0; i < h; ++i) {
      const u64 w = psi_inv_rev_[h + i];
      const u64 ws = psi_inv_rev_shoup_[h + i];
      u64* x = a + 2 * i * t;
      u64* y = x + t;
      for (std::size_t j = 0; j < t; ++j) {
        const u64 u = x[j];
        const u64 v = y[j];
        u64 s = u + v;
        if (s >= two_q) s -= two_q;
        x[j] = s;
        y[j] = shoup_mul_lazy(u + two_q - v, w, ws, q);
      }
    }
    t <<= 1;
  }
  for (std::size_t i = 0; i < n_; ++i) a[i] = shoup_mul(a[i], n_inv_, n_inv_shoup_, q);
}

}  // namespace hv::fhe
