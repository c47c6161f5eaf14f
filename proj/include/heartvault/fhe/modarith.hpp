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
#include <cstdint>
#include <vector>

namespace hv::fhe {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

/// Word-sized prime modulus (< 2^62) with a Barrett constant floor(2^128 / q).
class Modulus {
 public:
  Modulus() = default;
  explicit Modulus(u64 q);

  u64 value() const { return q_; }
  int bits() const;

  u64 reduce(u128 x) const;
  u64 reduce(u64 x) const { return x >= q_ ? x % q_ : x; }
  u64 mul(u64 a, u64 b) const { return reduce(static_cast<u128>(a) * b); }
  u64 add(u64 a, u64 b) const {
    const u64 s = a + b;
    return s >= q_ ? s - q_ : s;
  }
  u64 sub(u64 a, u64 b) const { return a >= b ? a - b : a + q_ - b; }
  u64 neg(u64 a) const { return a == 0 ? 0 : q_ - a; }
  u64 pow(u64 base, u64 exp) const;
  u64 inv(u64 a) const;  // q prime

  /// Signed integer to [0, q).
  u64 from_signed(std::int64_t v) const;
  /// [0, q) to (-q/2, q/2].
  std::int64_t centered(u64 v) const { return v > (q_ >> 1) ? static_cast<std::int64_t>(v) - static_cast<std::int64_t>(q_) : static_cast<std::int64_t>(v); }

 private:
  u64 q_ = 0;
  u64 ratio_lo_ = 0, ratio_hi_ = 0;
};

/// floor(w * 2^64 / q), the companion of a fixed multiplicand.
inline u64 shoup_precompute(u64 w, u64 q) { return static_cast<u64>((static_cast<u128>(w) << 64) / q); }

/// a * w mod q, result in [0, 2q).
inline u64 shoup_mul_lazy(u64 a, u64 w, u64 w_shoup, u64 q) {
  const u64 hi = static_cast<u64>((static_cast<u128>(a) * w_shoup) >> 64);
  return a * w - hi * q;
}

inline u64 shoup_mul(u64 a, u64 w, u64 w_shoup, u64 q) {
  const u64 r = shoup_mul_lazy(a, w, w_shoup, q);
  return r >= q ? r - q : r;
}

/// Deterministic Miller-Rabin for 64-bit inputs.
bool is_prime(u64 n);

/// `count` primes p = 1 (mod step) below 2^bits, searched downward from the
/// largest candidate, skipping any in `exclude`.
std::vector<u64> find_primes(int bits, std::size_t count, u64 step, const std::vector<u64>& exclude = {});

/// A generator of the order-`order` subgroup of Z_q^* (order | q - 1, power of two).
u64 primitive_root_of_unity(const Modulus& q, u64 order);

}  // namespace hv::fhe
