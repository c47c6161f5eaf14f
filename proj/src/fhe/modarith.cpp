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

#include "heartvault/fhe/modarith.hpp"

#include <algorithm>
#include <stdexcept>

namespace hv::fhe {

Modulus::Modulus(u64 q) : q_(q) {
  if (q < 2 || q >= (u64{1} << 62)) throw std::invalid_argument("modulus out of range");
  const u128 ratio = ~static_cast<u128>(0) / q;
  ratio_lo_ = static_cast<u64>(ratio);
  ratio_hi_ = static_cast<u64>(ratio >> 64);
}

int Modulus::bits() const { return 64 - __builtin_clzll(q_); }

u64 Modulus::reduce(u128 x) const {
  const u64 x_lo = static_cast<u64>(x);
  const u64 x_hi = static_cast<u64>(x >> 64);
  // floor(x * ratio / 2^128), dropping the lowest partial product.
  const u64 carry = static_cast<u64>((static_cast<u128>(x_lo) * ratio_lo_) >> 64);
  const u128 mid1 = static_cast<u128>(x_lo) * ratio_hi_;
  const u128 mid2 = static_cast<u128>(x_hi) * ratio_lo_;
  const u128 mid = static_cast<u128>(carry) + static_cast<u64>(mid1) + static_cast<u64>(mid2);
  const u64 qhat = x_hi * ratio_hi_ + static_cast<u64>(mid1 >> 64) + static_cast<u64>(mid2 >> 64) +
                   static_cast<u64>(mid >> 64);
  u64 r = x_lo - qhat * q_;
  while (r >= q_) r -= q_;
  return r;
}

u64 Modulus::pow(u64 base, u64 exp) const {
  u64 result = 1 % q_;
  base = reduce(base);
  while (exp) {
    if (exp & 1) result = mul(result, base);
    base = mul(base, base);
    exp >>= 1;
  }
  return result;
}

u64 Modulus::inv(u64 a) const { return pow(a, q_ - 2); }

u64 Modulus::from_signed(std::int64_t v) const {
  if (v >= 0) return static_cast<u64>(v) % q_;
  const u64 m = static_cast<u64>(-(v + 1)) % q_;  // avoids overflow at INT64_MIN
  return q_ - 1 - m;
}

namespace {

u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

u64 powmod(u64 b, u64 e, u64 m) {
  u64 r = 1 % m;
  b %= m;
  while (e) {
    if (e & 1) r = mulmod(r, b, m);
    b = mulmod(b, b, m);
    e >>= 1;
  }
  return r;
}

}  // namespace

bool is_prime(u64 n) {
  if (n < 2) return false;
  for (u64 p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (u64 a : {2ull, 325ull, 9375ull, 28178ull, 450775ull, 9780504ull, 1795265022ull}) {
    const u64 base = a % n;
    if (base == 0) continue;
    u64 x = powmod(base, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

std::vector<u64> find_primes(int bits, std::size_t count, u64 step, const std::vector<u64>& exclude) {
  std::vector<u64> out;
  const u64 top = u64{1} << bits;
  if (top % step != 0) throw std::invalid_argument("step must divide 2^bits");
  for (u64 c = top - step + 1; out.size() < count; c -= step) {
    if (c <= step) throw std::runtime_error("ran out of prime candidates");
    if (std::find(exclude.begin(), exclude.end(), c) != exclude.end()) continue;
    if (is_prime(c)) out.push_back(c);
  }
  return out;
}

u64 primitive_root_of_unity(const Modulus& q, u64 order) {
  const u64 p = q.value();
  if ((p - 1) % order != 0) throw std::invalid_argument("order does not divide q - 1");
  const u64 cofactor = (p - 1) / order;
  for (u64 g = 2; g < p; ++g) {
    const u64 r = q.pow(g, cofactor);
    // r has order exactly `order` (a power of two) iff r^(order/2) = -1.
    if (q.pow(r, order / 2) == p - 1) return r;
  }
  throw std::runtime_error("no root of unity found");
}

}  // namespace hv::fhe
