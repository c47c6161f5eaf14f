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

#include "heartvault/fhe/ckks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "heartvault/common/error.hpp"

namespace hv::fhe::ckks {

namespace {

constexpr double kErrorStd = 3.2;
constexpr double kErrorBound = 6.0 * kErrorStd;

std::size_t bit_reverse(std::size_t x, int bits) {
  std::size_t r = 0;
  for (int i = 0; i < bits; ++i) {
    r = (r << 1) | (x & 1);
    x >>= 1;
  }
  return r;
}

void array_bit_reverse(std::vector<std::complex<double>>& v) {
  const std::size_t size = v.size();
  for (std::size_t i = 1, j = 0; i < size; ++i) {
    std::size_t bit = size >> 1;
    for (; j >= bit; bit >>= 1) j -= bit;
    j += bit;
    if (i < j) std::swap(v[i], v[j]);
  }
}

// Reduces a signed small coefficient vector into NTT form over `limbs` moduli
// starting at modulus 0, optionally with P appended as the final limb.
Poly small_to_ntt(const Context& ctx, std::span<const std::int64_t> coeffs, std::size_t limbs, bool with_special) {
  const std::size_t n = ctx.n();
  Poly out(n, limbs + (with_special ? 1 : 0));
  for (std::size_t t = 0; t < out.limbs; ++t) {
    const std::size_t mi = (with_special && t == limbs) ? ctx.special() : t;
    const Modulus& q = ctx.modulus(mi);
    u64* dst = out.limb(t);
    for (std::size_t k = 0; k < n; ++k) dst[k] = q.from_signed(coeffs[k]);
    ctx.ntt(mi).forward(dst);
  }
  return out;
}

std::vector<std::int64_t> sample_error(Prng& rng, std::size_t n) {
  std::vector<std::int64_t> e(n);
  for (auto& v : e) {
    double x;
    do {
      x = rng.normal() * kErrorStd;
    } while (std::fabs(x) > kErrorBound);
    v = std::llround(x);
  }
  return e;
}

std::vector<std::int64_t> sample_ternary(Prng& rng, std::size_t n) {
  std::vector<std::int64_t> v(n);
  for (auto& x : v) x = static_cast<std::int64_t>(rng.below(3)) - 1;
  return v;
}

void expand_uniform(const Context& ctx, Prng& rng, Poly& out, std::size_t limbs, bool with_special) {
  const std::size_t n = ctx.n();
  out = Poly(n, limbs + (with_special ? 1 : 0));
  for (std::size_t t = 0; t < out.limbs; ++t) {
    const std::size_t mi = (with_special && t == limbs) ? ctx.special() : t;
    const u64 q = ctx.prime(mi);
    u64* dst = out.limb(t);
    for (std::size_t k = 0; k < n; ++k) dst[k] = rng.below(q);
  }
}

// Index of modulus `mi` inside a key polynomial (chain primes then P).
std::size_t key_limb(const Context& ctx, std::size_t mi) { return mi == ctx.special() ? ctx.max_primes() : mi; }

SwitchKey make_switch_key(const Context& ctx, const SecretKey& sk, const Poly& s_prime, const secure::Key32& a_seed,
                          const secure::Key32& e_seed) {
  const std::size_t n = ctx.n();
  const std::size_t chain = ctx.max_primes();
  SwitchKey key;
  key.a_seed = a_seed;
  expand(ctx, key);
  Prng erng(e_seed);
  key.b.resize(chain);
  for (std::size_t j = 0; j < chain; ++j) {
    const auto e = sample_error(erng, n);
    Poly b = small_to_ntt(ctx, e, chain, true);
    for (std::size_t t = 0; t <= chain; ++t) {
      const Modulus& q = ctx.modulus(t);
      const u64* a = key.a[j].limb(t);
      const u64* s = sk.ntt.limb(t);
      u64* dst = b.limb(t);
      for (std::size_t k = 0; k < n; ++k) dst[k] = q.sub(dst[k], q.mul(a[k], s[k]));
      if (t == j) {
        const u64 pm = ctx.p_mod(j);
        const u64* sp = s_prime.limb(t);
        for (std::size_t k = 0; k < n; ++k) dst[k] = q.add(dst[k], q.mul(pm, sp[k]));
      }
    }
    key.b[j] = std::move(b);
  }
  return key;
}

// Switches `d` (coefficient form, one limb per chain prime 0..l) to the key
// secret, returning NTT-form (u0, u1) over primes 0..l.
std::pair<Poly, Poly> key_switch(const Context& ctx, const Poly& d, const SwitchKey& key) {
  const std::size_t n = ctx.n();
  const std::size_t l = d.limbs;  // primes in use
  const std::size_t targets = l + 1;  // plus P
  std::vector<u128> acc0(targets * n, 0), acc1(targets * n, 0);
  std::vector<u64> tmp(n);
  for (std::size_t j = 0; j < l; ++j) {
    const Modulus& qj = ctx.modulus(j);
    const u64* dj = d.limb(j);
    for (std::size_t t = 0; t < targets; ++t) {
      const std::size_t mi = t == l ? ctx.special() : t;
      const Modulus& qt = ctx.modulus(mi);
      if (mi == j) {
        std::copy(dj, dj + n, tmp.begin());
      } else {
        for (std::size_t k = 0; k < n; ++k) tmp[k] = qt.from_signed(qj.centered(dj[k]));
      }
      ctx.ntt(mi).forward(tmp.data());
      const std::size_t kl = key_limb(ctx, mi);
      const u64* kb = key.b[j].limb(kl);
      const u64* ka = key.a[j].limb(kl);
      u128* a0 = acc0.data() + t * n;
      u128* a1 = acc1.data() + t * n;
      for (std::size_t k = 0; k < n; ++k) {
        a0[k] += static_cast<u128>(tmp[k]) * kb[k];
        a1[k] += static_cast<u128>(tmp[k]) * ka[k];
      }
    }
  }
  // Mod-down by P.
  auto finish = [&](std::vector<u128>& acc) {
    Poly out(n, l);
    const Modulus& p = ctx.modulus(ctx.special());
    std::vector<u64> last(n);
    const u128* ap = acc.data() + l * n;
    for (std::size_t k = 0; k < n; ++k) last[k] = p.reduce(ap[k]);
    ctx.ntt(ctx.special()).inverse(last.data());
    for (std::size_t i = 0; i < l; ++i) {
      const Modulus& qi = ctx.modulus(i);
      for (std::size_t k = 0; k < n; ++k) tmp[k] = qi.from_signed(p.centered(last[k]));
      ctx.ntt(i).forward(tmp.data());
      const u128* ai = acc.data() + i * n;
      const u64 pinv = ctx.p_inv(i);
      u64* dst = out.limb(i);
      for (std::size_t k = 0; k < n; ++k) dst[k] = qi.mul(qi.sub(qi.reduce(ai[k]), tmp[k]), pinv);
    }
    return out;
  };
  return {finish(acc0), finish(acc1)};
}

Poly to_coeff(const Context& ctx, const Poly& p) {
  Poly out = p;
  for (std::size_t i = 0; i < out.limbs; ++i) ctx.ntt(i).inverse(out.limb(i));
  return out;
}

void permute(const Context& ctx, const Poly& in, Poly& out, u64 galois) {
  const auto& perm = ctx.ntt_permutation(galois);
  out = Poly(in.n, in.limbs);
  for (std::size_t i = 0; i < in.limbs; ++i) {
    const u64* src = in.limb(i);
    u64* dst = out.limb(i);
    for (std::size_t k = 0; k < in.n; ++k) dst[k] = src[perm[k]];
  }
}

void check_same(const Ciphertext& a, const Ciphertext& b) {
  if (a.primes() != b.primes()) throw Error(ErrorCode::LevelMismatch, "ciphertexts at different levels");
}

}  // namespace

Context::Context(std::size_t slots, int scale_bits, int ct_depth, int pt_depth)
    : n_(2 * slots), slots_(slots), chain_(static_cast<std::size_t>(1 + ct_depth + pt_depth)) {
  if (slots < 4 || (slots & (slots - 1)) != 0) throw Error(ErrorCode::UnsupportedParams, "slots must be a power of two");
  const u64 step = 2 * n_;
  const int q0_bits = std::min(60, scale_bits + 20);
  auto q0 = find_primes(q0_bits, 1, step);
  auto mids = find_primes(scale_bits, chain_ - 1, step, q0);
  std::vector<u64> used = q0;
  used.insert(used.end(), mids.begin(), mids.end());
  auto special = find_primes(61, 1, step, used);
  used.push_back(special[0]);
  for (u64 p : used) {
    moduli_.emplace_back(p);
    ntts_.emplace_back(n_, moduli_.back());
  }
  const std::size_t m = chain_ + 1;
  inv_.assign(m * m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i != j) inv_[i * m + j] = moduli_[i].inv(moduli_[i].reduce(moduli_[j].value()));
    }
  }
  for (std::size_t i = 0; i < chain_; ++i) {
    p_mod_.push_back(moduli_[i].reduce(special[0]));
    p_inv_.push_back(moduli_[i].inv(p_mod_.back()));
  }
  const std::size_t big_m = 2 * n_;
  rot_group_.resize(slots_);
  std::size_t g = 1;
  for (std::size_t j = 0; j < slots_; ++j) {
    rot_group_[j] = g;
    g = (g * 5) % big_m;
  }
  ksi_pows_.resize(big_m + 1);
  for (std::size_t j = 0; j < big_m; ++j) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(big_m);
    ksi_pows_[j] = {std::cos(angle), std::sin(angle)};
  }
  ksi_pows_[big_m] = ksi_pows_[0];
}

u64 Context::galois_element(long step) const {
  const long s = static_cast<long>(slots_);
  const auto k = static_cast<std::size_t>(((step % s) + s) % s);
  return rot_group_[k];
}

const std::vector<std::uint32_t>& Context::ntt_permutation(u64 galois) const {
  std::lock_guard lock(perm_mu_);
  auto it = perms_.find(galois);
  if (it != perms_.end()) return it->second;
  const int log_n = __builtin_ctzll(n_);
  const u64 big_m = 2 * n_;
  std::vector<std::uint32_t> perm(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    const u64 e = 2 * bit_reverse(i, log_n) + 1;
    const u64 f = (e * galois) % big_m;
    perm[i] = static_cast<std::uint32_t>(bit_reverse((f - 1) / 2, log_n));
  }
  return perms_.emplace(galois, std::move(perm)).first->second;
}

void Context::embed_inverse(std::vector<std::complex<double>>& v) const {
  const std::size_t size = v.size();
  const std::size_t big_m = 2 * n_;
  for (std::size_t len = size; len >= 1; len >>= 1) {
    for (std::size_t i = 0; i < size; i += len) {
      const std::size_t lenh = len >> 1;
      const std::size_t lenq = len << 2;
      const std::size_t gap = big_m / lenq;
      for (std::size_t j = 0; j < lenh; ++j) {
        const std::size_t idx = (lenq - (rot_group_[j] % lenq)) * gap;
        const auto u = v[i + j] + v[i + j + lenh];
        auto w = v[i + j] - v[i + j + lenh];
        w *= ksi_pows_[idx];
        v[i + j] = u;
        v[i + j + lenh] = w;
      }
    }
  }
  array_bit_reverse(v);
  for (auto& x : v) x /= static_cast<double>(size);
}

void Context::embed(std::vector<std::complex<double>>& v) const {
  const std::size_t size = v.size();
  const std::size_t big_m = 2 * n_;
  array_bit_reverse(v);
  for (std::size_t len = 2; len <= size; len <<= 1) {
    for (std::size_t i = 0; i < size; i += len) {
      const std::size_t lenh = len >> 1;
      const std::size_t lenq = len << 2;
      const std::size_t gap = big_m / lenq;
      for (std::size_t j = 0; j < lenh; ++j) {
        const std::size_t idx = (rot_group_[j] % lenq) * gap;
        const auto u = v[i + j];
        const auto w = v[i + j + lenh] * ksi_pows_[idx];
        v[i + j] = u + w;
        v[i + j + lenh] = u - w;
      }
    }
  }
}

Poly encode(const Context& ctx, std::span<const std::complex<double>> values, double scale, std::size_t primes) {
  const std::size_t slots = ctx.slots();
  if (values.size() > slots) throw Error(ErrorCode::UnsupportedParams, "more values than slots");
  std::vector<std::complex<double>> u(slots, {0.0, 0.0});
  std::copy(values.begin(), values.end(), u.begin());
  ctx.embed_inverse(u);
  std::vector<std::int64_t> coeffs(ctx.n());
  constexpr double kLimit = 0x1.0p62;
  for (std::size_t j = 0; j < slots; ++j) {
    const double re = std::round(u[j].real() * scale);
    const double im = std::round(u[j].imag() * scale);
    if (!(std::fabs(re) < kLimit) || !(std::fabs(im) < kLimit)) {
      throw Error(ErrorCode::UnsupportedParams, "value too large to encode at this scale");
    }
    coeffs[j] = static_cast<std::int64_t>(re);
    coeffs[j + slots] = static_cast<std::int64_t>(im);
  }
  return small_to_ntt(ctx, coeffs, primes, false);
}

std::vector<std::complex<double>> decode(const Context& ctx, const Poly& m, double scale) {
  const Poly c = to_coeff(ctx, m);
  const std::size_t n = ctx.n();
  const std::size_t k = c.limbs;
  std::vector<long double> value(n);
  std::vector<std::int64_t> digits(k);
  for (std::size_t x = 0; x < n; ++x) {
    // Balanced mixed-radix (Garner) digits, so small values stay exact.
    for (std::size_t i = 0; i < k; ++i) {
      const Modulus& qi = ctx.modulus(i);
      u64 t = c.limb(i)[x];
      for (std::size_t j = 0; j < i; ++j) t = qi.mul(qi.sub(t, qi.from_signed(digits[j])), ctx.inv(i, j));
      digits[i] = qi.centered(t);
    }
    long double v = static_cast<long double>(digits[k - 1]);
    for (std::size_t i = k - 1; i-- > 0;) v = v * static_cast<long double>(ctx.prime(i)) + digits[i];
    value[x] = v;
  }
  const std::size_t slots = ctx.slots();
  std::vector<std::complex<double>> u(slots);
  const long double s = scale;
  for (std::size_t j = 0; j < slots; ++j) {
    u[j] = {static_cast<double>(value[j] / s), static_cast<double>(value[j + slots] / s)};
  }
  ctx.embed(u);
  return u;
}

SecretKey secret_from_coeffs(const Context& ctx, std::vector<std::int8_t> coeffs) {
  if (coeffs.size() != ctx.n()) throw Error(ErrorCode::ParamsMismatch, "secret key size does not match params");
  std::vector<std::int64_t> wide(coeffs.begin(), coeffs.end());
  SecretKey sk;
  sk.ntt = small_to_ntt(ctx, wide, ctx.max_primes(), true);
  sk.coeffs = std::move(coeffs);
  return sk;
}

void expand(const Context& ctx, PublicKey& pk) {
  Prng rng(pk.a_seed);
  expand_uniform(ctx, rng, pk.a, ctx.max_primes(), false);
}

void expand(const Context& ctx, SwitchKey& key) {
  Prng rng(key.a_seed);
  key.a.resize(ctx.max_primes());
  for (auto& a : key.a) expand_uniform(ctx, rng, a, ctx.max_primes(), true);
}

KeyBundle keygen(const Context& ctx, const secure::Key32& master, std::span<const long> steps) {
  const std::size_t n = ctx.n();
  const std::size_t chain = ctx.max_primes();
  KeyBundle kb;
  {
    Prng rng(derive_seed(master, "secret"));
    const auto s = sample_ternary(rng, n);
    kb.sk = secret_from_coeffs(ctx, std::vector<std::int8_t>(s.begin(), s.end()));
  }
  {
    kb.pk.a_seed = derive_seed(master, "public-a");
    expand(ctx, kb.pk);
    Prng erng(derive_seed(master, "public-e"));
    const auto e = sample_error(erng, n);
    kb.pk.b = small_to_ntt(ctx, e, chain, false);
    for (std::size_t t = 0; t < chain; ++t) {
      const Modulus& q = ctx.modulus(t);
      const u64* a = kb.pk.a.limb(t);
      const u64* s = kb.sk.ntt.limb(t);
      u64* dst = kb.pk.b.limb(t);
      for (std::size_t k = 0; k < n; ++k) dst[k] = q.sub(dst[k], q.mul(a[k], s[k]));
    }
  }
  {
    Poly s2(n, chain + 1);
    for (std::size_t t = 0; t <= chain; ++t) {
      const Modulus& q = ctx.modulus(t);
      const u64* s = kb.sk.ntt.limb(t);
      for (std::size_t k = 0; k < n; ++k) s2.limb(t)[k] = q.mul(s[k], s[k]);
    }
    kb.ek.relin = make_switch_key(ctx, kb.sk, s2, derive_seed(master, "relin-a"), derive_seed(master, "relin-e"));
  }
  for (long step : steps) {
    const u64 g = ctx.galois_element(step);
    if (g == 1 || kb.ek.galois.count(g)) continue;
    Poly sg;
    permute(ctx, kb.sk.ntt, sg, g);
    kb.ek.galois.emplace(g, make_switch_key(ctx, kb.sk, sg, derive_seed(master, "galois-a", g),
                                            derive_seed(master, "galois-e", g)));
  }
  return kb;
}

Ciphertext encrypt(const Context& ctx, const PublicKey& pk, const Poly& m, double scale, Prng& rng) {
  const std::size_t n = ctx.n();
  const std::size_t primes = m.limbs;
  const auto v = small_to_ntt(ctx, sample_ternary(rng, n), primes, false);
  Ciphertext ct;
  ct.scale = scale;
  ct.c0 = small_to_ntt(ctx, sample_error(rng, n), primes, false);
  ct.c1 = small_to_ntt(ctx, sample_error(rng, n), primes, false);
  for (std::size_t t = 0; t < primes; ++t) {
    const Modulus& q = ctx.modulus(t);
    const u64* vb = v.limb(t);
    const u64* b = pk.b.limb(t);
    const u64* a = pk.a.limb(t);
    const u64* mm = m.limb(t);
    u64* c0 = ct.c0.limb(t);
    u64* c1 = ct.c1.limb(t);
    for (std::size_t k = 0; k < n; ++k) {
      c0[k] = q.add(q.add(c0[k], q.mul(vb[k], b[k])), mm[k]);
      c1[k] = q.add(c1[k], q.mul(vb[k], a[k]));
    }
  }
  return ct;
}

Poly decrypt(const Context& ctx, const SecretKey& sk, const Ciphertext& ct) {
  const std::size_t n = ctx.n();
  Poly m(n, ct.primes());
  for (std::size_t t = 0; t < ct.primes(); ++t) {
    const Modulus& q = ctx.modulus(t);
    const u64* c0 = ct.c0.limb(t);
    const u64* c1 = ct.c1.limb(t);
    const u64* s = sk.ntt.limb(t);
    u64* dst = m.limb(t);
    for (std::size_t k = 0; k < n; ++k) dst[k] = q.add(c0[k], q.mul(c1[k], s[k]));
  }
  return m;
}

void add_inplace(const Context& ctx, Ciphertext& a, const Ciphertext& b) {
  check_same(a, b);
  for (std::size_t t = 0; t < a.primes(); ++t) {
    const Modulus& q = ctx.modulus(t);
    for (int part = 0; part < 2; ++part) {
      u64* x = part ? a.c1.limb(t) : a.c0.limb(t);
      const u64* y = part ? b.c1.limb(t) : b.c0.limb(t);
      for (std::size_t k = 0; k < ctx.n(); ++k) x[k] = q.add(x[k], y[k]);
    }
  }
}

void sub_inplace(const Context& ctx, Ciphertext& a, const Ciphertext& b) {
  check_same(a, b);
  for (std::size_t t = 0; t < a.primes(); ++t) {
    const Modulus& q = ctx.modulus(t);
    for (int part = 0; part < 2; ++part) {
      u64* x = part ? a.c1.limb(t) : a.c0.limb(t);
      const u64* y = part ? b.c1.limb(t) : b.c0.limb(t);
      for (std::size_t k = 0; k < ctx.n(); ++k) x[k] = q.sub(x[k], y[k]);
    }
  }
}

void negate_inplace(const Context& ctx, Ciphertext& a) {
  for (std::size_t t = 0; t < a.primes(); ++t) {
    const Modulus& q = ctx.modulus(t);
    for (u64* x : {a.c0.limb(t), a.c1.limb(t)}) {
      for (std::size_t k = 0; k < ctx.n(); ++k) x[k] = q.neg(x[k]);
    }
  }
}

void drop_to(Ciphertext& a, std::size_t primes) {
  if (primes == 0 || primes > a.primes()) throw Error(ErrorCode::LevelMismatch, "cannot raise a ciphertext level");
  a.c0.truncate(primes);
  a.c1.truncate(primes);
}

void mul_int_inplace(const Context& ctx, Ciphertext& a, std::int64_t k) {
  for (std::size_t t = 0; t < a.primes(); ++t) {
    const Modulus& q = ctx.modulus(t);
    const u64 w = q.from_signed(k);
    const u64 ws = shoup_precompute(w, q.value());
    for (u64* x : {a.c0.limb(t), a.c1.limb(t)}) {
      for (std::size_t i = 0; i < ctx.n(); ++i) x[i] = shoup_mul(x[i], w, ws, q.value());
    }
  }
}

void add_mul_int_inplace(const Context& ctx, Ciphertext& acc, const Ciphertext& b, std::int64_t k) {
  check_same(acc, b);
  for (std::size_t t = 0; t < acc.primes(); ++t) {
    const Modulus& q = ctx.modulus(t);
    const u64 w = q.from_signed(k);
    const u64 ws = shoup_precompute(w, q.value());
    for (int part = 0; part < 2; ++part) {
      u64* x = part ? acc.c1.limb(t) : acc.c0.limb(t);
      const u64* y = part ? b.c1.limb(t) : b.c0.limb(t);
      for (std::size_t i = 0; i < ctx.n(); ++i) x[i] = q.add(x[i], shoup_mul(y[i], w, ws, q.value()));
    }
  }
}

void add_mul_plain_inplace(const Context& ctx, Ciphertext& acc, const Ciphertext& b, const Poly& pt) {
  check_same(acc, b);
  if (pt.limbs < b.primes()) throw Error(ErrorCode::LevelMismatch, "plaintext has too few primes");
  for (std::size_t t = 0; t < acc.primes(); ++t) {
    const Modulus& q = ctx.modulus(t);
    const u64* p = pt.limb(t);
    for (int part = 0; part < 2; ++part) {
      u64* x = part ? acc.c1.limb(t) : acc.c0.limb(t);
      const u64* y = part ? b.c1.limb(t) : b.c0.limb(t);
      for (std::size_t i = 0; i < ctx.n(); ++i) x[i] = q.add(x[i], q.mul(y[i], p[i]));
    }
  }
}

Ciphertext multiply(const Context& ctx, const Ciphertext& a, const Ciphertext& b, const SwitchKey& relin) {
  check_same(a, b);
  const std::size_t n = ctx.n();
  const std::size_t l = a.primes();
  Ciphertext out;
  out.scale = a.scale * b.scale;
  out.c0 = Poly(n, l);
  out.c1 = Poly(n, l);
  Poly d2(n, l);
  for (std::size_t t = 0; t < l; ++t) {
    const Modulus& q = ctx.modulus(t);
    const u64 *a0 = a.c0.limb(t), *a1 = a.c1.limb(t), *b0 = b.c0.limb(t), *b1 = b.c1.limb(t);
    u64 *o0 = out.c0.limb(t), *o1 = out.c1.limb(t), *o2 = d2.limb(t);
    for (std::size_t k = 0; k < n; ++k) {
      o0[k] = q.mul(a0[k], b0[k]);
      o1[k] = q.reduce(static_cast<u128>(a0[k]) * b1[k] + static_cast<u128>(a1[k]) * b0[k]);
      o2[k] = q.mul(a1[k], b1[k]);
    }
  }
  const auto [u0, u1] = key_switch(ctx, to_coeff(ctx, d2), relin);
  for (std::size_t t = 0; t < l; ++t) {
    const Modulus& q = ctx.modulus(t);
    u64 *o0 = out.c0.limb(t), *o1 = out.c1.limb(t);
    const u64 *x0 = u0.limb(t), *x1 = u1.limb(t);
    for (std::size_t k = 0; k < n; ++k) {
      o0[k] = q.add(o0[k], x0[k]);
      o1[k] = q.add(o1[k], x1[k]);
    }
  }
  return out;
}

void rescale_inplace(const Context& ctx, Ciphertext& a) {
  const std::size_t l = a.primes();
  if (l < 2) throw Error(ErrorCode::LevelExhausted, "no prime left to rescale by");
  const std::size_t last = l - 1;
  const Modulus& ql = ctx.modulus(last);
  const std::size_t n = ctx.n();
  std::vector<u64> top(n), tmp(n);
  for (Poly* p : {&a.c0, &a.c1}) {
    std::copy(p->limb(last), p->limb(last) + n, top.begin());
    ctx.ntt(last).inverse(top.data());
    for (std::size_t i = 0; i < last; ++i) {
      const Modulus& qi = ctx.modulus(i);
      for (std::size_t k = 0; k < n; ++k) tmp[k] = qi.from_signed(ql.centered(top[k]));
      ctx.ntt(i).forward(tmp.data());
      const u64 inv = ctx.inv(i, last);
      const u64 invs = shoup_precompute(inv, qi.value());
      u64* dst = p->limb(i);
      for (std::size_t k = 0; k < n; ++k) dst[k] = shoup_mul(qi.sub(dst[k], tmp[k]), inv, invs, qi.value());
    }
    p->truncate(last);
  }
  a.scale /= static_cast<double>(ql.value());
}

Ciphertext apply_galois(const Context& ctx, const Ciphertext& a, u64 galois, const SwitchKey& key) {
  Ciphertext out;
  out.scale = a.scale;
  Poly c1;
  permute(ctx, a.c0, out.c0, galois);
  permute(ctx, a.c1, c1, galois);
  const auto [u0, u1] = key_switch(ctx, to_coeff(ctx, c1), key);
  const std::size_t n = ctx.n();
  for (std::size_t t = 0; t < a.primes(); ++t) {
    const Modulus& q = ctx.modulus(t);
    u64* o0 = out.c0.limb(t);
    const u64* x0 = u0.limb(t);
    for (std::size_t k = 0; k < n; ++k) o0[k] = q.add(o0[k], x0[k]);
  }
  out.c1 = u1;
  return out;
}

}  // namespace hv::fhe::ckks
