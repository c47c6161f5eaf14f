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

#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "heartvault/fhe/modarith.hpp"
#include "heartvault/fhe/ntt.hpp"
#include "heartvault/fhe/prng.hpp"

// Leveled RNS-CKKS over Z[X]/(X^n + 1), n = 2 * slots. Modulus chain
// q_0 (wide), q_1 .. q_L (scale-sized), plus one special prime P used only
// inside key switching. Polynomials are kept in NTT form except where noted.
namespace hv::fhe::ckks {

struct Poly {
  std::size_t n = 0;
  std::size_t limbs = 0;
  std::vector<u64> data;

  Poly() = default;
  Poly(std::size_t n_, std::size_t limbs_) : n(n_), limbs(limbs_), data(n_ * limbs_, 0) {}

  u64* limb(std::size_t i) { return data.data() + i * n; }
  const u64* limb(std::size_t i) const { return data.data() + i * n; }
  void truncate(std::size_t k) {
    limbs = k;
    data.resize(n * k);
  }
  bool operator==(const Poly&) const = default;
};

struct Ciphertext {
  Poly c0, c1;
  double scale = 1.0;
  std::size_t primes() const { return c0.limbs; }
};

/// Ternary secret plus its NTT image under every modulus including P.
struct SecretKey {
  std::vector<std::int8_t> coeffs;
  Poly ntt;
};

/// b = -a s + e over the full chain; a is expanded from a_seed.
struct PublicKey {
  secure::Key32 a_seed{};
  Poly b, a;
};

/// One digit per chain prime; every digit covers all chain primes and P.
struct SwitchKey {
  secure::Key32 a_seed{};
  std::vector<Poly> b, a;
};

struct EvalKeys {
  SwitchKey relin;
  std::map<u64, SwitchKey> galois;
};

class Context {
 public:
  Context(std::size_t slots, int scale_bits, int ct_depth, int pt_depth);

  std::size_t n() const { return n_; }
  std::size_t slots() const { return slots_; }
  /// Chain length L + 1 (P excluded).
  std::size_t max_primes() const { return chain_; }
  /// Modulus index of P.
  std::size_t special() const { return chain_; }
  const Modulus& modulus(std::size_t i) const { return moduli_[i]; }
  const NttTables& ntt(std::size_t i) const { return ntts_[i]; }
  u64 prime(std::size_t i) const { return moduli_[i].value(); }

  /// q_j^{-1} mod q_i.
  u64 inv(std::size_t i, std::size_t j) const { return inv_[i * (chain_ + 1) + j]; }
  u64 p_mod(std::size_t i) const { return p_mod_[i]; }
  u64 p_inv(std::size_t i) const { return p_inv_[i]; }

  /// 5^step mod 2n; left rotation of the slot vector by `step`.
  u64 galois_element(long step) const;
  /// out[i] = in[perm[i]] applies X -> X^g to an NTT-form limb.
  const std::vector<std::uint32_t>& ntt_permutation(u64 galois) const;

  void embed_inverse(std::vector<std::complex<double>>& v) const;
  void embed(std::vector<std::complex<double>>& v) const;

 private:
  std::size_t n_, slots_, chain_;
  std::vector<Modulus> moduli_;
  std::vector<NttTables> ntts_;
  std::vector<u64> inv_, p_mod_, p_inv_;
  std::vector<std::size_t> rot_group_;
  std::vector<std::complex<double>> ksi_pows_;
  mutable std::mutex perm_mu_;
  mutable std::map<u64, std::vector<std::uint32_t>> perms_;
};

/// Encodes up to `slots` complex values at `scale` over the first `primes` moduli.
Poly encode(const Context& ctx, std::span<const std::complex<double>> values, double scale, std::size_t primes);
/// Decodes an NTT-form plaintext over any prefix of the chain.
std::vector<std::complex<double>> decode(const Context& ctx, const Poly& m, double scale);

struct KeyBundle {
  SecretKey sk;
  PublicKey pk;
  EvalKeys ek;
};

/// Deterministic in `master`. Rotation keys are generated for each step in `steps`.
KeyBundle keygen(const Context& ctx, const secure::Key32& master, std::span<const long> steps);
SecretKey secret_from_coeffs(const Context& ctx, std::vector<std::int8_t> coeffs);
/// Rebuilds the uniform `a` halves from their seeds (after deserialization).
void expand(const Context& ctx, PublicKey& pk);
void expand(const Context& ctx, SwitchKey& key);

Ciphertext encrypt(const Context& ctx, const PublicKey& pk, const Poly& m, double scale, Prng& rng);
/// c0 + c1 s, NTT form.
Poly decrypt(const Context& ctx, const SecretKey& sk, const Ciphertext& ct);

void add_inplace(const Context& ctx, Ciphertext& a, const Ciphertext& b);
void sub_inplace(const Context& ctx, Ciphertext& a, const Ciphertext& b);
void negate_inplace(const Context& ctx, Ciphertext& a);
/// Drops trailing primes (exact while the message fits the smaller modulus).
void drop_to(Ciphertext& a, std::size_t primes);
/// a *= k for a signed integer k; scale unchanged.
void mul_int_inplace(const Context& ctx, Ciphertext& a, std::int64_t k);
/// acc += k * b.
void add_mul_int_inplace(const Context& ctx, Ciphertext& acc, const Ciphertext& b, std::int64_t k);
/// acc += b * pt (pt NTT form over the same primes); scale bookkeeping is the caller's.
void add_mul_plain_inplace(const Context& ctx, Ciphertext& acc, const Ciphertext& b, const Poly& pt);
/// Tensor product plus relinearisation, no rescale. Scale multiplies.
Ciphertext multiply(const Context& ctx, const Ciphertext& a, const Ciphertext& b, const SwitchKey& relin);
/// Divides by the last prime and drops it. The scale is divided by that prime.
void rescale_inplace(const Context& ctx, Ciphertext& a);
/// Applies X -> X^g and switches back to the original secret.
Ciphertext apply_galois(const Context& ctx, const Ciphertext& a, u64 galois, const SwitchKey& key);

}  // namespace hv::fhe::ckks
