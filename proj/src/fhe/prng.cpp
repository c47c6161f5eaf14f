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

#include "heartvault/fhe/prng.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstring>
#include <numbers>

#include "heartvault/common/error.hpp"

namespace hv::fhe {

struct Prng::Cipher {
  EVP_CIPHER_CTX* ctx = nullptr;
  ~Cipher() { EVP_CIPHER_CTX_free(ctx); }
};

Prng::Prng(const secure::Key32& seed) : cipher_(std::make_unique<Cipher>()) {
  cipher_->ctx = EVP_CIPHER_CTX_new();
  const std::array<std::uint8_t, 16> iv{};
  if (!cipher_->ctx || EVP_EncryptInit_ex(cipher_->ctx, EVP_aes_256_ctr(), nullptr, seed.data(), iv.data()) != 1) {
    throw Error(ErrorCode::CryptoFailure, "AES-CTR init failed");
  }
}

Prng Prng::random() {
  secure::Key32 seed{};
  const auto r = secure::random_bytes(32);
  std::memcpy(seed.data(), r.data(), 32);
  return Prng(seed);
}

Prng::~Prng() = default;
Prng::Prng(Prng&&) noexcept = default;
Prng& Prng::operator=(Prng&&) noexcept = default;

void Prng::refill() {
  static const std::array<std::uint8_t, 4096> zeros{};
  int len = 0;
  if (EVP_EncryptUpdate(cipher_->ctx, buf_.data(), &len, zeros.data(), static_cast<int>(zeros.size())) != 1) {
    throw Error(ErrorCode::CryptoFailure, "AES-CTR update failed");
  }
  pos_ = 0;
}

void Prng::fill(std::uint8_t* out, std::size_t n) {
  while (n > 0) {
    if (pos_ == buf_.size()) refill();
    const std::size_t take = std::min(n, buf_.size() - pos_);
    std::memcpy(out, buf_.data() + pos_, take);
    pos_ += take;
    out += take;
    n -= take;
  }
}

std::uint64_t Prng::next_u64() {
  std::uint8_t b[8];
  fill(b, 8);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

std::uint64_t Prng::below(std::uint64_t bound) {
  if (bound <= 1) return 0;
  const int bits = 64 - __builtin_clzll(bound - 1);
  const std::uint64_t mask = bits == 64 ? ~0ull : ((1ull << bits) - 1);
  for (;;) {
    const std::uint64_t v = next_u64() & mask;
    if (v < bound) return v;
  }
}

double Prng::uniform() {
  for (;;) {
    const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

double Prng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double th = 2.0 * std::numbers::pi * uniform();
  spare_ = r * std::sin(th);
  has_spare_ = true;
  return r * std::cos(th);
}

secure::Key32 derive_seed(const secure::Key32& master, std::string_view label, std::uint64_t index) {
  Bytes in(master.begin(), master.end());
  put_string(in, label);
  put_u64(in, index);
  return secure::sha256(in);
}

}  // namespace hv::fhe
