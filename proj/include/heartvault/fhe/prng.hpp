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

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>

#include "heartvault/secure/crypto.hpp"

namespace hv::fhe {

/// AES-256-CTR keystream. Same seed, same stream on every platform.
class Prng {
 public:
  explicit Prng(const secure::Key32& seed);
  /// Fresh seed from the OS generator.
  static Prng random();
  ~Prng();
  Prng(Prng&&) noexcept;
  Prng& operator=(Prng&&) noexcept;

  void fill(std::uint8_t* out, std::size_t n);
  std::uint64_t next_u64();
  /// Uniform in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  /// Uniform in (0, 1).
  double uniform();
  double normal();

 private:
  void refill();

  struct Cipher;
  std::unique_ptr<Cipher> cipher_;
  std::array<std::uint8_t, 4096> buf_{};
  std::size_t pos_ = 4096;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// SHA-256 of (seed | label | index), for deriving independent streams.
secure::Key32 derive_seed(const secure::Key32& master, std::string_view label, std::uint64_t index = 0);

}  // namespace hv::fhe
