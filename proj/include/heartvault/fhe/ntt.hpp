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
#include <vector>

#include "heartvault/fhe/modarith.hpp"

namespace hv::fhe {

/// Negacyclic NTT over Z_q[X]/(X^n + 1). Forward takes coefficients in natural
/// order and leaves evaluations in bit-reversed order; inverse undoes it.
class NttTables {
 public:
  NttTables(std::size_t n, const Modulus& q);

  std::size_t size() const { return n_; }
  const Modulus& modulus() const { return q_; }

  void forward(u64* a) const;
  void inverse(u64* a) const;

 private:
  std::size_t n_;
  Modulus q_;
  std::vector<u64> psi_rev_, psi_rev_shoup_;
  std::vector<u64> psi_inv_rev_, psi_inv_rev_shoup_;
  u64 n_inv_ = 0, n_inv_shoup_ = 0;
};

}  // namespace hv::fhe
