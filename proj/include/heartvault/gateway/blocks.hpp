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

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "heartvault/fhe/pipeline.hpp"

namespace hv::gateway {

/// Per-block intermediate results. Both analysis paths reduce each block to
/// one of these and then go through the same combine(), so they differ only
/// where the block-level numbers differ.
struct BlockPartial {
  std::string session;  // hex id; RR intervals never span sessions
  std::uint64_t first_sample = 0;
  double fs_hz = 0.0;
  std::vector<double> samples;
  std::optional<std::pair<double, double>> mean_var;  // population variance
  std::optional<std::vector<std::size_t>> peaks;       // block-local indices
  std::optional<std::vector<double>> magnitudes;       // DFT bins 0 .. n/2
};

/// Peak detection runs only on blocks of at least this many seconds.
inline constexpr double kMinPeakBlockSeconds = 2.0;

BlockPartial plain_partial(std::string session, std::uint64_t first_sample, double fs_hz, std::vector<double> samples,
                           const fhe::AnalysisSet& set);

/// Server half for one block: the requested encrypted analyses, with the
/// peak front end skipped on blocks shorter than kMinPeakBlockSeconds.
fhe::EncryptedAnalysis evaluate_block(const fhe::HeBackend& be, const fhe::CipherVector& window, std::size_t n,
                                      double fs_hz, const fhe::AnalysisSet& set);

/// Analyst half: decrypts one block's outputs.
BlockPartial encrypted_partial(const fhe::HeBackend& be, const fhe::EncryptedAnalysis& ea,
                               const fhe::CipherVector& window, std::string session, std::uint64_t first_sample,
                               std::optional<fhe::Quantization> grid);

/// Blocks in time order. Stats pool the per-block mean and variance; peaks
/// are offset into the concatenated sample vector; RR intervals are taken
/// between consecutive peaks of contiguous blocks of one session; spectra of
/// the longest blocks are summed before ranking. Throws EmptyRange when
/// `blocks` is empty, UnsupportedParams on mixed sampling rates.
fhe::WindowResults combine(const std::vector<BlockPartial>& blocks, const fhe::AnalysisSet& set);

/// Evaluator outputs as JSON with base64 ciphertext envelopes:
///   {"n", "fs_hz", "mean", "variance", "front_end": {"n", "chunk_len", "chunks"}, "spectrum"}
nlohmann::json outputs_to_json(const fhe::HeBackend& be, const fhe::EncryptedAnalysis& ea);
/// Throws ParamsMismatch or MalformedRecord from the envelopes, BadRequest on shape.
fhe::EncryptedAnalysis outputs_from_json(const fhe::HeBackend& be, const nlohmann::json& j);

}  // namespace hv::gateway
