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

#include "heartvault/gateway/blocks.hpp"

#include <algorithm>
#include <cmath>

#include "heartvault/common/bytes.hpp"
#include "heartvault/common/error.hpp"

namespace hv::gateway {

namespace {

bool long_enough(std::size_t n, double fs_hz) { return static_cast<double>(n) >= kMinPeakBlockSeconds * fs_hz; }

}  // namespace

BlockPartial plain_partial(std::string session, std::uint64_t first_sample, double fs_hz, std::vector<double> samples,
                           const fhe::AnalysisSet& set) {
  if (samples.empty()) throw Error(ErrorCode::EmptyInput, "empty block");
  BlockPartial b;
  b.session = std::move(session);
  b.first_sample = first_sample;
  b.fs_hz = fs_hz;
  if (set.stats) {
    const auto s = dsp::basic_stats(samples);
    b.mean_var = std::make_pair(s.mean, dsp::population_variance(samples));
  }
  if (set.needs_peaks()) {
    b.peaks = long_enough(samples.size(), fs_hz) ? dsp::pan_tompkins(samples, fs_hz) : std::vector<std::size_t>{};
  }
  if (set.frequency && samples.size() >= 2) b.magnitudes = dsp::dft_magnitudes(samples);
  b.samples = std::move(samples);
  return b;
}

fhe::EncryptedAnalysis evaluate_block(const fhe::HeBackend& be, const fhe::CipherVector& window, std::size_t n,
                                      double fs_hz, const fhe::AnalysisSet& set) {
  fhe::AnalysisSet s = set;
  if (!long_enough(n, fs_hz)) s.peaks = s.hrv = false;
  if (n < 2) s.frequency = false;
  fhe::EncryptedAnalysis ea;
  if (!s.empty()) ea = fhe::evaluate_encrypted(be, window, n, fs_hz, s);
  ea.n = n;
  ea.fs_hz = fs_hz;
  return ea;
}

BlockPartial encrypted_partial(const fhe::HeBackend& be, const fhe::EncryptedAnalysis& ea,
                               const fhe::CipherVector& window, std::string session, std::uint64_t first_sample,
                               std::optional<fhe::Quantization> grid) {
  BlockPartial b;
  b.session = std::move(session);
  b.first_sample = first_sample;
  b.fs_hz = ea.fs_hz;
  b.samples = be.decrypt(window);
  b.samples.resize(std::min(b.samples.size(), ea.n));
  if (grid && grid->quantum > 0.0) {
    for (auto& v : b.samples) v = grid->offset + grid->quantum * std::round((v - grid->offset) / grid->quantum);
  }
  if (ea.mean_var) {
    b.mean_var = std::make_pair(be.decrypt_complex(ea.mean_var->mean)[0].real(),
                                be.decrypt_complex(ea.mean_var->variance)[0].real());
  }
  if (ea.front_end) {
    const auto integrated = fhe::decrypt_integrated(be, *ea.front_end);
    b.peaks = dsp::pick_peaks(integrated, b.samples, dsp::pan_tompkins_stages(ea.fs_hz));
  } else if (!long_enough(ea.n, ea.fs_hz)) {
    b.peaks = std::vector<std::size_t>{};
  }
  if (ea.spectrum) {
    const auto z = be.decrypt_complex(*ea.spectrum);
    std::vector<double> mags(ea.n / 2 + 1);
    for (std::size_t k = 0; k < mags.size(); ++k) mags[k] = std::abs(z[k]);
    b.magnitudes = std::move(mags);
  }
  return b;
}

fhe::WindowResults combine(const std::vector<BlockPartial>& blocks, const fhe::AnalysisSet& set) {
  if (blocks.empty()) throw Error(ErrorCode::EmptyRange, "no analysis blocks in the requested range");
  const double fs = blocks.front().fs_hz;
  for (const auto& b : blocks) {
    if (b.fs_hz != fs) throw Error(ErrorCode::UnsupportedParams, "blocks with different sampling rates");
  }
  std::vector<double> x;
  std::vector<std::size_t> offsets;
  for (const auto& b : blocks) {
    offsets.push_back(x.size());
    x.insert(x.end(), b.samples.begin(), b.samples.end());
  }

  fhe::WindowResults r;
  if (set.stats) {
    dsp::StatsReport s = dsp::basic_stats(x);
    if (blocks.size() == 1) {
      const auto [m, v] = blocks[0].mean_var.value();
      s.mean = m;
      s.std = std::sqrt(std::max(0.0, v));
    } else {
      double sum = 0.0, sq = 0.0;
      for (const auto& b : blocks) {
        const auto [m, v] = b.mean_var.value();
        const double n = static_cast<double>(b.samples.size());
        sum += n * m;
        sq += n * (v + m * m);
      }
      const double n = static_cast<double>(x.size());
      s.mean = sum / n;
      s.std = std::sqrt(std::max(0.0, sq / n - s.mean * s.mean));
    }
    r.stats = s;
  }

  if (set.needs_peaks()) {
    std::vector<std::size_t> peaks;
    // Runs of contiguous blocks within one session; RR intervals stay inside a run.
    std::vector<std::vector<std::size_t>> runs;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const auto& b = blocks[i];
      const bool continues = i > 0 && blocks[i - 1].session == b.session &&
                             blocks[i - 1].first_sample + blocks[i - 1].samples.size() == b.first_sample;
      if (!continues) runs.emplace_back();
      for (std::size_t p : b.peaks.value()) {
        peaks.push_back(offsets[i] + p);
        runs.back().push_back(offsets[i] + p);
      }
    }
    if (set.peaks) r.peaks = peaks;
    if (set.hrv) {
      dsp::HrvReport h;
      for (const auto& run : runs) {
        for (std::size_t k = 1; k < run.size(); ++k) {
          h.rr_intervals.push_back(static_cast<double>(run[k] - run[k - 1]) / fs);
        }
      }
      if (!h.rr_intervals.empty()) {
        const double n = static_cast<double>(h.rr_intervals.size());
        for (double v : h.rr_intervals) h.mean_rr += v;
        h.mean_rr /= n;
        double var = 0.0;
        for (double v : h.rr_intervals) var += (v - h.mean_rr) * (v - h.mean_rr);
        h.std_rr = std::sqrt(var / n);
        r.hrv = h;
      }
    }
  }

  if (set.frequency) {
    std::size_t longest = 0;
    for (const auto& b : blocks) {
      if (b.magnitudes) longest = std::max(longest, b.samples.size());
    }
    if (longest >= 2) {
      std::vector<double> total(longest / 2 + 1, 0.0);
      for (const auto& b : blocks) {
        if (!b.magnitudes || b.samples.size() != longest) continue;
        for (std::size_t k = 0; k < total.size(); ++k) total[k] += (*b.magnitudes)[k];
      }
      r.dominant_freqs = dsp::rank_bins(total, longest, fs, fhe::kDominantCount);
    }
  }
  return r;
}

namespace {

std::string envelope_b64(const fhe::HeBackend& be, const fhe::CipherVector& ct) {
  return to_base64(fhe::to_envelope(be, ct));
}

fhe::CipherVector envelope_from(const fhe::HeBackend& be, const nlohmann::json& j) {
  if (!j.is_string()) throw Error(ErrorCode::BadRequest, "ciphertext must be a base64 string");
  return fhe::from_envelope(be, from_base64(j.get<std::string>()));
}

}  // namespace

nlohmann::json outputs_to_json(const fhe::HeBackend& be, const fhe::EncryptedAnalysis& ea) {
  nlohmann::json j;
  j["n"] = ea.n;
  j["fs_hz"] = ea.fs_hz;
  if (ea.mean_var) {
    j["mean"] = envelope_b64(be, ea.mean_var->mean);
    j["variance"] = envelope_b64(be, ea.mean_var->variance);
  }
  if (ea.front_end) {
    nlohmann::json chunks = nlohmann::json::array();
    for (const auto& c : ea.front_end->chunks) chunks.push_back(envelope_b64(be, c));
    j["front_end"] = {{"n", ea.front_end->n}, {"chunk_len", ea.front_end->chunk_len}, {"chunks", chunks}};
  }
  if (ea.spectrum) j["spectrum"] = envelope_b64(be, *ea.spectrum);
  return j;
}

fhe::EncryptedAnalysis outputs_from_json(const fhe::HeBackend& be, const nlohmann::json& j) {
  fhe::EncryptedAnalysis ea;
  try {
    ea.n = j.at("n").get<std::size_t>();
    ea.fs_hz = j.at("fs_hz").get<double>();
    if (j.contains("mean")) ea.mean_var = fhe::MeanVar{envelope_from(be, j.at("mean")), envelope_from(be, j.at("variance"))};
    if (j.contains("front_end")) {
      const auto& f = j.at("front_end");
      fhe::EncryptedFrontEnd fe;
      fe.n = f.at("n").get<std::size_t>();
      fe.chunk_len = f.at("chunk_len").get<std::size_t>();
      for (const auto& c : f.at("chunks")) fe.chunks.push_back(envelope_from(be, c));
      if (fe.chunk_len == 0 || fe.chunks.size() != (fe.n + fe.chunk_len - 1) / fe.chunk_len) {
        throw Error(ErrorCode::BadRequest, "front end chunk count does not match its length");
      }
      ea.front_end = std::move(fe);
    }
    if (j.contains("spectrum")) ea.spectrum = envelope_from(be, j.at("spectrum"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadRequest, std::string("analysis outputs: ") + e.what());
  }
  if (ea.fs_hz <= 0.0) throw Error(ErrorCode::BadRequest, "analysis outputs: non-positive rate");
  return ea;
}

}  // namespace hv::gateway
