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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "heartvault/dsp/analysis.hpp"
#include "heartvault/fhe/ops.hpp"
#include "heartvault/signal/synth.hpp"

namespace hv::fhe {

/// Number of dominant frequencies reported by the frequency analysis.
inline constexpr std::size_t kDominantCount = 3;

struct AnalysisSet {
  bool peaks = false;
  bool stats = false;
  bool frequency = false;
  bool hrv = false;  // implies peaks

  static AnalysisSet all() { return {true, true, true, true}; }
  bool needs_peaks() const { return peaks || hrv; }
  bool empty() const { return !peaks && !stats && !frequency && !hrv; }
};

/// Parses "peaks,stats,frequency,hrv"; throws BadRequest on unknown names.
AnalysisSet parse_analyses(std::string_view csv);
std::string format_analyses(const AnalysisSet& set);

/// Everything the evaluator computes for one encrypted window. Holds
/// ciphertexts only.
struct EncryptedAnalysis {
  std::size_t n = 0;
  double fs_hz = 0.0;
  std::optional<MeanVar> mean_var;
  std::optional<EncryptedFrontEnd> front_end;
  std::optional<CipherVector> spectrum;
};

/// Server side. Throws InputTooShort when peaks are requested on under 2 s.
EncryptedAnalysis evaluate_encrypted(const HeBackend& be, const CipherVector& window, std::size_t n, double fs_hz,
                                     const AnalysisSet& set);

/// Finished results of either path.
struct WindowResults {
  std::optional<dsp::StatsReport> stats;
  std::optional<std::vector<std::size_t>> peaks;
  std::optional<dsp::HrvReport> hrv;
  std::optional<std::vector<double>> dominant_freqs;
};

WindowResults run_plaintext(std::span<const double> x, double fs_hz, const AnalysisSet& set);

/// Analyst side: decrypts the evaluator outputs and the window itself, then
/// applies the non-polynomial steps (square root, order statistics, peak
/// thresholds, frequency ranking). When `quantum` is set the decrypted
/// window is snapped to the sensor grid offset + quantum * k before use.
struct Quantization {
  double offset = 0.0;
  double quantum = 0.0;
};

WindowResults finish_encrypted(const HeBackend& be, const EncryptedAnalysis& ea, const CipherVector& window,
                               std::optional<Quantization> grid = std::nullopt);

/// 100 * min(|a|,|b|) / max(|a|,|b|); 100 when both are zero, 0 on opposite signs.
double compare_ratio(double a, double b);
/// 100 * |A n B| / max(|A|, |B|); 100 when both are empty.
double set_match_pct(std::span<const std::size_t> a, std::span<const std::size_t> b);
double set_match_pct(std::span<const double> a, std::span<const double> b);

struct MetricComparison {
  std::string metric;
  double plaintext = 0.0;
  double encrypted = 0.0;
  double ratio = 0.0;
};

struct ComparisonReport {
  std::vector<MetricComparison> stats;  // Mean, Std, Median, Min, Max
  std::optional<double> peak_match_pct;
  std::vector<std::size_t> plaintext_peaks, encrypted_peaks;
  std::optional<double> frequency_match_pct;
  std::vector<double> plaintext_freqs, encrypted_freqs;
  std::vector<MetricComparison> hrv;  // HRV mean RR, HRV std RR
};

ComparisonReport compare_results(const WindowResults& plaintext, const WindowResults& encrypted);

/// Full plaintext and encrypted paths on one window with a fresh CKKS key set.
ComparisonReport compare_pipelines(const signal::SignalWindow& window, const HeParams& params,
                                   const AnalysisSet& set = AnalysisSet::all());
/// Same with a caller-supplied backend that can decrypt (e.g. NullBackend).
ComparisonReport compare_pipelines(const signal::SignalWindow& window, const HeBackend& be,
                                   const AnalysisSet& set = AnalysisSet::all());

nlohmann::json to_json(const dsp::StatsReport& s);
nlohmann::json to_json(const WindowResults& r);
nlohmann::json to_json(const ComparisonReport& r);
ComparisonReport comparison_from_json(const nlohmann::json& j);
/// Fixed-width text table: metric, original, encrypted, ratio.
std::string format_report(const ComparisonReport& r);

}  // namespace hv::fhe
