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

#include "heartvault/fhe/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "heartvault/common/error.hpp"

namespace hv::fhe {

AnalysisSet parse_analyses(std::string_view csv) {
  AnalysisSet s;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    const auto comma = csv.find(',', pos);
    auto name = csv.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    while (!name.empty() && name.front() == ' ') name.remove_prefix(1);
    while (!name.empty() && name.back() == ' ') name.remove_suffix(1);
    if (name == "peaks") s.peaks = true;
    else if (name == "stats") s.stats = true;
    else if (name == "frequency") s.frequency = true;
    else if (name == "hrv") s.hrv = true;
    else if (!name.empty()) throw Error(ErrorCode::BadRequest, "unknown analysis '" + std::string(name) + "'");
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (s.empty()) throw Error(ErrorCode::BadRequest, "no analyses requested");
  return s;
}

std::string format_analyses(const AnalysisSet& set) {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ',';
    out += name;
  };
  add(set.peaks, "peaks");
  add(set.stats, "stats");
  add(set.frequency, "frequency");
  add(set.hrv, "hrv");
  return out;
}

namespace {

void check_peak_length(std::size_t n, double fs_hz) {
  if (static_cast<double>(n) < 2.0 * fs_hz) {
    throw Error(ErrorCode::InputTooShort, "peak detection needs at least 2 s of signal");
  }
}

}  // namespace

EncryptedAnalysis evaluate_encrypted(const HeBackend& be, const CipherVector& window, std::size_t n, double fs_hz,
                                     const AnalysisSet& set) {
  EncryptedAnalysis ea;
  ea.n = n;
  ea.fs_hz = fs_hz;
  if (set.stats) ea.mean_var = he_mean_var(be, window, n);
  if (set.needs_peaks()) {
    check_peak_length(n, fs_hz);
    ea.front_end = he_integrated_waveform(be, window, n, dsp::pan_tompkins_stages(fs_hz));
  }
  if (set.frequency) ea.spectrum = he_spectrum(be, window, n);
  return ea;
}

WindowResults run_plaintext(std::span<const double> x, double fs_hz, const AnalysisSet& set) {
  WindowResults r;
  if (set.stats) r.stats = dsp::basic_stats(x);
  if (set.needs_peaks()) {
    check_peak_length(x.size(), fs_hz);
    auto peaks = dsp::pan_tompkins(x, fs_hz);
    if (set.hrv) r.hrv = dsp::hrv(peaks, fs_hz);
    if (set.peaks) r.peaks = std::move(peaks);
  }
  if (set.frequency) r.dominant_freqs = dsp::dominant_frequencies(x, fs_hz, kDominantCount);
  return r;
}

WindowResults finish_encrypted(const HeBackend& be, const EncryptedAnalysis& ea, const CipherVector& window,
                               std::optional<Quantization> grid) {
  WindowResults r;
  std::vector<double> x = be.decrypt(window);
  x.resize(std::min(x.size(), ea.n));
  if (grid && grid->quantum > 0.0) {
    for (auto& v : x) v = grid->offset + grid->quantum * std::round((v - grid->offset) / grid->quantum);
  }
  if (ea.mean_var) {
    dsp::StatsReport s = dsp::basic_stats(x);  // order statistics from the decrypted window
    s.mean = be.decrypt_complex(ea.mean_var->mean)[0].real();
    s.std = std::sqrt(std::max(0.0, be.decrypt_complex(ea.mean_var->variance)[0].real()));
    r.stats = s;
  }
  if (ea.front_end) {
    const auto integrated = decrypt_integrated(be, *ea.front_end);
    auto peaks = dsp::pick_peaks(integrated, x, dsp::pan_tompkins_stages(ea.fs_hz));
    if (peaks.size() >= 2) r.hrv = dsp::hrv(peaks, ea.fs_hz);
    r.peaks = std::move(peaks);
  }
  if (ea.spectrum) {
    const auto z = be.decrypt_complex(*ea.spectrum);
    std::vector<double> mags(ea.n / 2 + 1);
    for (std::size_t k = 0; k < mags.size(); ++k) mags[k] = std::abs(z[k]);
    r.dominant_freqs = dsp::rank_bins(mags, ea.n, ea.fs_hz, kDominantCount);
  }
  return r;
}

double compare_ratio(double a, double b) {
  if (a == b) return 100.0;
  if ((a < 0 && b > 0) || (a > 0 && b < 0)) return 0.0;
  const double lo = std::min(std::fabs(a), std::fabs(b));
  const double hi = std::max(std::fabs(a), std::fabs(b));
  return 100.0 * lo / hi;
}

namespace {

template <typename T>
double match_pct(std::span<const T> a, std::span<const T> b) {
  if (a.empty() && b.empty()) return 100.0;
  const std::multiset<T> sa(a.begin(), a.end());
  std::multiset<T> sb(b.begin(), b.end());
  std::size_t common = 0;
  for (const auto& v : sa) {
    const auto it = sb.find(v);
    if (it != sb.end()) {
      ++common;
      sb.erase(it);
    }
  }
  return 100.0 * static_cast<double>(common) / static_cast<double>(std::max(a.size(), b.size()));
}

MetricComparison metric(std::string name, double p, double e) { return {std::move(name), p, e, compare_ratio(p, e)}; }

}  // namespace

double set_match_pct(std::span<const std::size_t> a, std::span<const std::size_t> b) { return match_pct(a, b); }
double set_match_pct(std::span<const double> a, std::span<const double> b) { return match_pct(a, b); }

ComparisonReport compare_results(const WindowResults& p, const WindowResults& e) {
  ComparisonReport r;
  if (p.stats && e.stats) {
    r.stats.push_back(metric("Mean", p.stats->mean, e.stats->mean));
    r.stats.push_back(metric("Std", p.stats->std, e.stats->std));
    r.stats.push_back(metric("Median", p.stats->median, e.stats->median));
    r.stats.push_back(metric("Min", p.stats->min, e.stats->min));
    r.stats.push_back(metric("Max", p.stats->max, e.stats->max));
  }
  if (p.peaks && e.peaks) {
    r.plaintext_peaks = *p.peaks;
    r.encrypted_peaks = *e.peaks;
    r.peak_match_pct = set_match_pct(std::span<const std::size_t>(*p.peaks), std::span<const std::size_t>(*e.peaks));
  }
  if (p.dominant_freqs && e.dominant_freqs) {
    r.plaintext_freqs = *p.dominant_freqs;
    r.encrypted_freqs = *e.dominant_freqs;
    r.frequency_match_pct =
        set_match_pct(std::span<const double>(*p.dominant_freqs), std::span<const double>(*e.dominant_freqs));
  }
  if (p.hrv) {
    const dsp::HrvReport none;
    const auto& eh = e.hrv ? *e.hrv : none;
    r.hrv.push_back(metric("HRV mean RR", p.hrv->mean_rr, eh.mean_rr));
    r.hrv.push_back(metric("HRV std RR", p.hrv->std_rr, eh.std_rr));
  }
  return r;
}

ComparisonReport compare_pipelines(const signal::SignalWindow& window, const HeParams& params,
                                   const AnalysisSet& set) {
  params.validate();
  const auto be = CkksBackend::generate(params);
  return compare_pipelines(window, *be, set);
}

ComparisonReport compare_pipelines(const signal::SignalWindow& window, const HeBackend& be, const AnalysisSet& set) {
  const auto& x = window.samples;
  if (x.size() > be.slots()) throw Error(ErrorCode::UnsupportedParams, "window longer than the slot count");
  const auto plain = run_plaintext(x, window.fs_hz, set);
  const auto ct = be.encrypt(x);
  const auto ea = evaluate_encrypted(be, ct, x.size(), window.fs_hz, set);
  auto enc = finish_encrypted(be, ea, ct);
  if (!set.peaks) enc.peaks.reset();
  if (!set.hrv) enc.hrv.reset();
  return compare_results(plain, enc);
}

nlohmann::json to_json(const dsp::StatsReport& s) {
  return {{"mean", s.mean}, {"std", s.std}, {"median", s.median}, {"min", s.min}, {"max", s.max}};
}

nlohmann::json to_json(const WindowResults& r) {
  nlohmann::json j = nlohmann::json::object();
  if (r.stats) j["stats"] = to_json(*r.stats);
  if (r.peaks) j["peaks"] = *r.peaks;
  if (r.hrv) {
    j["hrv"] = {{"rr_intervals_s", r.hrv->rr_intervals}, {"mean_rr_s", r.hrv->mean_rr}, {"std_rr_s", r.hrv->std_rr}};
  }
  if (r.dominant_freqs) j["dominant_frequencies_hz"] = *r.dominant_freqs;
  return j;
}

namespace {

nlohmann::json metrics_json(const std::vector<MetricComparison>& v) {
  auto a = nlohmann::json::array();
  for (const auto& m : v) {
    a.push_back({{"metric", m.metric}, {"plaintext", m.plaintext}, {"encrypted", m.encrypted}, {"ratio", m.ratio}});
  }
  return a;
}

std::vector<MetricComparison> metrics_from(const nlohmann::json& a) {
  std::vector<MetricComparison> v;
  for (const auto& m : a) {
    v.push_back({m.at("metric").get<std::string>(), m.at("plaintext").get<double>(), m.at("encrypted").get<double>(),
                 m.at("ratio").get<double>()});
  }
  return v;
}

}  // namespace

nlohmann::json to_json(const ComparisonReport& r) {
  nlohmann::json j = {{"stats", metrics_json(r.stats)}, {"hrv", metrics_json(r.hrv)}};
  if (r.peak_match_pct) {
    j["peaks"] = {{"match_pct", *r.peak_match_pct},
                  {"plaintext", r.plaintext_peaks},
                  {"encrypted", r.encrypted_peaks}};
  }
  if (r.frequency_match_pct) {
    j["frequency"] = {{"match_pct", *r.frequency_match_pct},
                      {"plaintext_hz", r.plaintext_freqs},
                      {"encrypted_hz", r.encrypted_freqs}};
  }
  return j;
}

ComparisonReport comparison_from_json(const nlohmann::json& j) {
  ComparisonReport r;
  r.stats = metrics_from(j.at("stats"));
  r.hrv = metrics_from(j.at("hrv"));
  if (j.contains("peaks")) {
    r.peak_match_pct = j["peaks"].at("match_pct").get<double>();
    r.plaintext_peaks = j["peaks"].at("plaintext").get<std::vector<std::size_t>>();
    r.encrypted_peaks = j["peaks"].at("encrypted").get<std::vector<std::size_t>>();
  }
  if (j.contains("frequency")) {
    r.frequency_match_pct = j["frequency"].at("match_pct").get<double>();
    r.plaintext_freqs = j["frequency"].at("plaintext_hz").get<std::vector<double>>();
    r.encrypted_freqs = j["frequency"].at("encrypted_hz").get<std::vector<double>>();
  }
  return r;
}

std::string format_report(const ComparisonReport& r) {
  std::string out;
  char line[256];
  auto rows = [&](const std::vector<MetricComparison>& v) {
    for (const auto& m : v) {
      std::snprintf(line, sizeof line, "%-14s %14.6g %14.6g %9.2f %%\n", m.metric.c_str(), m.plaintext, m.encrypted,
                    m.ratio);
      out += line;
    }
  };
  std::snprintf(line, sizeof line, "%-14s %14s %14s %11s\n", "metric", "original", "encrypted", "ratio");
  out += line;
  rows(r.stats);
  if (r.peak_match_pct) {
    std::snprintf(line, sizeof line, "%-14s %14zu %14zu %9.2f %%\n", "R-peaks", r.plaintext_peaks.size(),
                  r.encrypted_peaks.size(), *r.peak_match_pct);
    out += line;
  }
  if (r.frequency_match_pct) {
    auto join = [](const std::vector<double>& f) {
      std::string s;
      char b[32];
      for (double v : f) {
        std::snprintf(b, sizeof b, "%s%.3g", s.empty() ? "" : ",", v);
        s += b;
      }
      return s;
    };
    std::snprintf(line, sizeof line, "%-14s %14s %14s %9.2f %%\n", "Dominant Hz", join(r.plaintext_freqs).c_str(),
                  join(r.encrypted_freqs).c_str(), *r.frequency_match_pct);
    out += line;
  }
  rows(r.hrv);
  return out;
}

}  // namespace hv::fhe
