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

#include "heartvault/dsp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>

#include "heartvault/common/error.hpp"

namespace hv::dsp {

StatsReport basic_stats(std::span<const double> x) {
  if (x.empty()) throw Error(ErrorCode::EmptyInput, "basic_stats of an empty vector");
  StatsReport r;
  const double n = static_cast<double>(x.size());
  r.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  r.std = std::sqrt(population_variance(x));
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  r.median = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  r.min = sorted.front();
  r.max = sorted.back();
  return r;
}

double population_variance(std::span<const double> x) {
  if (x.empty()) throw Error(ErrorCode::EmptyInput, "variance of an empty vector");
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return ss / n;
}

std::vector<double> dft_magnitudes(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<double> cos_table(n), sin_table(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    cos_table[i] = std::cos(angle);
    sin_table[i] = std::sin(angle);
  }
  std::vector<double> mags(n / 2 + 1);
  for (std::size_t k = 0; k < mags.size(); ++k) {
    double re = 0.0, im = 0.0;
    std::size_t idx = 0;
    for (std::size_t j = 0; j < n; ++j) {
      re += x[j] * cos_table[idx];
      im -= x[j] * sin_table[idx];
      idx += k;
      if (idx >= n) idx -= n;
    }
    mags[k] = std::hypot(re, im);
  }
  return mags;
}

std::vector<double> rank_bins(std::span<const double> magnitudes, std::size_t n_samples,
                              double fs_hz, std::size_t k) {
  std::vector<std::size_t> bins;
  for (std::size_t b = 1; b < magnitudes.size(); ++b) bins.push_back(b);
  std::stable_sort(bins.begin(), bins.end(),
                   [&](std::size_t l, std::size_t r) { return magnitudes[l] > magnitudes[r]; });
  bins.resize(std::min(k, bins.size()));
  std::sort(bins.begin(), bins.end());
  std::vector<double> freqs;
  for (auto b : bins) freqs.push_back(static_cast<double>(b) * fs_hz / static_cast<double>(n_samples));
  return freqs;
}

std::vector<double> dominant_frequencies(std::span<const double> x, double fs_hz, std::size_t k) {
  if (x.size() < 2) throw Error(ErrorCode::EmptyInput, "need at least two samples");
  if (k == 0) throw Error(ErrorCode::EmptyInput, "k must be at least 1");
  return rank_bins(dft_magnitudes(x), x.size(), fs_hz, k);
}

HrvReport hrv(std::span<const std::size_t> peaks, double fs_hz) {
  if (peaks.size() < 2) {
    throw Error(ErrorCode::TooFewPeaks, "hrv needs two peaks, got " + std::to_string(peaks.size()));
  }
  HrvReport r;
  for (std::size_t i = 0; i + 1 < peaks.size(); ++i) {
    r.rr_intervals.push_back(static_cast<double>(peaks[i + 1]) / fs_hz -
                             static_cast<double>(peaks[i]) / fs_hz);
  }
  const double n = static_cast<double>(r.rr_intervals.size());
  r.mean_rr = std::accumulate(r.rr_intervals.begin(), r.rr_intervals.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : r.rr_intervals) ss += (v - r.mean_rr) * (v - r.mean_rr);
  r.std_rr = std::sqrt(ss / n);
  return r;
}

PanTompkinsStages pan_tompkins_stages(double fs_hz) {
  PanTompkinsStages s;
  s.fs_hz = fs_hz;
  s.bandpass = design_bandpass({2, 5.0, 15.0, fs_hz});
  s.derivative = {2.0 / 8.0, 1.0 / 8.0, 0.0, -1.0 / 8.0, -2.0 / 8.0};
  s.integration_width = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.150 * fs_hz)));
  s.refractory = static_cast<std::size_t>(std::lround(0.200 * fs_hz));
  s.lookback = s.integration_width + static_cast<std::size_t>(std::lround(0.100 * fs_hz));
  return s;
}

std::vector<double> bandpass_impulse(const PanTompkinsStages& stages, double rel_tol) {
  const std::size_t probe = static_cast<std::size_t>(std::ceil(20.0 * stages.fs_hz)) + 64;
  std::vector<double> impulse(probe, 0.0);
  impulse[0] = 1.0;
  auto h = lfilter(stages.bandpass, impulse);
  double peak = 0.0;
  for (double v : h) peak = std::max(peak, std::abs(v));
  std::size_t last = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (std::abs(h[i]) > rel_tol * peak) last = i;
  }
  h.resize(last + 1);
  return h;
}

std::vector<double> front_end_taps(const PanTompkinsStages& stages, double rel_tol) {
  const auto h = bandpass_impulse(stages, rel_tol);
  const auto& d = stages.derivative;
  std::vector<double> taps(h.size() + d.size() - 1, 0.0);
  for (std::size_t i = 0; i < h.size(); ++i) {
    for (std::size_t j = 0; j < d.size(); ++j) taps[i + j] += h[i] * d[j];
  }
  return taps;
}

std::vector<double> integrated_waveform(std::span<const double> x, const PanTompkinsStages& stages) {
  if (x.empty()) return {};
  std::vector<double> centered(x.begin(), x.end());
  const double x0 = x[0];
  for (auto& v : centered) v -= x0;
  auto filtered = lfilter(stages.bandpass, centered);
  auto slope = fir(stages.derivative, filtered);
  for (auto& v : slope) v *= v;
  const std::vector<double> window(stages.integration_width,
                                   1.0 / static_cast<double>(stages.integration_width));
  return fir(window, slope);
}

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace

std::vector<std::size_t> pick_peaks(std::span<const double> integrated, std::span<const double> x,
                                    const PanTompkinsStages& stages) {
  const std::size_t n = std::min(integrated.size(), x.size());
  std::vector<std::size_t> peaks;
  if (n < 3) return peaks;

  const std::size_t init_len = std::min<std::size_t>(n, static_cast<std::size_t>(2.0 * stages.fs_hz));
  double init_max = 0.0, init_sum = 0.0;
  for (std::size_t i = 0; i < init_len; ++i) {
    init_max = std::max(init_max, integrated[i]);
    init_sum += integrated[i];
  }
  double signal_level = 0.25 * init_max;
  double noise_level = 0.5 * init_sum / static_cast<double>(init_len);
  auto threshold = [&] { return noise_level + 0.25 * (signal_level - noise_level); };

  // Candidates: maxima of the integrated waveform over a +-refractory
  // neighbourhood, so ripples inside one QRS hump collapse to a single point.
  const std::size_t half = std::max<std::size_t>(1, stages.refractory);
  std::vector<std::size_t> candidates;
  for (std::size_t i = 1; i < n; ++i) {
    const double v = integrated[i];
    if (!(v > 0.0) || !(v > integrated[i - 1])) continue;
    const std::size_t lo = i > half ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + half);
    bool is_max = true;
    for (std::size_t j = lo; j <= hi && is_max; ++j) {
      if (j < i && integrated[j] >= v) is_max = false;
      if (j > i && integrated[j] > v) is_max = false;
    }
    if (is_max) candidates.push_back(i);
  }

  auto locate = [&](std::size_t k) -> std::size_t {
    std::size_t lo = k > stages.lookback ? k - stages.lookback : 0;
    if (!peaks.empty()) lo = std::max(lo, peaks.back() + 1);
    std::size_t best = lo;
    for (std::size_t j = lo; j <= k; ++j) {
      if (x[j] > x[best]) best = j;
    }
    return best;
  };

  std::vector<std::size_t> accepted_at;  // integrated-domain index of each accepted peak
  std::vector<std::size_t> pending_noise;
  std::vector<double> threshold_at(candidates.size());
  auto accept = [&](std::size_t k) -> bool {
    if (!peaks.empty() && k <= peaks.back()) return false;
    const std::size_t r = locate(k);
    if (!peaks.empty() && r - peaks.back() < stages.refractory) return false;
    peaks.push_back(r);
    accepted_at.push_back(k);
    return true;
  };
  // Median of the last (up to) 8 RR intervals; one missed beat does not
  // stretch it the way a mean would.
  auto recent_rr = [&] {
    const std::size_t m = std::min<std::size_t>(8, accepted_at.size() - 1);
    std::vector<double> rr;
    for (std::size_t q = accepted_at.size() - m; q < accepted_at.size(); ++q) {
      rr.push_back(static_cast<double>(accepted_at[q] - accepted_at[q - 1]));
    }
    return median_of(rr);
  };
  auto search_back = [&] {
    std::size_t best = pending_noise.front();
    for (auto c : pending_noise) {
      if (integrated[c] > integrated[best]) best = c;
    }
    if (integrated[best] > 0.5 * threshold() && accept(best)) {
      signal_level = 0.25 * integrated[best] + 0.75 * signal_level;
    }
    pending_noise.clear();
  };

  for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
    const std::size_t k = candidates[ci];
    // Searchback: a gap of 1.66 RR recovers the best sub-threshold peak.
    if (accepted_at.size() >= 2 && !pending_noise.empty() &&
        static_cast<double>(k - accepted_at.back()) > 1.66 * recent_rr()) {
      search_back();
    }
    threshold_at[ci] = threshold();
    const double v = integrated[k];
    if (v > threshold() && accept(k)) {
      signal_level = 0.125 * v + 0.875 * signal_level;
      pending_noise.clear();
    } else {
      noise_level = 0.125 * v + 0.875 * noise_level;
      pending_noise.push_back(k);
    }
  }
  // The record end stands in for the next beat.
  if (accepted_at.size() >= 2 && !pending_noise.empty() &&
      static_cast<double>(n - 1 - accepted_at.back()) > recent_rr()) {
    search_back();
  }

  // Second pass over gaps longer than 1.66 median RR (including the edges):
  // beats much smaller than their neighbours, e.g. a narrow beat after a run
  // of wide ectopics at low fs, sit under the running threshold.
  if (accepted_at.size() >= 3) {
    std::vector<double> rr;
    for (std::size_t q = 1; q < accepted_at.size(); ++q) {
      rr.push_back(static_cast<double>(accepted_at[q] - accepted_at[q - 1]));
    }
    const double limit = 1.66 * median_of(rr);
    // One beat per gap per round; a long gap may hide several.
    for (;;) {
      std::vector<std::size_t> added;
      for (std::size_t g = 0; g <= accepted_at.size(); ++g) {
        const bool first = g == 0, last = g == accepted_at.size();
        const std::size_t a = first ? 0 : accepted_at[g - 1];
        const std::size_t b = last ? n : accepted_at[g];
        // Nothing follows the record end, so one RR is enough there.
        if (!(static_cast<double>(b - a) > (last ? limit / 1.66 : limit))) continue;
        std::optional<std::size_t> best;
        for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
          const std::size_t k = candidates[ci];
          if (k <= a || k >= b) continue;
          if ((!first && k - a < stages.refractory) || (!last && b - k < stages.refractory)) continue;
          if (!(integrated[k] > 0.3 * threshold_at[ci])) continue;
          if (!best || integrated[k] > integrated[candidates[*best]]) best = ci;
        }
        if (best) added.push_back(candidates[*best]);
      }
      if (added.empty()) break;
      std::vector<std::size_t> all(accepted_at);
      all.insert(all.end(), added.begin(), added.end());
      std::sort(all.begin(), all.end());
      const std::size_t before = accepted_at.size();
      peaks.clear();
      accepted_at.clear();
      for (auto k : all) accept(k);
      if (accepted_at.size() <= before) break;
    }
  }
  return peaks;
}

std::vector<std::size_t> pan_tompkins(std::span<const double> x, double fs_hz) {
  if (!(fs_hz > 0.0)) throw Error(ErrorCode::InvalidFilterSpec, "fs must be positive");
  if (static_cast<double>(x.size()) < 2.0 * fs_hz) {
    throw Error(ErrorCode::InputTooShort, "Pan-Tompkins needs at least 2 s of data");
  }
  const auto stages = pan_tompkins_stages(fs_hz);
  return pick_peaks(integrated_waveform(x, stages), x, stages);
}

}  // namespace hv::dsp
