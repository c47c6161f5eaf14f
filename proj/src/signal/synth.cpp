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

#include "heartvault/signal/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "heartvault/common/error.hpp"

namespace hv::signal {

std::uint64_t SplitMix::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SplitMix::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double SplitMix::normal() {
  if (spare_) {
    double v = *spare_;
    spare_.reset();
    return v;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t SplitMix::below(std::size_t n) { return static_cast<std::size_t>(uniform() * n); }

void validate(const SignalWindow& w) {
  if (!(w.fs_hz > 0.0)) throw Error(ErrorCode::InvalidProfile, "fs must be positive");
  if (w.truth_peaks) {
    const auto& p = *w.truth_peaks;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] >= w.samples.size()) throw Error(ErrorCode::InvalidProfile, "truth peak out of range");
      if (i > 0 && p[i] <= p[i - 1]) throw Error(ErrorCode::InvalidProfile, "truth peaks not increasing");
    }
    if (w.truth_labels && w.truth_labels->size() != p.size()) {
      throw Error(ErrorCode::InvalidProfile, "truth labels not aligned with peaks");
    }
  } else if (w.truth_labels) {
    throw Error(ErrorCode::InvalidProfile, "truth labels without peaks");
  }
}

void validate(const SynthProfile& p) {
  if (!(p.bpm >= 20.0 && p.bpm <= 300.0)) {
    throw Error(ErrorCode::InvalidProfile, "bpm must be in [20, 300], got " + std::to_string(p.bpm));
  }
  double sum = 0.0;
  for (double v : p.class_mix) {
    if (!(v >= 0.0)) throw Error(ErrorCode::InvalidProfile, "negative class probability");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidProfile, "class_mix sums to " + std::to_string(sum));
  }
  if (!(p.rr_jitter >= 0.0 && p.rr_jitter <= 0.02)) {
    throw Error(ErrorCode::InvalidProfile, "rr_jitter must be in [0, 0.02]");
  }
  if (!(p.noise_std >= 0.0) || !(p.baseline_wander_hz >= 0.0)) {
    throw Error(ErrorCode::InvalidProfile, "noise and wander must be non-negative");
  }
}

const std::vector<Bump>& beat_template(ClassLabel label) {
  static const std::array<std::vector<Bump>, kNumClasses> templates{{
      // N
      {{-0.200, 0.15, 0.025}, {-0.025, -0.12, 0.008}, {0.0, 1.00, 0.010},
       {0.028, -0.25, 0.009}, {0.280, 0.30, 0.045}},
      // L
      {{-0.200, 0.15, 0.025}, {-0.026, 0.45, 0.012}, {0.0, 0.85, 0.016},
       {0.300, -0.30, 0.050}},
      // R
      {{-0.200, 0.15, 0.025}, {0.0, 0.80, 0.010}, {0.030, -0.35, 0.012},
       {0.065, 0.50, 0.014}, {0.320, -0.15, 0.050}},
      // A
      {{-0.140, -0.12, 0.020}, {-0.025, -0.10, 0.008}, {0.0, 0.90, 0.010},
       {0.028, -0.20, 0.009}, {0.270, 0.28, 0.045}},
      // V
      {{0.0, 1.30, 0.030}, {0.075, -0.45, 0.025}, {0.340, -0.45, 0.060}},
  }};
  return templates[static_cast<std::size_t>(label)];
}

double template_value(ClassLabel label, double t) {
  double v = 0.0;
  for (const auto& b : beat_template(label)) {
    const double z = (t - b.offset_s) / b.sigma_s;
    if (std::abs(z) < 8.0) v += b.amplitude * std::exp(-0.5 * z * z);
  }
  return v;
}

int template_argmax_offset(ClassLabel label, double fs_hz) {
  const int span = static_cast<int>(std::ceil(0.05 * fs_hz));
  int best = 0;
  double best_v = template_value(label, 0.0);
  for (int k = -span; k <= span; ++k) {
    const double v = template_value(label, k / fs_hz);
    if (v > best_v) {
      best_v = v;
      best = k;
    }
  }
  return best;
}

namespace {

constexpr double kTemplateBefore = 0.30;
constexpr double kTemplateAfter = 0.40;

ClassLabel draw_label(const SynthProfile& p, SplitMix& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t last_nonzero = 0;
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    if (p.class_mix[i] > 0.0) last_nonzero = i;
    acc += p.class_mix[i];
    if (u < acc && p.class_mix[i] > 0.0) return static_cast<ClassLabel>(i);
  }
  return static_cast<ClassLabel>(last_nonzero);
}

}  // namespace

SignalWindow synth(const SynthProfile& profile, double duration_s, double fs_hz, std::int64_t t0_ms) {
  validate(profile);
  if (!(duration_s > 0.0)) throw Error(ErrorCode::InvalidProfile, "duration must be positive");
  if (!(fs_hz > 0.0)) throw Error(ErrorCode::InvalidProfile, "fs must be positive");

  SplitMix rng(profile.seed);
  const auto n = static_cast<std::size_t>(std::llround(duration_s * fs_hz));
  SignalWindow w;
  w.fs_hz = fs_hz;
  w.t0_ms = t0_ms;
  w.samples.assign(n, 0.0);
  std::vector<std::size_t> peaks;
  std::vector<ClassLabel> labels;

  const double rr = 60.0 / profile.bpm;
  double t = 0.5 * rr;
  while (t + kTemplateAfter <= duration_s) {
    const auto idx = static_cast<std::size_t>(std::llround(t * fs_hz));
    if (idx >= n) break;
    const ClassLabel label = draw_label(profile, rng);
    const int shift = template_argmax_offset(label, fs_hz);
    // Nominal R at idx - shift puts the sampled maximum exactly on idx.
    const double centre = static_cast<double>(static_cast<long long>(idx) - shift);
    const long long lo = std::max(0LL, static_cast<long long>(std::floor(centre - kTemplateBefore * fs_hz)));
    const long long hi = std::min(static_cast<long long>(n) - 1,
                                  static_cast<long long>(std::ceil(centre + kTemplateAfter * fs_hz)));
    for (long long i = lo; i <= hi; ++i) {
      w.samples[static_cast<std::size_t>(i)] += template_value(label, (i - centre) / fs_hz);
    }
    if (peaks.empty() || idx > peaks.back()) {
      peaks.push_back(idx);
      labels.push_back(label);
    }
    const double jitter = profile.rr_jitter * (2.0 * rng.uniform() - 1.0);
    t += rr * (1.0 + jitter);
  }

  if (profile.baseline_wander_hz > 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      w.samples[i] += profile.baseline_wander_amplitude *
                      std::sin(2.0 * std::numbers::pi * profile.baseline_wander_hz * i / fs_hz);
    }
  }
  if (profile.noise_std > 0.0) {
    for (auto& v : w.samples) v += profile.noise_std * rng.normal();
  }
  w.truth_peaks = std::move(peaks);
  w.truth_labels = std::move(labels);
  return w;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidProfile, "bad number for " + key + ": '" + v + "'");
  }
}

}  // namespace

SynthProfile parse_profile(const std::string& text) {
  SynthProfile p;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidProfile, "line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "bpm") {
      p.bpm = parse_double(key, value);
    } else if (key == "noise_std") {
      p.noise_std = parse_double(key, value);
    } else if (key == "baseline_wander_hz") {
      p.baseline_wander_hz = parse_double(key, value);
    } else if (key == "baseline_wander_amplitude") {
      p.baseline_wander_amplitude = parse_double(key, value);
    } else if (key == "rr_jitter") {
      p.rr_jitter = parse_double(key, value);
    } else if (key == "seed") {
      p.seed = static_cast<std::uint64_t>(parse_double(key, value));
    } else if (key == "class_mix") {
      p.class_mix.fill(0.0);
      std::istringstream items(value);
      std::string item;
      while (std::getline(items, item, ',')) {
        item = trim(item);
        const auto colon = item.find(':');
        if (colon != 1) throw Error(ErrorCode::InvalidProfile, "bad class_mix entry '" + item + "'");
        auto label = label_from_char(item[0]);
        if (!label) throw Error(ErrorCode::InvalidProfile, "unknown class '" + item.substr(0, 1) + "'");
        p.class_mix[static_cast<std::size_t>(*label)] = parse_double(key, trim(item.substr(2)));
      }
    } else {
      throw Error(ErrorCode::InvalidProfile, "unknown key '" + key + "'");
    }
  }
  validate(p);
  return p;
}

SynthProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read profile " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_profile(ss.str());
}

std::string format_profile(const SynthProfile& p) {
  std::ostringstream out;
  out.precision(17);
  out << "bpm = " << p.bpm << "\nclass_mix = ";
  bool first = true;
  for (auto c : kAllClasses) {
    const double v = p.class_mix[static_cast<std::size_t>(c)];
    if (v == 0.0) continue;
    if (!first) out << ", ";
    out << label_char(c) << ':' << v;
    first = false;
  }
  out << "\nnoise_std = " << p.noise_std << "\nbaseline_wander_hz = " << p.baseline_wander_hz
      << "\nbaseline_wander_amplitude = " << p.baseline_wander_amplitude
      << "\nrr_jitter = " << p.rr_jitter << "\nseed = " << p.seed << "\n";
  return out.str();
}

}  // namespace hv::signal
