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

#include "heartvault/classifier/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "heartvault/common/error.hpp"

namespace hv::classifier {

using signal::SignalWindow;
using signal::SplitMix;

Segmentation segment_beats(const SignalWindow& window, std::span<const std::size_t> peaks) {
  Segmentation out;
  const bool truth = window.truth_peaks && window.truth_labels &&
                     std::equal(peaks.begin(), peaks.end(), window.truth_peaks->begin(),
                                window.truth_peaks->end());
  for (std::size_t i = 0; i < peaks.size(); ++i) {
    const std::size_t p = peaks[i];
    if (p < kSegmentCenter || p + (kSegmentLength - kSegmentCenter) > window.samples.size()) {
      ++out.skipped;
      continue;
    }
    BeatSegment s;
    s.center_index = p;
    s.samples.assign(window.samples.begin() + static_cast<std::ptrdiff_t>(p - kSegmentCenter),
                     window.samples.begin() + static_cast<std::ptrdiff_t>(p - kSegmentCenter + kSegmentLength));
    if (truth) s.label = (*window.truth_labels)[i];
    out.segments.push_back(std::move(s));
  }
  return out;
}

BeatSegment normalize(const BeatSegment& segment) {
  BeatSegment out = segment;
  if (segment.samples.empty()) return out;
  const auto [lo, hi] = std::minmax_element(segment.samples.begin(), segment.samples.end());
  const double mn = *lo, mx = *hi;
  if (mx == mn) {
    std::fill(out.samples.begin(), out.samples.end(), 0.5);
    return out;
  }
  for (auto& v : out.samples) v = (v - mn) / (mx - mn);
  // Pin the extremes so the scaling is exactly idempotent.
  out.samples[static_cast<std::size_t>(lo - segment.samples.begin())] = 0.0;
  out.samples[static_cast<std::size_t>(hi - segment.samples.begin())] = 1.0;
  return out;
}

bool is_normalized(const BeatSegment& segment, double tol) {
  if (segment.samples.empty()) return false;
  const auto [lo, hi] = std::minmax_element(segment.samples.begin(), segment.samples.end());
  if (std::abs(*lo - 0.5) <= tol && std::abs(*hi - 0.5) <= tol) return true;
  return std::abs(*lo) <= tol && std::abs(*hi - 1.0) <= tol;
}

std::size_t map_index(std::size_t index, double fs_from, double fs_to) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(index) * fs_to / fs_from));
}

SignalWindow resample(const SignalWindow& window, double fs_to) {
  if (!(fs_to > 0.0) || !(window.fs_hz > 0.0)) throw Error(ErrorCode::InvalidProfile, "bad resampling rate");
  SignalWindow out;
  out.fs_hz = fs_to;
  out.t0_ms = window.t0_ms;
  const std::size_t n = window.samples.size();
  if (n == 0) return out;
  const auto m = static_cast<std::size_t>(std::llround(static_cast<double>(n) * fs_to / window.fs_hz));
  out.samples.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double pos = static_cast<double>(i) * window.fs_hz / fs_to;
    const auto k = static_cast<std::size_t>(pos);
    if (k + 1 >= n) {
      out.samples[i] = window.samples[n - 1];
    } else {
      const double f = pos - static_cast<double>(k);
      out.samples[i] = (1.0 - f) * window.samples[k] + f * window.samples[k + 1];
    }
  }
  if (window.truth_peaks) {
    std::vector<std::size_t> peaks;
    std::vector<ClassLabel> labels;
    for (std::size_t i = 0; i < window.truth_peaks->size(); ++i) {
      const auto p = std::min(m - 1, map_index((*window.truth_peaks)[i], window.fs_hz, fs_to));
      if (!peaks.empty() && p <= peaks.back()) continue;
      peaks.push_back(p);
      if (window.truth_labels) labels.push_back((*window.truth_labels)[i]);
    }
    out.truth_peaks = std::move(peaks);
    if (window.truth_labels) out.truth_labels = std::move(labels);
  }
  return out;
}

// ---- model -----------------------------------------------------------------

namespace {

CnnModel::Layout make_layout(const Hyperparameters& hp) {
  if (hp.filters == 0 || hp.hidden == 0 || hp.width == 0 || hp.width > kSegmentLength) {
    throw Error(ErrorCode::ShapeMismatch, "invalid layer dimensions");
  }
  const std::size_t F = hp.filters, W = hp.width, H = hp.hidden, L = kSegmentLength - W + 1;
  CnnModel::Layout l{};
  l.conv_w = 0;
  l.conv_b = l.conv_w + F * W;
  l.d1_w = l.conv_b + F;
  l.d1_b = l.d1_w + H * F * L;
  l.out_w = l.d1_b + H;
  l.out_b = l.out_w + kNumClasses * H;
  l.total = l.out_b + kNumClasses;
  return l;
}

struct Forward {
  std::vector<double> conv;     // tanh activations, F*L
  std::vector<double> dropped;  // after mask
  std::vector<double> z1, h1;
  std::array<double, kNumClasses> z2{}, p{};
  double loss = 0.0;
};

void softmax(const std::array<double, kNumClasses>& z, std::array<double, kNumClasses>& p) {
  const double mx = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) s += (p[c] = std::exp(z[c] - mx));
  for (auto& v : p) v /= s;
}

double cross_entropy(const std::array<double, kNumClasses>& z, ClassLabel y) {
  const double mx = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - mx);
  return mx + std::log(s) - z[static_cast<std::size_t>(y)];
}

double dense1_unit(const double* w, double b, const std::vector<double>& in) {
  double z = b;
  for (std::size_t j = 0; j < in.size(); ++j) z += w[j] * in[j];
  return z;
}

}  // namespace

CnnModel::CnnModel(const Hyperparameters& hp, ZeroTag)
    : hp_(hp), layout_(make_layout(hp)), params_(layout_.total, 0.0) {}

CnnModel::CnnModel(const Hyperparameters& hp) : CnnModel(hp, ZeroTag{}) {
  SplitMix rng(hp.seed);
  const std::size_t F = hp.filters, W = hp.width, H = hp.hidden, L = conv_length();
  auto fill = [&](std::size_t off, std::size_t count, double fan_in, double fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (std::size_t i = 0; i < count; ++i) params_[off + i] = limit * (2.0 * rng.uniform() - 1.0);
  };
  fill(layout_.conv_w, F * W, static_cast<double>(W), static_cast<double>(F * W));
  fill(layout_.d1_w, H * F * L, static_cast<double>(F * L), static_cast<double>(H));
  fill(layout_.out_w, kNumClasses * H, static_cast<double>(H), static_cast<double>(kNumClasses));
}

CnnModel CnnModel::zeros(const Hyperparameters& hp) { return CnnModel(hp, ZeroTag{}); }

namespace {

Forward forward(const CnnModel& m, std::span<const double> x, std::span<const double> mask) {
  const auto& hp = m.hyperparameters();
  const auto& l = m.layout();
  const auto P = m.parameters();
  const std::size_t F = hp.filters, W = hp.width, H = hp.hidden, L = m.conv_length();
  if (x.size() != kSegmentLength) throw Error(ErrorCode::ShapeMismatch, "segment length must be 180");
  Forward f;
  f.conv.resize(F * L);
  for (std::size_t fi = 0; fi < F; ++fi) {
    const double* w = &P[l.conv_w + fi * W];
    for (std::size_t t = 0; t < L; ++t) {
      double s = P[l.conv_b + fi];
      for (std::size_t k = 0; k < W; ++k) s += w[k] * x[t + k];
      f.conv[fi * L + t] = std::tanh(s);
    }
  }
  f.dropped = f.conv;
  if (!mask.empty()) {
    for (std::size_t j = 0; j < f.dropped.size(); ++j) f.dropped[j] *= mask[j];
  }
  f.z1.resize(H);
  f.h1.resize(H);
  for (std::size_t h = 0; h < H; ++h) {
    f.z1[h] = dense1_unit(&P[l.d1_w + h * F * L], P[l.d1_b + h], f.dropped);
    f.h1[h] = std::tanh(f.z1[h]);
  }
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    double s = P[l.out_b + c];
    for (std::size_t h = 0; h < H; ++h) s += P[l.out_w + c * H + h] * f.h1[h];
    f.z2[c] = s;
  }
  softmax(f.z2, f.p);
  return f;
}

}  // namespace

std::array<double, kNumClasses> CnnModel::probabilities(std::span<const double> x) const {
  return forward(*this, x, {}).p;
}

double CnnModel::loss_and_gradient(std::span<const double> x, ClassLabel y, std::span<double> grad,
                                   std::span<const double> mask, double loss_scale) const {
  const Forward f = forward(*this, x, mask);
  const double loss = loss_scale * cross_entropy(f.z2, y);
  if (grad.empty()) return loss;
  if (grad.size() != params_.size()) throw Error(ErrorCode::ShapeMismatch, "gradient size mismatch");

  const std::size_t F = hp_.filters, W = hp_.width, H = hp_.hidden, L = conv_length();
  const auto& l = layout_;
  std::array<double, kNumClasses> dz2{};
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    dz2[c] = loss_scale * (f.p[c] - (c == static_cast<std::size_t>(y) ? 1.0 : 0.0));
  }
  std::vector<double> dz1(H, 0.0);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    grad[l.out_b + c] += dz2[c];
    for (std::size_t h = 0; h < H; ++h) {
      grad[l.out_w + c * H + h] += dz2[c] * f.h1[h];
      dz1[h] += params_[l.out_w + c * H + h] * dz2[c];
    }
  }
  for (std::size_t h = 0; h < H; ++h) dz1[h] *= 1.0 - f.h1[h] * f.h1[h];

  std::vector<double> dd(F * L, 0.0);
  for (std::size_t h = 0; h < H; ++h) {
    grad[l.d1_b + h] += dz1[h];
    const double g = dz1[h];
    double* gw = &grad[l.d1_w + h * F * L];
    const double* w = &params_[l.d1_w + h * F * L];
    for (std::size_t j = 0; j < F * L; ++j) {
      gw[j] += g * f.dropped[j];
      dd[j] += w[j] * g;
    }
  }
  for (std::size_t fi = 0; fi < F; ++fi) {
    for (std::size_t t = 0; t < L; ++t) {
      const std::size_t j = fi * L + t;
      double d = dd[j];
      if (!mask.empty()) d *= mask[j];
      d *= 1.0 - f.conv[j] * f.conv[j];
      grad[l.conv_b + fi] += d;
      for (std::size_t k = 0; k < W; ++k) grad[l.conv_w + fi * W + k] += d * x[t + k];
    }
  }
  return loss;
}

// ---- serialization ---------------------------------------------------------

namespace {
constexpr char kMagic[8] = {'H', 'V', 'C', 'N', 'N', '0', '0', '1'};
}

Bytes CnnModel::serialize() const {
  Bytes out(kMagic, kMagic + 8);
  put_u32(out, hp_.filters);
  put_u32(out, hp_.width);
  put_u32(out, hp_.hidden);
  put_u32(out, static_cast<std::uint32_t>(kSegmentLength));
  put_f64(out, hp_.learning_rate);
  put_f64(out, hp_.dropout);
  put_u64(out, hp_.seed);
  put_u64(out, params_.size());
  for (double v : params_) put_f64(out, v);
  return out;
}

CnnModel CnnModel::deserialize(ByteView bytes) {
  Reader r(bytes, ErrorCode::BadModelFile);
  const auto magic = r.bytes(8);
  if (!std::equal(magic.begin(), magic.end(), kMagic)) throw Error(ErrorCode::BadModelFile, "bad magic");
  Hyperparameters hp;
  hp.filters = r.u32();
  hp.width = r.u32();
  hp.hidden = r.u32();
  if (r.u32() != kSegmentLength) throw Error(ErrorCode::BadModelFile, "unsupported segment length");
  hp.learning_rate = r.f64();
  hp.dropout = r.f64();
  hp.seed = r.u64();
  if (hp.filters == 0 || hp.filters > 4096 || hp.hidden == 0 || hp.hidden > 4096 || hp.width == 0 ||
      hp.width > kSegmentLength) {
    throw Error(ErrorCode::BadModelFile, "implausible hyperparameters");
  }
  CnnModel m = zeros(hp);
  if (r.u64() != m.params_.size()) throw Error(ErrorCode::BadModelFile, "parameter count mismatch");
  if (r.remaining() != 8 * m.params_.size()) throw Error(ErrorCode::BadModelFile, "payload size mismatch");
  for (auto& v : m.params_) v = r.f64();
  return m;
}

void CnnModel::save(const std::filesystem::path& path) const {
  const auto data = serialize();
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write model " + path.string());
}

CnnModel CnnModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read model " + path.string());
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(data);
}

// ---- inference / training --------------------------------------------------

Prediction predict(const CnnModel& model, const BeatSegment& segment) {
  if (segment.samples.size() != kSegmentLength) throw Error(ErrorCode::ShapeMismatch, "segment length must be 180");
  if (!is_normalized(segment)) throw Error(ErrorCode::UnnormalizedInput, "segment is not min-max normalized");
  Prediction p{ClassLabel::N, model.probabilities(segment.samples)};
  p.label = static_cast<ClassLabel>(std::max_element(p.probabilities.begin(), p.probabilities.end()) -
                                    p.probabilities.begin());
  return p;
}

namespace {

void shuffle(std::vector<std::size_t>& v, SplitMix& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

std::pair<double, double> evaluate(const CnnModel& m, const std::vector<const BeatSegment*>& data) {
  double loss = 0.0;
  std::size_t correct = 0;
  for (const auto* s : data) {
    const auto f = forward(m, s->samples, {});
    loss += cross_entropy(f.z2, *s->label);
    const auto arg = static_cast<std::size_t>(std::max_element(f.p.begin(), f.p.end()) - f.p.begin());
    if (arg == static_cast<std::size_t>(*s->label)) ++correct;
  }
  const double n = static_cast<double>(data.size());
  return {loss / n, static_cast<double>(correct) / n};
}

}  // namespace

TrainResult train(CnnModel& model, const std::vector<BeatSegment>& dataset, const TrainConfig& config) {
  if (dataset.empty()) throw Error(ErrorCode::EmptyInput, "empty training set");
  if (config.batch == 0) throw Error(ErrorCode::BadRequest, "batch must be positive");
  std::vector<const BeatSegment*> ordered;
  for (const auto& s : dataset) {
    if (!s.label) throw Error(ErrorCode::ClassMissing, "unlabelled training example");
    if (s.samples.size() != kSegmentLength) throw Error(ErrorCode::ShapeMismatch, "segment length must be 180");
    ordered.push_back(&s);
  }
  std::sort(ordered.begin(), ordered.end(), [](const BeatSegment* a, const BeatSegment* b) {
    if (*a->label != *b->label) return *a->label < *b->label;
    if (a->samples != b->samples) return a->samples < b->samples;
    return a->center_index < b->center_index;
  });

  const auto& hp = model.hyperparameters();
  SplitMix split_rng(hp.seed ^ 0x5EED5EED5EEDULL);
  std::vector<const BeatSegment*> train_set, val_set;
  for (auto c : kAllClasses) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < ordered.size(); ++i) {
      if (*ordered[i]->label == c) idx.push_back(i);
    }
    if (idx.size() < 2) {
      throw Error(ErrorCode::ClassMissing, std::string("class ") + label_char(c) + " has fewer than two examples");
    }
    shuffle(idx, split_rng);
    auto n_val = static_cast<std::size_t>(std::llround(config.validation_fraction * static_cast<double>(idx.size())));
    n_val = std::clamp<std::size_t>(n_val, config.validation_fraction > 0 ? 1 : 0, idx.size() - 1);
    for (std::size_t k = 0; k < idx.size(); ++k) (k < n_val ? val_set : train_set).push_back(ordered[idx[k]]);
  }

  TrainResult result;
  result.train_size = train_set.size();
  result.val_size = val_set.size();
  const std::size_t F = hp.filters, L = model.conv_length();
  const double keep = 1.0 - hp.dropout;
  SplitMix order_rng(hp.seed ^ 0x0DDBA11ULL);
  SplitMix dropout_rng(hp.seed ^ 0xD209017ULL);
  std::vector<double> grad(model.parameters().size());
  std::vector<double> mask(F * L, 1.0);
  std::vector<std::size_t> order(train_set.size());

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    shuffle(order, order_rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch) {
      const std::size_t end = std::min(order.size(), start + config.batch);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t k = start; k < end; ++k) {
        std::span<const double> m;
        if (hp.dropout > 0.0) {
          for (auto& v : mask) v = dropout_rng.uniform() < keep ? 1.0 / keep : 0.0;
          m = mask;
        }
        const auto* s = train_set[order[k]];
        model.loss_and_gradient(s->samples, *s->label, grad, m);
      }
      const double step = hp.learning_rate / static_cast<double>(end - start);
      auto P = model.parameters();
      for (std::size_t i = 0; i < P.size(); ++i) P[i] -= step * grad[i];
    }
    const auto [tl, ta] = evaluate(model, train_set);
    const auto [vl, va] = val_set.empty() ? std::pair{0.0, 0.0} : evaluate(model, val_set);
    result.history.push_back({tl, ta, vl, va});
  }
  return result;
}

double grad_check(const CnnModel& model, const BeatSegment& sample) {
  if (!sample.label) throw Error(ErrorCode::ClassMissing, "grad_check needs a labelled sample");
  const ClassLabel y = *sample.label;
  const auto& x = sample.samples;
  std::vector<double> analytic(model.parameters().size(), 0.0);
  model.loss_and_gradient(x, y, analytic);

  CnnModel work = model;
  auto P = work.parameters();
  const auto& l = work.layout();
  const auto& hp = work.hyperparameters();
  const std::size_t H = hp.hidden, FL = hp.filters * work.conv_length();
  const Forward base = forward(work, x, {});
  constexpr double eps = 1e-5;

  // Loss after changing only dense1 unit h (its pre-activation recomputed in full).
  auto loss_unit = [&](std::size_t h) {
    auto h1 = base.h1;
    h1[h] = std::tanh(dense1_unit(&P[l.d1_w + h * FL], P[l.d1_b + h], base.dropped));
    std::array<double, kNumClasses> z2{};
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      double s = P[l.out_b + c];
      for (std::size_t k = 0; k < H; ++k) s += P[l.out_w + c * H + k] * h1[k];
      z2[c] = s;
    }
    return cross_entropy(z2, y);
  };
  auto loss_for = [&](std::size_t i) {
    if (i >= l.d1_w && i < l.d1_b) return loss_unit((i - l.d1_w) / FL);
    if (i >= l.d1_b && i < l.out_w) return loss_unit(i - l.d1_b);
    if (i >= l.out_w) {
      std::array<double, kNumClasses> z2{};
      for (std::size_t c = 0; c < kNumClasses; ++c) {
        double s = P[l.out_b + c];
        for (std::size_t k = 0; k < H; ++k) s += P[l.out_w + c * H + k] * base.h1[k];
        z2[c] = s;
      }
      return cross_entropy(z2, y);
    }
    return cross_entropy(forward(work, x, {}).z2, y);
  };

  double worst = 0.0;
  for (std::size_t i = 0; i < P.size(); ++i) {
    const double saved = P[i];
    P[i] = saved + eps;
    const double up = loss_for(i);
    P[i] = saved - eps;
    const double down = loss_for(i);
    P[i] = saved;
    const double numeric = (up - down) / (2.0 * eps);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

// ---- corpus ----------------------------------------------------------------

std::vector<BeatSegment> load_corpus_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read corpus " + path.string());
  std::vector<BeatSegment> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    const auto where = path.string() + ":" + std::to_string(lineno);
    if (fields.size() != kSegmentLength + 1) {
      throw Error(ErrorCode::ShapeMismatch, where + ": expected 181 fields, got " + std::to_string(fields.size()));
    }
    BeatSegment s;
    s.samples.reserve(kSegmentLength);
    for (std::size_t i = 0; i < kSegmentLength; ++i) {
      try {
        s.samples.push_back(std::stod(fields[i]));
      } catch (const std::exception&) {
        throw Error(ErrorCode::BadRequest, where + ": bad value '" + fields[i] + "'");
      }
    }
    auto label_text = fields.back();
    label_text.erase(0, label_text.find_first_not_of(' '));
    if (label_text.size() != 1 || !label_from_char(label_text[0])) {
      throw Error(ErrorCode::BadRequest, where + ": bad label '" + fields.back() + "'");
    }
    s.label = label_from_char(label_text[0]);
    out.push_back(std::move(s));
  }
  return out;
}

void save_corpus_csv(const std::filesystem::path& path, const std::vector<BeatSegment>& corpus) {
  std::ofstream out(path);
  out.precision(17);
  for (const auto& s : corpus) {
    if (!s.label || s.samples.size() != kSegmentLength) {
      throw Error(ErrorCode::ShapeMismatch, "corpus rows need 180 samples and a label");
    }
    for (double v : s.samples) out << v << ',';
    out << label_char(*s.label) << '\n';
  }
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write corpus " + path.string());
}

std::vector<BeatSegment> synthetic_corpus(std::size_t per_class, std::uint64_t seed, double noise_std) {
  std::vector<BeatSegment> out;
  SplitMix rng(seed);
  for (auto c : kAllClasses) {
    std::size_t have = 0;
    while (have < per_class) {
      signal::SynthProfile p;
      p.class_mix.fill(0.0);
      p.class_mix[static_cast<std::size_t>(c)] = 1.0;
      p.bpm = 50.0 + 50.0 * rng.uniform();
      p.rr_jitter = 0.02;
      p.noise_std = noise_std;
      p.seed = rng.next();
      const auto w = signal::synth(p, 30.0, kModelRateHz);
      for (auto& s : segment_beats(w, *w.truth_peaks).segments) {
        if (have == per_class) break;
        out.push_back(normalize(s));
        ++have;
      }
    }
  }
  return out;
}

}  // namespace hv::classifier
