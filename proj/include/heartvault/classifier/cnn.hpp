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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "heartvault/classifier/label.hpp"
#include "heartvault/common/bytes.hpp"
#include "heartvault/signal/synth.hpp"

namespace hv::classifier {

inline constexpr std::size_t kSegmentLength = 180;
inline constexpr std::size_t kSegmentCenter = 90;
inline constexpr double kModelRateHz = 360.0;

struct BeatSegment {
  std::vector<double> samples;  // kSegmentLength values
  std::optional<ClassLabel> label;
  std::size_t center_index = 0;
};

struct Segmentation {
  std::vector<BeatSegment> segments;
  std::size_t skipped = 0;
};

/// One segment per peak whose window [p - 90, p + 90) fits; the rest are
/// counted in `skipped`. Labels are copied from truth_labels when peaks are
/// the window's truth peaks.
Segmentation segment_beats(const signal::SignalWindow& window, std::span<const std::size_t> peaks);

/// Min-max scaling to [0, 1]; a flat segment maps to all 0.5.
BeatSegment normalize(const BeatSegment& segment);
bool is_normalized(const BeatSegment& segment, double tol = 1e-6);

/// Linear-interpolation resampling of a window (and its truth peaks) to
/// `fs_to`. Used to feed 50 Hz captures to a 360 Hz model.
signal::SignalWindow resample(const signal::SignalWindow& window, double fs_to);
std::size_t map_index(std::size_t index, double fs_from, double fs_to);

struct Hyperparameters {
  std::uint32_t filters = 16;
  std::uint32_t width = 7;
  std::uint32_t hidden = 32;
  double learning_rate = 0.01;
  double dropout = 0.3;
  std::uint64_t seed = 1;
};

/// conv(F x W, valid) -> tanh -> dropout -> dense(hidden) -> tanh -> dense(5) -> softmax.
/// Parameters live in one flat vector in the order
/// conv_w[F][W], conv_b[F], d1_w[H][F*L], d1_b[H], out_w[5][H], out_b[5]
/// where L = 180 - W + 1.
class CnnModel {
 public:
  struct Layout {
    std::size_t conv_w, conv_b, d1_w, d1_b, out_w, out_b, total;
  };

  /// Xavier-uniform weights from the seed; zero biases.
  explicit CnnModel(const Hyperparameters& hp = {});
  static CnnModel zeros(const Hyperparameters& hp = {});

  const Hyperparameters& hyperparameters() const { return hp_; }
  Hyperparameters& hyperparameters() { return hp_; }
  std::size_t conv_length() const { return kSegmentLength - hp_.width + 1; }
  const Layout& layout() const { return layout_; }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  /// Softmax probabilities, dropout disabled.
  std::array<double, kNumClasses> probabilities(std::span<const double> x) const;

  /// Cross-entropy of one example scaled by `loss_scale`; gradient is added
  /// into `grad` (size = parameter count) when given. `dropout_mask`, if
  /// non-empty, multiplies the conv activations (already inverse-scaled).
  double loss_and_gradient(std::span<const double> x, ClassLabel y, std::span<double> grad,
                           std::span<const double> dropout_mask = {}, double loss_scale = 1.0) const;

  Bytes serialize() const;
  static CnnModel deserialize(ByteView bytes);
  void save(const std::filesystem::path& path) const;
  static CnnModel load(const std::filesystem::path& path);

 private:
  struct ZeroTag {};
  CnnModel(const Hyperparameters& hp, ZeroTag);

  Hyperparameters hp_;
  Layout layout_;
  std::vector<double> params_;
};

struct Prediction {
  ClassLabel label;
  std::array<double, kNumClasses> probabilities;
};

/// Throws UnnormalizedInput unless the segment has min 0 and max 1 (or is
/// the flat all-0.5 case) within 1e-6, ShapeMismatch on wrong length.
Prediction predict(const CnnModel& model, const BeatSegment& segment);

struct EpochStats {
  double train_loss;      // mean cross-entropy on the training split, dropout off
  double train_accuracy;
  double val_loss;
  double val_accuracy;
};

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch = 32;
  double validation_fraction = 0.2;
};

struct TrainResult {
  std::vector<EpochStats> history;
  std::size_t train_size = 0;
  std::size_t val_size = 0;
};

/// Mini-batch SGD on mean cross-entropy. The dataset is put in a canonical
/// order first, so the result does not depend on the caller's ordering.
/// The validation split is stratified. Throws ClassMissing when a class has
/// fewer than two examples, EmptyInput on an empty dataset.
TrainResult train(CnnModel& model, const std::vector<BeatSegment>& dataset, const TrainConfig& config = {});

/// Max over all parameters of |analytic - numeric| / max(|analytic|, |numeric|, 1e-6)
/// using central differences with step 1e-5.
double grad_check(const CnnModel& model, const BeatSegment& sample);

/// CSV corpus: one row per beat, 180 comma-separated values then the label
/// letter (N, L, R, A or V).
std::vector<BeatSegment> load_corpus_csv(const std::filesystem::path& path);
void save_corpus_csv(const std::filesystem::path& path, const std::vector<BeatSegment>& corpus);

/// Normalized, labelled beats from noise-free synthetic windows at 360 Hz,
/// `per_class` beats of each class with varied heart rates.
std::vector<BeatSegment> synthetic_corpus(std::size_t per_class, std::uint64_t seed, double noise_std = 0.0);

}  // namespace hv::classifier
