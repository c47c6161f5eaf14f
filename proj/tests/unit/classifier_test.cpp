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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "heartvault/classifier/cnn.hpp"
#include "heartvault/common/error.hpp"

using namespace hv;
using namespace hv::classifier;

namespace {

Hyperparameters small(std::uint64_t seed) {
  Hyperparameters hp;
  hp.filters = 3;
  hp.width = 5;
  hp.hidden = 6;
  hp.seed = seed;
  return hp;
}

BeatSegment random_segment(signal::SplitMix& rng, ClassLabel label) {
  BeatSegment s;
  for (std::size_t i = 0; i < kSegmentLength; ++i) s.samples.push_back(rng.uniform());
  s.label = label;
  return normalize(s);
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("hv_classifier_" + name);
}

}  // namespace

TEST(Segment, BoundaryCases) {
  signal::SignalWindow w;
  w.fs_hz = 360;
  w.samples.resize(180);
  std::iota(w.samples.begin(), w.samples.end(), 0.0);
  const std::size_t at90[] = {90};
  auto r = segment_beats(w, at90);
  ASSERT_EQ(r.segments.size(), 1u);
  EXPECT_EQ(r.segments[0].samples.front(), 0.0);
  EXPECT_EQ(r.segments[0].samples.back(), 179.0);
  EXPECT_EQ(r.segments[0].center_index, 90u);
  const std::size_t at10[] = {10};
  r = segment_beats(w, at10);
  EXPECT_TRUE(r.segments.empty());
  EXPECT_EQ(r.skipped, 1u);
  const std::size_t at91[] = {91};
  EXPECT_EQ(segment_beats(w, at91).skipped, 1u);
}

TEST(Segment, CountMatchesInteriorTruthPeaks) {
  signal::SynthProfile p;
  auto w = signal::synth(p, 60.0, 360.0);
  const auto& peaks = *w.truth_peaks;
  const auto interior = std::count_if(peaks.begin(), peaks.end(),
                                      [&](std::size_t k) { return k >= 90 && k + 90 <= w.samples.size(); });
  auto r = segment_beats(w, peaks);
  EXPECT_EQ(r.segments.size(), static_cast<std::size_t>(interior));
  EXPECT_EQ(r.segments.size() + r.skipped, peaks.size());
  for (const auto& s : r.segments) EXPECT_EQ(s.label, ClassLabel::N);
}

TEST(Normalize, RampConstantAndIdempotence) {
  BeatSegment ramp;
  for (int i = 0; i < 180; ++i) ramp.samples.push_back(i);
  auto n = normalize(ramp);
  EXPECT_EQ(n.samples.front(), 0.0);
  EXPECT_EQ(n.samples.back(), 1.0);
  EXPECT_NEAR(n.samples[90], 90.0 / 179.0, 1e-15);

  BeatSegment flat;
  flat.samples.assign(180, 3.3);
  for (double v : normalize(flat).samples) EXPECT_EQ(v, 0.5);

  signal::SplitMix rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    BeatSegment s;
    const double scale = std::exp(10.0 * rng.uniform() - 5.0);
    for (int i = 0; i < 180; ++i) s.samples.push_back(scale * (rng.normal() + 7.0));
    const auto once = normalize(s);
    const auto twice = normalize(once);
    for (std::size_t i = 0; i < 180; ++i) ASSERT_NEAR(once.samples[i], twice.samples[i], 1e-12);
    EXPECT_TRUE(is_normalized(once));
  }
}

TEST(Resample, FiftyToThreeSixtyKeepsPeaks) {
  signal::SynthProfile p;
  auto w = signal::synth(p, 20.0, 50.0);
  auto r = resample(w, 360.0);
  EXPECT_EQ(r.samples.size(), 7200u);
  ASSERT_EQ(r.truth_peaks->size(), w.truth_peaks->size());
  for (std::size_t i = 0; i < w.truth_peaks->size(); ++i) {
    EXPECT_EQ((*r.truth_peaks)[i], (*w.truth_peaks)[i] * 36 / 5);
    EXPECT_DOUBLE_EQ(r.samples[(*r.truth_peaks)[i]], w.samples[(*w.truth_peaks)[i]]);
  }
}

TEST(Model, ShapesFollowHyperparameters) {
  CnnModel m;
  EXPECT_EQ(m.conv_length(), 174u);
  EXPECT_EQ(m.layout().total, 16u * 7 + 16 + 32u * 16 * 174 + 32 + 5 * 32 + 5);
  Hyperparameters bad;
  bad.width = 181;
  EXPECT_THROW(CnnModel{bad}, Error);
  bad = {};
  bad.hidden = 0;
  EXPECT_THROW(CnnModel{bad}, Error);
}

TEST(Predict, ZeroModelIsUniform) {
  auto m = CnnModel::zeros();
  signal::SplitMix rng(1);
  auto s = random_segment(rng, ClassLabel::N);
  auto p = predict(m, s);
  for (double v : p.probabilities) EXPECT_NEAR(v, 0.2, 1e-15);
}

TEST(Predict, ProbabilitiesSumToOne) {
  signal::SplitMix rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    CnnModel m(small(rng.next()));
    for (auto& v : m.parameters()) v *= 1.0 + 20.0 * rng.uniform();
    auto p = predict(m, random_segment(rng, ClassLabel::A));
    EXPECT_NEAR(std::accumulate(p.probabilities.begin(), p.probabilities.end(), 0.0), 1.0, 1e-9);
  }
}

TEST(Predict, RejectsUnnormalizedInput) {
  CnnModel m(small(1));
  BeatSegment s;
  s.samples.assign(180, 0.2);
  s.samples[3] = 2.0;
  try {
    predict(m, s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnnormalizedInput);
  }
  s.samples.resize(179);
  EXPECT_THROW(predict(m, s), Error);
}

TEST(GradCheck, RandomSmallModels) {
  signal::SplitMix rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    Hyperparameters hp = small(rng.next());
    hp.filters = 1 + rng.below(4);
    hp.width = 1 + rng.below(9);
    hp.hidden = 1 + rng.below(8);
    CnnModel m(hp);
    for (auto& v : m.parameters()) v += 0.1 * rng.normal();
    auto s = random_segment(rng, static_cast<ClassLabel>(rng.below(5)));
    EXPECT_LE(grad_check(m, s), 1e-4) << "trial " << trial;
  }
}

TEST(GradCheck, DefaultModel) {
  CnnModel m;
  signal::SplitMix rng(5);
  EXPECT_LE(grad_check(m, random_segment(rng, ClassLabel::V)), 1e-4);
}

TEST(GradCheck, ZeroModelOutputGradientIsPMinusY) {
  auto m = CnnModel::zeros(small(1));
  signal::SplitMix rng(9);
  auto s = random_segment(rng, ClassLabel::R);
  std::vector<double> g(m.parameters().size(), 0.0);
  m.loss_and_gradient(s.samples, ClassLabel::R, g);
  const auto& l = m.layout();
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const double expect = 0.2 - (c == 2 ? 1.0 : 0.0);
    EXPECT_NEAR(g[l.out_b + c], expect, 1e-6);
    // Numerically, the same entry.
    auto w = m;
    w.parameters()[l.out_b + c] += 1e-5;
    const double up = w.loss_and_gradient(s.samples, ClassLabel::R, {});
    w.parameters()[l.out_b + c] -= 2e-5;
    const double down = w.loss_and_gradient(s.samples, ClassLabel::R, {});
    EXPECT_NEAR((up - down) / 2e-5, expect, 1e-6);
  }
  EXPECT_LE(grad_check(m, s), 1e-4);
}

TEST(GradCheck, LossScaleIsLinear) {
  CnnModel m(small(4));
  signal::SplitMix rng(4);
  auto s = random_segment(rng, ClassLabel::L);
  std::vector<double> g1(m.parameters().size(), 0.0), g2(g1.size(), 0.0);
  m.loss_and_gradient(s.samples, ClassLabel::L, g1, {}, 1.0);
  m.loss_and_gradient(s.samples, ClassLabel::L, g2, {}, 2.0);
  for (std::size_t i = 0; i < g1.size(); ++i) {
    if (g1[i] == 0.0) {
      EXPECT_EQ(g2[i], 0.0);
    } else {
      EXPECT_NEAR(g2[i] / g1[i], 2.0, 2e-9);
    }
  }
}

TEST(Train, SingleClassDatasetIsRejected) {
  signal::SplitMix rng(1);
  std::vector<BeatSegment> data;
  for (int i = 0; i < 20; ++i) data.push_back(random_segment(rng, ClassLabel::N));
  CnnModel m(small(1));
  try {
    train(m, data);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ClassMissing);
  }
  EXPECT_THROW(train(m, {}), Error);
}

TEST(Train, DeterministicAndOrderIndependent) {
  auto corpus = synthetic_corpus(12, 3);
  Hyperparameters hp = small(8);
  TrainConfig cfg;
  cfg.epochs = 3;
  CnnModel a(hp), b(hp), c(hp);
  const auto ha = train(a, corpus, cfg);
  const auto hb = train(b, corpus, cfg);
  std::reverse(corpus.begin(), corpus.end());
  const auto hc = train(c, corpus, cfg);
  ASSERT_EQ(ha.history.size(), 3u);
  for (std::size_t e = 0; e < 3; ++e) {
    EXPECT_EQ(ha.history[e].train_loss, hb.history[e].train_loss);
    EXPECT_EQ(ha.history[e].train_loss, hc.history[e].train_loss);
  }
  EXPECT_TRUE(std::equal(a.parameters().begin(), a.parameters().end(), b.parameters().begin()));
  EXPECT_TRUE(std::equal(a.parameters().begin(), a.parameters().end(), c.parameters().begin()));
  EXPECT_EQ(ha.val_size, 5u * 2);  // round(0.2 * 12) per class
}

TEST(ModelFile, RoundTripAndCorruption) {
  CnnModel m(small(6));
  const auto bytes = m.serialize();
  auto back = CnnModel::deserialize(bytes);
  EXPECT_TRUE(std::equal(m.parameters().begin(), m.parameters().end(), back.parameters().begin()));
  EXPECT_EQ(back.hyperparameters().hidden, 6u);
  EXPECT_EQ(bytes.size(), 8 + 16 + 24 + 8 + 8 * m.parameters().size());

  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(CnnModel::deserialize(bad), Error);
  bad = bytes;
  bad.pop_back();
  try {
    CnnModel::deserialize(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BadModelFile);
  }
  bad = bytes;
  bad.push_back(0);
  EXPECT_THROW(CnnModel::deserialize(bad), Error);
  EXPECT_THROW(CnnModel::deserialize(ByteView(bytes.data(), 10)), Error);

  const auto path = temp_path("model.bin");
  m.save(path);
  auto loaded = CnnModel::load(path);
  EXPECT_TRUE(std::equal(m.parameters().begin(), m.parameters().end(), loaded.parameters().begin()));
  std::filesystem::remove(path);
}

TEST(Corpus, CsvRoundTrip) {
  auto corpus = synthetic_corpus(3, 1);
  const auto path = temp_path("corpus.csv");
  save_corpus_csv(path, corpus);
  auto back = load_corpus_csv(path);
  ASSERT_EQ(back.size(), corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    EXPECT_EQ(back[i].samples, corpus[i].samples);
    EXPECT_EQ(back[i].label, corpus[i].label);
  }
  std::filesystem::remove(path);
}

TEST(Corpus, CsvRejectsMalformedRows) {
  const auto path = temp_path("bad.csv");
  {
    std::ofstream out(path);
    out << "1,2,3,N\n";
  }
  EXPECT_THROW(load_corpus_csv(path), Error);
  {
    std::ofstream out(path);
    for (int i = 0; i < 180; ++i) out << "0.5,";
    out << "Q\n";
  }
  EXPECT_THROW(load_corpus_csv(path), Error);
  std::filesystem::remove(path);
}

TEST(Train, SyntheticCorpusReachesTarget) {
  const auto corpus = synthetic_corpus(200, 2024);
  CnnModel m;
  const auto r = train(m, corpus);
  ASSERT_EQ(r.history.size(), 10u);
  EXPECT_GE(r.history.back().val_accuracy, 0.95);
  int increases = 0;
  for (std::size_t e = 1; e < r.history.size(); ++e) {
    if (r.history[e].train_loss > r.history[e - 1].train_loss) ++increases;
  }
  EXPECT_LE(increases, 1);

  for (auto c : kAllClasses) {
    signal::SynthProfile p;
    p.class_mix.fill(0.0);
    p.class_mix[static_cast<std::size_t>(c)] = 1.0;
    p.seed = 777;
    const auto w = signal::synth(p, 5.0, kModelRateHz);
    const auto seg = segment_beats(w, *w.truth_peaks);
    ASSERT_FALSE(seg.segments.empty());
    EXPECT_EQ(predict(m, normalize(seg.segments[1])).label, c) << label_char(c);
  }
}
