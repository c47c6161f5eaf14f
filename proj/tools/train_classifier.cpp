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

// Trains the beat classifier on a CSV corpus or on synthetic beats and
// writes the model file.

#include <iomanip>
#include <iostream>

#include "CLI11.hpp"

#include "heartvault/classifier/cnn.hpp"
#include "tool_util.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Beat classifier training"};
  std::string corpus, out = "model.bin", dump_corpus;
  std::size_t synthetic = 0;
  std::uint64_t corpus_seed = 7;
  double noise = 0.02;
  hv::classifier::Hyperparameters hp;
  hv::classifier::TrainConfig tc;
  app.add_option("--corpus", corpus, "CSV corpus (180 values then the label letter per row)");
  app.add_option("--synthetic", synthetic, "Use N synthetic beats per class instead of a corpus");
  app.add_option("--corpus-seed", corpus_seed, "Seed of the synthetic corpus");
  app.add_option("--noise", noise, "Noise std of the synthetic corpus");
  app.add_option("--save-corpus", dump_corpus, "Also write the corpus used as CSV");
  app.add_option("--epochs", tc.epochs)->check(CLI::PositiveNumber);
  app.add_option("--batch", tc.batch)->check(CLI::PositiveNumber);
  app.add_option("--val", tc.validation_fraction, "Validation fraction")->check(CLI::Range(0.0, 0.9));
  app.add_option("--lr", hp.learning_rate);
  app.add_option("--filters", hp.filters);
  app.add_option("--width", hp.width);
  app.add_option("--hidden", hp.hidden);
  app.add_option("--dropout", hp.dropout)->check(CLI::Range(0.0, 0.95));
  app.add_option("--seed", hp.seed, "Weight initialisation and shuffling seed");
  app.add_option("--out", out, "Model file");
  CLI11_PARSE(app, argc, argv);

  return hvtool::guarded("train_classifier", [&] {
    if (corpus.empty() == (synthetic == 0)) {
      throw hv::Error(hv::ErrorCode::BadRequest, "give exactly one of --corpus and --synthetic");
    }
    const auto data = corpus.empty() ? hv::classifier::synthetic_corpus(synthetic, corpus_seed, noise)
                                     : hv::classifier::load_corpus_csv(corpus);
    if (!dump_corpus.empty()) hv::classifier::save_corpus_csv(dump_corpus, data);
    hv::classifier::CnnModel model(hp);
    const auto res = hv::classifier::train(model, data, tc);
    std::cout << "train " << res.train_size << " beats, validation " << res.val_size << "\n";
    std::cout << "epoch  train_loss  train_acc  val_loss  val_acc\n";
    std::cout << std::fixed;
    for (std::size_t e = 0; e < res.history.size(); ++e) {
      const auto& h = res.history[e];
      std::cout << std::setw(5) << e + 1 << std::setprecision(4) << std::setw(12) << h.train_loss << std::setw(11)
                << h.train_accuracy << std::setw(10) << h.val_loss << std::setw(9) << h.val_accuracy << "\n";
    }
    model.save(out);
    std::cout << "model written to " << out << "\n";
    return 0;
  });
}
