/* Copyright 2026 The tabinv Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef TABINV_CORE_PIPELINE_HPP_
#define TABINV_CORE_PIPELINE_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "linearizer.hpp"
#include "model.hpp"
#include "vocab.hpp"

namespace tabinv {

// Words of every title, cell and target in `data`.
Vocabulary build_vocabulary(const std::vector<Example>& data);

// A model together with everything needed to feed it tables.
class Generator {
 public:
  Generator(ModelConfig config, Vocabulary vocab, LinearizationFormat format,
            std::size_t max_input_len = kDefaultMaxInputLength);
  Generator(ToyModel model, Vocabulary vocab, LinearizationFormat format,
            std::size_t max_input_len);

  const ToyModel& model() const { return model_; }
  ToyModel& model() { return model_; }
  const Vocabulary& vocab() const { return vocab_; }
  LinearizationFormat format() const { return format_; }
  std::size_t max_input_len() const { return max_input_len_; }

  // Only the indexed (row-major) format lets layout reach the model.
  bool layout_invariant_input() const {
    return format_ != LinearizationFormat::kIndexed;
  }

  LinearizedSequence linearize(const Table& t) const;
  EncoderInput encoder_input(const Table& t) const;
  TrainingExample training_example(const Example& ex) const;

  // beam == 1 is greedy decoding; max_len == 0 uses the model's
  // max_decode_len.
  std::string generate(const Table& t, std::size_t beam = 1,
                       std::size_t max_len = 0) const;

 private:
  ToyModel model_;
  Vocabulary vocab_;
  LinearizationFormat format_;
  std::size_t max_input_len_;
};

struct TrainOptions {
  std::size_t steps = 1000;
  std::size_t batch_size = 8;
  double learning_rate = 2e-4;
  std::uint64_t seed = 0;
  std::size_t log_every = 0;
  std::function<void(std::size_t step, double loss)> on_log;
};

// Per-step losses (pre-update). Batches walk seeded epoch permutations.
std::vector<double> train(Generator& gen, const std::vector<Example>& data,
                          const TrainOptions& options);

void save_checkpoint(const Generator& gen, const std::string& path);
Generator load_checkpoint(const std::string& path);

struct EvalReport {
  double bleu_origin = 0.0;
  double bleu_transform = 0.0;
  double delta = 0.0;  // bleu_transform - bleu_origin
  std::vector<std::string> references;
  std::vector<std::string> origin_generations;
  std::vector<std::string> transform_generations;
  bool equality_asserted = false;
  std::size_t mismatches = 0;  // examples whose two generations differ
};

// Decodes `dev` and perturb_dataset(dev, seed). Per-example equality is
// asserted (counted in `mismatches`) when the input format is layout
// invariant.
EvalReport run_robustness_eval(const Generator& gen,
                               const std::vector<Example>& dev,
                               std::uint64_t seed, std::size_t beam = 1,
                               std::size_t max_len = 0);

struct AblationRow {
  std::string name;
  LinearizationFormat format = LinearizationFormat::kTotto;
  bool use_structure_mask = false;
  bool use_invariant_relpos = false;
  EvalReport report;
  double final_loss = 0.0;
};

// Baseline (row-major input, full attention, linear positions), structure
// mask only, and mask plus field-aware positions.
std::vector<AblationRow> ablation_grid();

// Trains one model per grid row on `train_data` and evaluates it on `test`.
std::vector<AblationRow> run_ablation(
    const std::vector<Example>& train_data, const std::vector<Example>& test,
    const ModelConfig& base, const TrainOptions& options, std::uint64_t seed,
    std::size_t beam = 1,
    const std::function<void(const AblationRow&)>& on_row = {});

}  // namespace tabinv

#endif  // TABINV_CORE_PIPELINE_HPP_
