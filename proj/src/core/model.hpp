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

#ifndef TABINV_CORE_MODEL_HPP_
#define TABINV_CORE_MODEL_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "linearizer.hpp"
#include "structure.hpp"

namespace tabinv {

using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ModelConfig {
  std::size_t d_model = 32;
  std::size_t n_heads = 4;
  std::size_t n_enc_layers = 2;
  std::size_t n_dec_layers = 2;
  std::size_t d_ff = 64;
  int p_max = kDefaultPMax;
  bool use_structure_mask = true;
  bool use_invariant_relpos = true;
  std::size_t vocab_size = 0;
  std::size_t max_decode_len = 128;
  std::uint64_t seed = 0;

  // Throws Error(kInvalidArgument).
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

// Named parameter tensors in a fixed order. Gradients and optimizer moments
// use the same layout.
struct ParameterSet {
  std::vector<std::string> names;
  std::vector<Matrix> tensors;

  std::size_t size() const { return tensors.size(); }
  std::size_t count() const;
  ParameterSet zeros_like() const;
  void set_zero();
  bool all_finite() const;
  std::size_t index_of(const std::string& name) const;
};

// One input with its precomputed layout structure.
struct EncoderInput {
  std::vector<TokenId> tokens;
  StructureMask mask;
  RelPosMatrix relpos;
};

struct TrainingExample {
  EncoderInput input;
  std::vector<TokenId> target_ids;  // BOS y_1 .. y_n EOS
};

EncoderInput make_encoder_input(const LinearizedSequence& seq, int p_max);
TrainingExample make_training_example(const LinearizedSequence& seq,
                                      std::vector<TokenId> target_ids,
                                      int p_max);

// Small pre-norm encoder-decoder. The encoder's self-attention optionally
// drops structurally disallowed pairs and indexes its per-head position bias
// by the field-aware relative positions; the decoder uses causal attention
// with clamped linear distances, and cross-attention has no position bias.
// Output logits reuse the token embeddings.
class ToyModel {
 public:
  explicit ToyModel(const ModelConfig& config);
  ToyModel(const ModelConfig& config, ParameterSet params);

  const ModelConfig& config() const { return config_; }
  const ParameterSet& params() const { return params_; }
  ParameterSet& params() { return params_; }

  // One row per input token. Throws Error(kDimensionMismatch).
  Matrix encode(const EncoderInput& input) const;

  // Per-head attention probabilities of encoder layer `layer`.
  std::vector<Matrix> encoder_attention(const EncoderInput& input,
                                        std::size_t layer) const;

  // Logits (rows = decoder positions) for teacher-forced decoder input.
  Matrix decoder_logits(const Matrix& memory,
                        std::span<const TokenId> decoder_tokens) const;

  // Per-head probabilities of decoder self-attention in layer `layer`.
  std::vector<Matrix> decoder_self_attention(
      const Matrix& memory, std::span<const TokenId> decoder_tokens,
      std::size_t layer) const;

  // Summed token NLL of one example; accumulates scale * d(loss)/d(params)
  // into grads when non-null.
  double example_loss(const TrainingExample& ex, ParameterSet* grads,
                      double scale) const;

 private:
  ModelConfig config_;
  ParameterSet params_;
};

// Mean over examples of summed per-token negative log-likelihood.
// Throws Error(kEmptyBatch).
double nll_loss(const ToyModel& model, std::span<const TrainingExample> batch);

// Same loss, with gradients written into grads (resized as needed).
double loss_and_gradients(const ToyModel& model,
                          std::span<const TrainingExample> batch,
                          ParameterSet& grads);

class AdamOptimizer {
 public:
  explicit AdamOptimizer(double lr, double beta1 = 0.9, double beta2 = 0.999,
                         double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(ParameterSet& params, const ParameterSet& grads);

  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }
  std::uint64_t steps() const { return t_; }

 private:
  double lr_;
  double beta1_;
  double beta2_;
  double eps_;
  std::uint64_t t_ = 0;
  ParameterSet m_;
  ParameterSet v_;
};

// One Adam update; returns the loss before the update. Throws
// Error(kNonFiniteLoss) without touching the parameters if the loss or any
// gradient is not finite.
double train_step(ToyModel& model, AdamOptimizer& optimizer,
                  std::span<const TrainingExample> batch);

// Argmax decoding from BOS until EOS or max_decode_len tokens; ties go to the
// lowest token id. BOS/EOS are not included in the result.
std::vector<TokenId> greedy_decode(const ToyModel& model,
                                   const EncoderInput& input);
std::vector<TokenId> greedy_decode(const ToyModel& model,
                                   const EncoderInput& input,
                                   std::size_t max_len);

// Length-normalized beam search; beam == 1 equals greedy_decode. The greedy
// hypothesis competes in the final selection.
std::vector<TokenId> beam_decode(const ToyModel& model,
                                 const EncoderInput& input, std::size_t beam,
                                 std::size_t max_len);

// Mean log-probability per scored token of `tokens` (EOS appended when
// `finished`).
double sequence_score(const ToyModel& model, const EncoderInput& input,
                      std::span<const TokenId> tokens, bool finished);

}  // namespace tabinv

#endif  // TABINV_CORE_MODEL_HPP_
