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

#ifndef TABINV_CORE_BLEU_HPP_
#define TABINV_CORE_BLEU_HPP_

#include <array>
#include <span>
#include <string>

namespace tabinv {

inline constexpr int kBleuOrder = 4;
inline constexpr double kBleuSmoothing = 0.1;

// Corpus-level n-gram statistics; order-independent so shards can be merged.
struct BleuStats {
  std::array<double, kBleuOrder> matched{};
  std::array<double, kBleuOrder> total{};
  double candidate_length = 0.0;
  double reference_length = 0.0;

  void add(const std::string& candidate, const std::string& reference);
  BleuStats& operator+=(const BleuStats& other);

  // Geometric mean of clipped n-gram precisions (n = 1..4) times the brevity
  // penalty, scaled to [0, 100]. An order with matches but zero hits uses
  // kBleuSmoothing as its numerator; orders with no candidate n-grams at all
  // are left out of the mean.
  double score() const;
};

// Whitespace-tokenized corpus BLEU-4 with one reference per candidate.
// Throws Error(kLengthMismatch) for unequal lengths or an empty corpus.
double bleu4(std::span<const std::string> candidates,
             std::span<const std::string> references);

}  // namespace tabinv

#endif  // TABINV_CORE_BLEU_HPP_
