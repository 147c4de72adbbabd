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

#include "bleu.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "error.hpp"

namespace tabinv {

namespace {

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::map<std::vector<std::string>, int> ngram_counts(
    const std::vector<std::string>& tokens, std::size_t n) {
  std::map<std::vector<std::string>, int> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

}  // namespace

void BleuStats::add(const std::string& candidate, const std::string& reference) {
  const std::vector<std::string> cand = words(candidate);
  const std::vector<std::string> ref = words(reference);
  candidate_length += static_cast<double>(cand.size());
  reference_length += static_cast<double>(ref.size());
  for (std::size_t n = 1; n <= kBleuOrder; ++n) {
    const auto c = ngram_counts(cand, n);
    const auto r = ngram_counts(ref, n);
    for (const auto& [gram, count] : c) {
      total[n - 1] += count;
      auto it = r.find(gram);
      if (it != r.end()) matched[n - 1] += std::min(count, it->second);
    }
  }
}

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  for (std::size_t n = 0; n < kBleuOrder; ++n) {
    matched[n] += other.matched[n];
    total[n] += other.total[n];
  }
  candidate_length += other.candidate_length;
  reference_length += other.reference_length;
  return *this;
}

double BleuStats::score() const {
  if (candidate_length == 0.0) return 0.0;
  double log_sum = 0.0;
  int orders = 0;
  for (std::size_t n = 0; n < kBleuOrder; ++n) {
    if (total[n] == 0.0) continue;
    const double hits = matched[n] > 0.0 ? matched[n] : kBleuSmoothing;
    log_sum += std::log(hits / total[n]);
    ++orders;
  }
  const double brevity =
      candidate_length < reference_length
          ? std::exp(1.0 - reference_length / candidate_length)
          : 1.0;
  return 100.0 * brevity * std::exp(log_sum / orders);
}

double bleu4(std::span<const std::string> candidates,
             std::span<const std::string> references) {
  if (candidates.size() != references.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "got " + std::to_string(candidates.size()) + " candidates and " +
                    std::to_string(references.size()) + " references");
  }
  if (candidates.empty()) {
    throw Error(ErrorCode::kLengthMismatch, "BLEU needs at least one pair");
  }
  BleuStats stats;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    stats.add(candidates[i], references[i]);
  }
  return stats.score();
}

}  // namespace tabinv
