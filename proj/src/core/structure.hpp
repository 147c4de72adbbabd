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

#ifndef TABINV_CORE_STRUCTURE_HPP_
#define TABINV_CORE_STRUCTURE_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "linearizer.hpp"

namespace tabinv {

inline constexpr int kDefaultPMax = 128;

// n x n attention permission matrix, row-major.
class StructureMask {
 public:
  StructureMask() = default;
  StructureMask(std::size_t n, bool fill) : n_(n), allowed_(n * n, fill) {}

  std::size_t size() const { return n_; }
  bool allowed(std::size_t i, std::size_t j) const {
    return allowed_[i * n_ + j] != 0;
  }
  void set(std::size_t i, std::size_t j, bool v) {
    allowed_[i * n_ + j] = v ? 1 : 0;
  }
  const std::vector<std::uint8_t>& data() const { return allowed_; }
  std::size_t count_allowed() const;

  bool operator==(const StructureMask&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> allowed_;
};

// n x n relative positions in [0, p_max], row-major.
class RelPosMatrix {
 public:
  RelPosMatrix() = default;
  RelPosMatrix(std::size_t n, int p_max)
      : n_(n), p_max_(p_max), p_(n * n, 0) {}

  std::size_t size() const { return n_; }
  int p_max() const { return p_max_; }
  int at(std::size_t i, std::size_t j) const { return p_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, int v) { p_[i * n_ + j] = v; }
  const std::vector<int>& data() const { return p_; }

  bool operator==(const RelPosMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  int p_max_ = kDefaultPMax;
  std::vector<int> p_;
};

// Attention is kept within a field, among metadata, between metadata and any
// cell, and between cells sharing a row id or a column id.
StructureMask build_mask(const LinearizedSequence& seq);

// min(|i-j|, p_max) inside a field or between two metadata tokens, p_max
// everywhere else. Throws Error(kInvalidPMax) if p_max < 1.
RelPosMatrix build_relpos(const LinearizedSequence& seq, int p_max);

// Plain clamped linear distance min(|i-j|, p_max).
RelPosMatrix linear_relpos(std::size_t n, int p_max);

// A permutation pi with b.token_ids[pi[i]] == a.token_ids[i] that maps whole
// fields onto fields of the same kind and contents while preserving which
// field pairs are structurally related. nullopt if none exists.
std::optional<std::vector<std::size_t>> induced_permutation(
    const LinearizedSequence& a, const LinearizedSequence& b);

// Reorders the tokens of `seq`: token i moves to position perm[i].
LinearizedSequence permute_sequence(const LinearizedSequence& seq,
                                    const std::vector<std::size_t>& perm);

// {"n", "allowed", "p", "p_max"} with row-major flattened matrices.
std::string structure_to_json(const StructureMask& mask,
                              const RelPosMatrix& relpos);

}  // namespace tabinv

#endif  // TABINV_CORE_STRUCTURE_HPP_
