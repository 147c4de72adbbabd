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

#include "structure.hpp"

#include <algorithm>
#include <cstdlib>
#include "json.hpp"

#include "error.hpp"

namespace tabinv {

namespace {

bool sorted_intersect(const std::vector<std::size_t>& a,
                      const std::vector<std::size_t>& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    if (*i < *j) {
      ++i;
    } else {
      ++j;
    }
  }
  return false;
}

bool fields_connected(const Field& a, const Field& b) {
  if (a.is_metadata() || b.is_metadata()) return true;
  return sorted_intersect(a.row_ids, b.row_ids) ||
         sorted_intersect(a.col_ids, b.col_ids);
}

int clamp_distance(std::size_t i, std::size_t j, int p_max) {
  const std::size_t d = i > j ? i - j : j - i;
  return d >= static_cast<std::size_t>(p_max) ? p_max : static_cast<int>(d);
}

}  // namespace

std::size_t StructureMask::count_allowed() const {
  return static_cast<std::size_t>(
      std::count(allowed_.begin(), allowed_.end(), std::uint8_t{1}));
}

StructureMask build_mask(const LinearizedSequence& seq) {
  const std::size_t n = seq.size();
  const std::size_t n_fields = seq.fields.size();
  // field-level relation first, then expand to tokens
  std::vector<std::uint8_t> link(n_fields * n_fields, 0);
  for (std::size_t f = 0; f < n_fields; ++f) {
    for (std::size_t g = 0; g < n_fields; ++g) {
      link[f * n_fields + g] =
          f == g || fields_connected(seq.fields[f], seq.fields[g]);
    }
  }
  StructureMask mask(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      mask.set(i, j, link[seq.field_of[i] * n_fields + seq.field_of[j]] != 0);
    }
  }
  return mask;
}

RelPosMatrix build_relpos(const LinearizedSequence& seq, int p_max) {
  if (p_max < 1) {
    throw Error(ErrorCode::kInvalidPMax,
                "p_max must be at least 1, got " + std::to_string(p_max));
  }
  const std::size_t n = seq.size();
  RelPosMatrix p(n, p_max);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t fi = seq.field_of[i];
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t fj = seq.field_of[j];
      const bool same_frame =
          fi == fj ||
          (seq.fields[fi].is_metadata() && seq.fields[fj].is_metadata());
      p.set(i, j, same_frame ? clamp_distance(i, j, p_max) : p_max);
    }
  }
  return p;
}

RelPosMatrix linear_relpos(std::size_t n, int p_max) {
  if (p_max < 1) {
    throw Error(ErrorCode::kInvalidPMax,
                "p_max must be at least 1, got " + std::to_string(p_max));
  }
  RelPosMatrix p(n, p_max);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) p.set(i, j, clamp_distance(i, j, p_max));
  }
  return p;
}

namespace {

struct FieldTokens {
  std::vector<std::size_t> positions;
  std::vector<TokenId> ids;
};

std::vector<FieldTokens> group_by_field(const LinearizedSequence& s) {
  std::vector<FieldTokens> out(s.fields.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    out[s.field_of[i]].positions.push_back(i);
    out[s.field_of[i]].ids.push_back(s.token_ids[i]);
  }
  return out;
}

class FieldMatcher {
 public:
  FieldMatcher(const LinearizedSequence& a, const LinearizedSequence& b)
      : a_(a), b_(b), ga_(group_by_field(a)), gb_(group_by_field(b)) {
    candidates_.resize(a.fields.size());
    for (std::size_t f = 0; f < a.fields.size(); ++f) {
      for (std::size_t g = 0; g < b.fields.size(); ++g) {
        if (a.fields[f].kind == b.fields[g].kind && ga_[f].ids == gb_[g].ids) {
          candidates_[f].push_back(g);
        }
      }
    }
    assignment_.assign(a.fields.size(), kNone);
    used_.assign(b.fields.size(), false);
  }

  bool solve(std::size_t f = 0) {
    if (f == a_.fields.size()) return true;
    for (std::size_t g : candidates_[f]) {
      if (used_[g] || !consistent(f, g)) continue;
      assignment_[f] = g;
      used_[g] = true;
      if (solve(f + 1)) return true;
      used_[g] = false;
      assignment_[f] = kNone;
    }
    return false;
  }

  std::vector<std::size_t> permutation() const {
    std::vector<std::size_t> perm(a_.size());
    for (std::size_t f = 0; f < ga_.size(); ++f) {
      const FieldTokens& src = ga_[f];
      const FieldTokens& dst = gb_[assignment_[f]];
      for (std::size_t k = 0; k < src.positions.size(); ++k) {
        perm[src.positions[k]] = dst.positions[k];
      }
    }
    return perm;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  bool consistent(std::size_t f, std::size_t g) const {
    for (std::size_t h = 0; h < f; ++h) {
      const bool rel_a = fields_connected(a_.fields[f], a_.fields[h]);
      const bool rel_b =
          fields_connected(b_.fields[g], b_.fields[assignment_[h]]);
      if (rel_a != rel_b) return false;
    }
    return true;
  }

  const LinearizedSequence& a_;
  const LinearizedSequence& b_;
  std::vector<FieldTokens> ga_;
  std::vector<FieldTokens> gb_;
  std::vector<std::vector<std::size_t>> candidates_;
  std::vector<std::size_t> assignment_;
  std::vector<bool> used_;
};

}  // namespace

std::optional<std::vector<std::size_t>> induced_permutation(
    const LinearizedSequence& a, const LinearizedSequence& b) {
  if (a.size() != b.size() || a.fields.size() != b.fields.size()) {
    return std::nullopt;
  }
  FieldMatcher matcher(a, b);
  if (!matcher.solve()) return std::nullopt;
  return matcher.permutation();
}

LinearizedSequence permute_sequence(const LinearizedSequence& seq,
                                    const std::vector<std::size_t>& perm) {
  if (perm.size() != seq.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "permutation length does not match sequence length");
  }
  LinearizedSequence out = seq;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    out.token_ids[perm[i]] = seq.token_ids[i];
    out.token_texts[perm[i]] = seq.token_texts[i];
    out.field_of[perm[i]] = seq.field_of[i];
  }
  return out;
}

std::string structure_to_json(const StructureMask& mask,
                              const RelPosMatrix& relpos) {
  if (mask.size() != relpos.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "mask and relative positions differ in size");
  }
  nlohmann::json j;
  j["n"] = mask.size();
  std::vector<int> allowed(mask.data().begin(), mask.data().end());
  j["allowed"] = allowed;
  j["p"] = relpos.data();
  j["p_max"] = relpos.p_max();
  return j.dump();
}

}  // namespace tabinv
