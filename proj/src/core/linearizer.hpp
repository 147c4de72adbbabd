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

#ifndef TABINV_CORE_LINEARIZER_HPP_
#define TABINV_CORE_LINEARIZER_HPP_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "table.hpp"
#include "vocab.hpp"

namespace tabinv {

enum class FieldKind { kMetadata, kCell };

// A maximal group of tokens that belongs to the metadata or to one cell
// (together with the headers appended to it).
struct Field {
  FieldKind kind = FieldKind::kMetadata;
  std::vector<std::size_t> row_ids;  // sorted; empty for metadata
  std::vector<std::size_t> col_ids;  // sorted; empty for metadata
  std::string content_hash;

  bool is_metadata() const { return kind == FieldKind::kMetadata; }
  bool operator==(const Field&) const = default;
};

struct LinearizedSequence {
  std::vector<TokenId> token_ids;
  std::vector<std::string> token_texts;
  std::vector<std::size_t> field_of;
  std::vector<Field> fields;

  std::size_t size() const { return token_ids.size(); }
  bool operator==(const LinearizedSequence&) const = default;
};

enum class LinearizationFormat {
  kTotto,     // highlighted cells with appended headers, lexicographic order
  kHitab,     // [SEP]-separated cells, headers and cells under headers
  kAgnostic,  // kTotto tokens with all row/column ids erased
  kIndexed,   // highlighted cells in row-major order (layout dependent)
};

// "totto", "hitab", "agnostic", "indexed". Throws Error(kInvalidArgument).
LinearizationFormat parse_format(std::string_view name);
std::string_view format_name(LinearizationFormat format);

inline constexpr std::size_t kDefaultMaxInputLength = 512;

// All four throw Error(kNoHighlight) when nothing is highlighted.
LinearizedSequence linearize_totto(const Table& t, const Vocabulary& vocab);
LinearizedSequence linearize_hitab(const Table& t, const Vocabulary& vocab);
LinearizedSequence linearize_layout_agnostic(const Table& t,
                                             const Vocabulary& vocab);
LinearizedSequence linearize_indexed(const Table& t, const Vocabulary& vocab);

LinearizedSequence linearize(const Table& t, const Vocabulary& vocab,
                             LinearizationFormat format);

// Keeps the first max_len tokens and drops fields that lost all of theirs.
LinearizedSequence truncate(const LinearizedSequence& seq,
                            std::size_t max_len);

// 16 hex digits of FNV-1a over the text.
std::string content_hash(std::string_view text);

// Throws Error(kInvariantViolated) if field_of/fields are inconsistent.
void check_field_map(const LinearizedSequence& seq);

}  // namespace tabinv

#endif  // TABINV_CORE_LINEARIZER_HPP_
