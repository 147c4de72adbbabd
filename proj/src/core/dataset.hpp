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

#ifndef TABINV_CORE_DATASET_HPP_
#define TABINV_CORE_DATASET_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "table.hpp"

namespace tabinv {

struct Example {
  Table table;
  std::string target;

  bool operator==(const Example&) const = default;
};

// {"page_title", "section_title", "rows": [[{"content","rh","ch"}]],
//  "highlighted": [[r, c]]}. Throws Error(kParse) or Error(kInvalidTable).
Table table_from_json(const std::string& text);
std::string table_to_json(const Table& t);

Example example_from_json(const std::string& line);
std::string example_to_json(const Example& ex);

// Throws Error(kParse) naming the 1-based line number of the first bad line.
// Blank lines are skipped.
std::vector<Example> read_jsonl(std::istream& in);
std::vector<Example> read_jsonl_file(const std::string& path);
void write_jsonl(std::ostream& out, const std::vector<Example>& examples);
void write_jsonl_file(const std::string& path,
                      const std::vector<Example>& examples);

// Eight lines per input example (enumerate_augmentations), target copied.
std::vector<Example> augment_dataset(const std::vector<Example>& in,
                                     std::uint64_t seed);

// Each table transposed, row shuffled and column shuffled once, with
// permutations seeded per example index.
std::vector<Example> perturb_dataset(const std::vector<Example>& in,
                                     std::uint64_t seed);

// Converts one line of the public ToTTo release (table rows of
// {value, is_header, column_span, row_span}, highlighted_cells,
// table_page_title, table_section_title, sentence_annotations) into an
// Example. Spanning cells are replicated over their span and ragged rows are
// padded with empty cells. A row made only of header cells becomes a header
// row; a header cell in an otherwise mixed row marks its column as a header
// column when that holds for every data row.
Example example_from_totto_json(const std::string& line);

}  // namespace tabinv

#endif  // TABINV_CORE_DATASET_HPP_
