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

#ifndef TABINV_CORE_CORPUS_HPP_
#define TABINV_CORE_CORPUS_HPP_

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "dataset.hpp"

namespace tabinv {

enum class TemplateFamily {
  kFilmography = 0,  // Year / Film / Role / Director
  kCareerStats = 1,  // Season / Team / Apps / Goals
};

struct CorpusSpec {
  std::size_t n_tables = 0;
  std::size_t min_rows = 2;  // data rows
  std::size_t max_rows = 5;
  std::size_t min_cols = 2;  // data columns
  std::size_t max_cols = 4;
  TemplateFamily family = TemplateFamily::kFilmography;
  std::size_t min_highlight = 1;
  std::size_t max_highlight = 3;
  std::uint64_t seed = 0;

  // Throws Error(kInvalidArgument).
  void validate() const;
};

// Deterministic per seed. Every table has one header row and distinct values
// within each column; each target is a template rendering of the highlighted
// cells, the page title and the family's closed set of function words.
std::vector<Example> generate_corpus(const CorpusSpec& spec);

// Words a target may use besides table content.
const std::set<std::string>& template_function_words(TemplateFamily family);

}  // namespace tabinv

#endif  // TABINV_CORE_CORPUS_HPP_
