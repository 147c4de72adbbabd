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

#ifndef TABINV_TESTS_TEST_SUPPORT_HPP_
#define TABINV_TESTS_TEST_SUPPORT_HPP_

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "linearizer.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "structure.hpp"
#include "table.hpp"
#include "vocab.hpp"

namespace tabinv::testing {

// Cell with a data-cell default.
inline Cell data(std::string s) { return Cell{std::move(s), false, false}; }
inline Cell ch(std::string s) { return Cell{std::move(s), false, true}; }
inline Cell rh(std::string s) { return Cell{std::move(s), true, false}; }

// Two-word cell contents that are unique across a table.
inline std::string word(std::size_t k) {
  static const char* const kStems[] = {"amber", "birch", "cedar", "delta",
                                       "ember", "fjord", "grove", "heron",
                                       "iris",  "juniper", "kestrel", "lotus"};
  return std::string(kStems[k % 12]) + " " + std::to_string(k);
}

// Random table with at most max_dim rows and columns in total, an optional
// header row and header column, unique contents and a nonempty random
// highlight over data cells.
inline Table random_table(Rng& rng, std::size_t max_dim = 6) {
  const std::size_t rows = 1 + rng.uniform_index(max_dim);
  const std::size_t cols = 1 + rng.uniform_index(max_dim);
  const bool header_row = rows > 1 && rng.uniform() < 0.7;
  const bool header_col = cols > 1 && rng.uniform() < 0.5;
  std::vector<std::vector<Cell>> grid(rows, std::vector<Cell>(cols));
  std::size_t k = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      Cell& cell = grid[r][c];
      cell.content = word(k++);
      const bool in_hr = header_row && r == 0;
      const bool in_hc = header_col && c == 0;
      if (in_hr && in_hc) {
        cell.content = "";  // corner
      } else if (in_hr) {
        cell.is_col_header = true;
      } else if (in_hc) {
        cell.is_row_header = true;
      }
    }
  }
  std::vector<Coord> data_cells;
  for (std::size_t r = header_row ? 1 : 0; r < rows; ++r) {
    for (std::size_t c = header_col ? 1 : 0; c < cols; ++c) {
      data_cells.push_back({r, c});
    }
  }
  std::vector<Coord> hl;
  for (const Coord& c : data_cells) {
    if (rng.uniform() < 0.4) hl.push_back(c);
  }
  if (hl.empty()) hl.push_back(data_cells[rng.uniform_index(data_cells.size())]);
  return Table("page " + word(100 + rows), "section " + word(200 + cols),
               std::move(grid), std::move(hl));
}

// Year / Film / Role with a column-header row and two films.
inline Table film_table(std::vector<Coord> highlighted = {{1, 1}, {1, 2}}) {
  return Table("Stephen Chow", "Filmography",
               {{ch("Year"), ch("Film"), ch("Role")},
                {data("1992"), data("Royal Tramp"), data("Wai Siu-bo")},
                {data("1993"), data("King of Beggars"), data("So Chan")}},
               std::move(highlighted));
}

// The same content with a row-header column and one film per column.
inline Table film_table_transposed() {
  return Table("Stephen Chow", "Filmography",
               {{rh("Year"), data("1992"), data("1993")},
                {rh("Film"), data("Royal Tramp"), data("King of Beggars")},
                {rh("Role"), data("Wai Siu-bo"), data("So Chan")}},
               {{1, 1}, {2, 1}});
}

inline Vocabulary vocab_for(const std::vector<Table>& tables) {
  std::vector<std::string> texts;
  for (const Table& t : tables) {
    texts.push_back(t.page_title());
    texts.push_back(t.section_title());
    for (const auto& row : t.rows()) {
      for (const Cell& c : row) texts.push_back(c.content);
    }
  }
  return Vocabulary::build(texts);
}

// Multiset of cell contents.
inline std::vector<std::string> contents(const Table& t) {
  std::vector<std::string> out;
  for (const auto& row : t.rows()) {
    for (const Cell& c : row) out.push_back(c.content);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Words of a cell field ahead of its first header marker.
inline std::string field_content(const LinearizedSequence& s, std::size_t f) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.field_of[i] != f) continue;
    const std::string& tok = s.token_texts[i];
    if (tok == "<header>") break;
    if (tok == "<cell>" || tok == "</cell>" || tok == "[SEP]") continue;
    out += out.empty() ? tok : " " + tok;
  }
  return out;
}

// Brute-force attention permission for a ToTTo-style sequence of t: each
// cell field is mapped back to its table cell, whose content must match, and
// pairs of cells are judged by structurally_related on the table itself.
inline StructureMask mask_oracle(const Table& t, const LinearizedSequence& s) {
  std::vector<Coord> where(s.fields.size());
  for (std::size_t f = 0; f < s.fields.size(); ++f) {
    const Field& field = s.fields[f];
    if (field.is_metadata()) continue;
    if (field.row_ids.size() != 1 || field.col_ids.size() != 1) {
      throw std::logic_error("cell field without a single coordinate");
    }
    where[f] = {field.row_ids[0], field.col_ids[0]};
    if (field_content(s, f) != normalize_text(t.cell(where[f]).content)) {
      throw std::logic_error("cell field content does not match its cell");
    }
  }
  StructureMask m(s.size(), false);
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      const std::size_t fi = s.field_of[i];
      const std::size_t fj = s.field_of[j];
      bool ok = fi == fj || s.fields[fi].is_metadata() ||
                s.fields[fj].is_metadata() ||
                structurally_related(t, where[fi], where[fj]);
      m.set(i, j, ok);
    }
  }
  return m;
}

// Training examples over random tables: the ToTTo-style input with a random
// target drawn from the table's words.
inline std::vector<TrainingExample> random_examples(Rng& rng, std::size_t n,
                                                    std::vector<Table>& tables,
                                                    Vocabulary& vocab,
                                                    int p_max,
                                                    std::size_t max_dim = 4) {
  tables.clear();
  for (std::size_t i = 0; i < n; ++i) tables.push_back(random_table(rng, max_dim));
  vocab = vocab_for(tables);
  std::vector<TrainingExample> out;
  for (const Table& t : tables) {
    std::vector<TokenId> target{Vocabulary::kBos};
    const std::size_t len = 1 + rng.uniform_index(4);
    for (std::size_t k = 0; k < len; ++k) {
      target.push_back(static_cast<TokenId>(
          vocab.reserved_count() +
          rng.uniform_index(vocab.size() - vocab.reserved_count())));
    }
    target.push_back(Vocabulary::kEos);
    out.push_back(make_training_example(linearize_totto(t, vocab), target, p_max));
  }
  return out;
}

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst;
  std::size_t checked = 0;
};

// Central finite differences on `coords` random entries of every tensor.
// Relative error is |g - fd| / max(|g|, |fd|, floor).
inline GradCheckResult gradient_check(ToyModel& model,
                                      const std::vector<TrainingExample>& batch,
                                      std::size_t coords, Rng& rng,
                                      double h = 1e-5, double floor = 1e-6) {
  ParameterSet grads;
  loss_and_gradients(model, batch, grads);
  GradCheckResult res;
  for (std::size_t k = 0; k < model.params().size(); ++k) {
    Matrix& w = model.params().tensors[k];
    for (std::size_t n = 0; n < coords; ++n) {
      const auto idx = static_cast<Eigen::Index>(
          rng.uniform_index(static_cast<std::size_t>(w.size())));
      const double saved = w.data()[idx];
      w.data()[idx] = saved + h;
      const double up = nll_loss(model, batch);
      w.data()[idx] = saved - h;
      const double down = nll_loss(model, batch);
      w.data()[idx] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double g = grads.tensors[k].data()[idx];
      const double rel =
          std::abs(g - fd) / std::max({std::abs(g), std::abs(fd), floor});
      ++res.checked;
      if (rel > res.max_rel_error) {
        res.max_rel_error = rel;
        res.worst = model.params().names[k] + "[" + std::to_string(idx) + "]";
      }
    }
  }
  return res;
}

}  // namespace tabinv::testing

#endif  // TABINV_TESTS_TEST_SUPPORT_HPP_
