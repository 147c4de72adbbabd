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

#ifndef TABINV_CORE_TABLE_HPP_
#define TABINV_CORE_TABLE_HPP_

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tabinv {

struct Cell {
  std::string content;
  bool is_row_header = false;
  bool is_col_header = false;

  bool operator==(const Cell&) const = default;
};

struct Coord {
  std::size_t row = 0;
  std::size_t col = 0;

  auto operator<=>(const Coord&) const = default;
};

// A rectangular grid of cells plus page/section metadata and the highlighted
// sub-table. Header lines are marked per cell: a row holding any column-header
// cell is a header row, a column holding any row-header cell is a header
// column. Cells at the crossing of a header row and a header column may carry
// either flag or none. Everything else in a header row must be a column
// header, and everything else in a header column must be a row header.
//
// Highlighted coordinates may point at header cells; the HiTab-style
// linearizer uses highlighted headers.
class Table {
 public:
  Table() = default;

  // Throws Error(kInvalidTable) when the invariants above do not hold.
  Table(std::string page_title, std::string section_title,
        std::vector<std::vector<Cell>> rows, std::vector<Coord> highlighted);

  const std::string& page_title() const { return page_title_; }
  const std::string& section_title() const { return section_title_; }
  std::size_t n_rows() const { return rows_.size(); }
  std::size_t n_cols() const { return rows_.empty() ? 0 : rows_[0].size(); }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }
  const Cell& cell(Coord c) const { return rows_[c.row][c.col]; }
  const Cell& cell(std::size_t r, std::size_t c) const { return rows_[r][c]; }

  // Sorted, duplicate free.
  const std::vector<Coord>& highlighted() const { return highlighted_; }

  bool is_header_row(std::size_t r) const { return header_row_[r]; }
  bool is_header_col(std::size_t c) const { return header_col_[c]; }
  std::vector<std::size_t> data_rows() const;
  std::vector<std::size_t> data_cols() const;
  bool is_data_cell(Coord c) const {
    return !header_row_[c.row] && !header_col_[c.col];
  }

  // Contents of the row-header cells in c's row (left to right) and of the
  // column-header cells in c's column (top to bottom), excluding c itself.
  std::vector<std::string> row_headers(Coord c) const;
  std::vector<std::string> col_headers(Coord c) const;

  bool operator==(const Table& other) const {
    return page_title_ == other.page_title_ &&
           section_title_ == other.section_title_ && rows_ == other.rows_ &&
           highlighted_ == other.highlighted_;
  }

 private:
  std::string page_title_;
  std::string section_title_;
  std::vector<std::vector<Cell>> rows_;
  std::vector<Coord> highlighted_;
  std::vector<bool> header_row_;
  std::vector<bool> header_col_;
};

enum class TransformKind { kTranspose, kRowShuffle, kColShuffle };

// Content-invariant layout operation. For shuffles, `permutation[i]` names the
// source data line that becomes the i-th data line of the result; header lines
// stay where they are.
struct TransformOp {
  TransformKind kind = TransformKind::kTranspose;
  std::vector<std::size_t> permutation;

  static TransformOp transpose() { return {TransformKind::kTranspose, {}}; }
  static TransformOp row_shuffle(std::vector<std::size_t> perm) {
    return {TransformKind::kRowShuffle, std::move(perm)};
  }
  static TransformOp col_shuffle(std::vector<std::size_t> perm) {
    return {TransformKind::kColShuffle, std::move(perm)};
  }
};

Table transpose(const Table& t);

// Throws Error(kPermutationSizeMismatch) if perm does not cover exactly the
// data rows, Error(kInvalidArgument) if it is not a bijection.
Table shuffle_rows(const Table& t, std::span<const std::size_t> perm);
Table shuffle_cols(const Table& t, std::span<const std::size_t> perm);

Table apply_op(const Table& t, const TransformOp& op);
Table apply_sequence(const Table& t, std::span<const TransformOp> ops);

// Where cell `c` of `before` lands after `op`.
Coord map_coordinate(const Table& before, const TransformOp& op, Coord c);

// The 8 subsets of {transpose, row shuffle, column shuffle}, applied in that
// order; subset k uses bit 0 for transpose, bit 1 for rows, bit 2 for columns.
// Element 0 is the input.
std::vector<std::vector<TransformOp>> augmentation_ops(const Table& t,
                                                       std::uint64_t seed);
std::vector<Table> enumerate_augmentations(const Table& t, std::uint64_t seed);

// Transpose followed by a seeded row shuffle and column shuffle.
std::vector<TransformOp> perturbation_ops(const Table& t, std::uint64_t seed);
Table perturb(const Table& t, std::uint64_t seed);

// True iff a and b share a row or a column. Throws Error(kOutOfRange).
bool structurally_related(const Table& t, Coord a, Coord b);

}  // namespace tabinv

#endif  // TABINV_CORE_TABLE_HPP_
