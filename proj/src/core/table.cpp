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

#include "table.hpp"

#include <algorithm>
#include <sstream>

#include "error.hpp"
#include "rng.hpp"

namespace tabinv {

namespace {

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::kInvalidTable, what);
}

std::string at(std::size_t r, std::size_t c) {
  std::ostringstream out;
  out << "(" << r << "," << c << ")";
  return out.str();
}

void check_permutation(std::span<const std::size_t> perm, std::size_t n,
                       const char* what) {
  if (perm.size() != n) {
    std::ostringstream msg;
    msg << what << " permutation has " << perm.size() << " entries, table has "
        << n << " data lines";
    throw Error(ErrorCode::kPermutationSizeMismatch, msg.str());
  }
  std::vector<bool> seen(n, false);
  for (std::size_t p : perm) {
    if (p >= n || seen[p]) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string(what) + " permutation is not a bijection");
    }
    seen[p] = true;
  }
}

}  // namespace

Table::Table(std::string page_title, std::string section_title,
             std::vector<std::vector<Cell>> rows,
             std::vector<Coord> highlighted)
    : page_title_(std::move(page_title)),
      section_title_(std::move(section_title)),
      rows_(std::move(rows)),
      highlighted_(std::move(highlighted)) {
  if (rows_.empty() || rows_[0].empty()) invalid("table has no cells");
  const std::size_t n_cols = rows_[0].size();
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    if (rows_[r].size() != n_cols) {
      std::ostringstream msg;
      msg << "row " << r << " has " << rows_[r].size() << " cells, expected "
          << n_cols;
      invalid(msg.str());
    }
  }

  header_row_.assign(rows_.size(), false);
  header_col_.assign(n_cols, false);
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    for (std::size_t c = 0; c < n_cols; ++c) {
      const Cell& cell = rows_[r][c];
      if (cell.is_row_header && cell.is_col_header) {
        invalid("cell " + at(r, c) + " is both row and column header");
      }
      if (cell.is_col_header) header_row_[r] = true;
      if (cell.is_row_header) header_col_[c] = true;
    }
  }
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    for (std::size_t c = 0; c < n_cols; ++c) {
      const Cell& cell = rows_[r][c];
      const bool corner = header_row_[r] && header_col_[c];
      if (corner) continue;
      if (header_row_[r] && !cell.is_col_header) {
        invalid("header row " + std::to_string(r) + " has non-header cell " +
                at(r, c));
      }
      if (header_col_[c] && !cell.is_row_header) {
        invalid("header column " + std::to_string(c) +
                " has non-header cell " + at(r, c));
      }
    }
  }

  std::sort(highlighted_.begin(), highlighted_.end());
  highlighted_.erase(std::unique(highlighted_.begin(), highlighted_.end()),
                     highlighted_.end());
  for (const Coord& h : highlighted_) {
    if (h.row >= rows_.size() || h.col >= n_cols) {
      invalid("highlighted cell " + at(h.row, h.col) + " is out of range");
    }
  }
}

std::vector<std::size_t> Table::data_rows() const {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < header_row_.size(); ++r) {
    if (!header_row_[r]) out.push_back(r);
  }
  return out;
}

std::vector<std::size_t> Table::data_cols() const {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < header_col_.size(); ++c) {
    if (!header_col_[c]) out.push_back(c);
  }
  return out;
}

std::vector<std::string> Table::row_headers(Coord c) const {
  std::vector<std::string> out;
  for (std::size_t col = 0; col < n_cols(); ++col) {
    if (col == c.col) continue;
    const Cell& h = rows_[c.row][col];
    if (h.is_row_header) out.push_back(h.content);
  }
  return out;
}

std::vector<std::string> Table::col_headers(Coord c) const {
  std::vector<std::string> out;
  for (std::size_t row = 0; row < n_rows(); ++row) {
    if (row == c.row) continue;
    const Cell& h = rows_[row][c.col];
    if (h.is_col_header) out.push_back(h.content);
  }
  return out;
}

Table transpose(const Table& t) {
  std::vector<std::vector<Cell>> rows(t.n_cols(),
                                      std::vector<Cell>(t.n_rows()));
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    for (std::size_t c = 0; c < t.n_cols(); ++c) {
      Cell cell = t.cell(r, c);
      std::swap(cell.is_row_header, cell.is_col_header);
      rows[c][r] = std::move(cell);
    }
  }
  std::vector<Coord> highlighted;
  highlighted.reserve(t.highlighted().size());
  for (const Coord& h : t.highlighted()) highlighted.push_back({h.col, h.row});
  return Table(t.page_title(), t.section_title(), std::move(rows),
               std::move(highlighted));
}

Table shuffle_rows(const Table& t, std::span<const std::size_t> perm) {
  const std::vector<std::size_t> data = t.data_rows();
  check_permutation(perm, data.size(), "row");

  // destination row of each source row
  std::vector<std::size_t> dest(t.n_rows());
  for (std::size_t r = 0; r < t.n_rows(); ++r) dest[r] = r;
  for (std::size_t i = 0; i < perm.size(); ++i) dest[data[perm[i]]] = data[i];

  std::vector<std::vector<Cell>> rows(t.n_rows());
  for (std::size_t r = 0; r < t.n_rows(); ++r) rows[dest[r]] = t.rows()[r];
  std::vector<Coord> highlighted;
  for (const Coord& h : t.highlighted()) {
    highlighted.push_back({dest[h.row], h.col});
  }
  return Table(t.page_title(), t.section_title(), std::move(rows),
               std::move(highlighted));
}

Table shuffle_cols(const Table& t, std::span<const std::size_t> perm) {
  const std::vector<std::size_t> data = t.data_cols();
  check_permutation(perm, data.size(), "column");

  std::vector<std::size_t> dest(t.n_cols());
  for (std::size_t c = 0; c < t.n_cols(); ++c) dest[c] = c;
  for (std::size_t i = 0; i < perm.size(); ++i) dest[data[perm[i]]] = data[i];

  std::vector<std::vector<Cell>> rows(t.n_rows(),
                                      std::vector<Cell>(t.n_cols()));
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    for (std::size_t c = 0; c < t.n_cols(); ++c) {
      rows[r][dest[c]] = t.cell(r, c);
    }
  }
  std::vector<Coord> highlighted;
  for (const Coord& h : t.highlighted()) {
    highlighted.push_back({h.row, dest[h.col]});
  }
  return Table(t.page_title(), t.section_title(), std::move(rows),
               std::move(highlighted));
}

Table apply_op(const Table& t, const TransformOp& op) {
  switch (op.kind) {
    case TransformKind::kTranspose:
      return transpose(t);
    case TransformKind::kRowShuffle:
      return shuffle_rows(t, op.permutation);
    case TransformKind::kColShuffle:
      return shuffle_cols(t, op.permutation);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown transform kind");
}

Table apply_sequence(const Table& t, std::span<const TransformOp> ops) {
  Table out = t;
  for (const TransformOp& op : ops) out = apply_op(out, op);
  return out;
}

Coord map_coordinate(const Table& before, const TransformOp& op, Coord c) {
  if (c.row >= before.n_rows() || c.col >= before.n_cols()) {
    throw Error(ErrorCode::kOutOfRange, "coordinate " + at(c.row, c.col) +
                                            " is out of range");
  }
  switch (op.kind) {
    case TransformKind::kTranspose:
      return {c.col, c.row};
    case TransformKind::kRowShuffle: {
      const std::vector<std::size_t> data = before.data_rows();
      check_permutation(op.permutation, data.size(), "row");
      for (std::size_t i = 0; i < op.permutation.size(); ++i) {
        if (data[op.permutation[i]] == c.row) return {data[i], c.col};
      }
      return c;
    }
    case TransformKind::kColShuffle: {
      const std::vector<std::size_t> data = before.data_cols();
      check_permutation(op.permutation, data.size(), "column");
      for (std::size_t i = 0; i < op.permutation.size(); ++i) {
        if (data[op.permutation[i]] == c.col) return {c.row, data[i]};
      }
      return c;
    }
  }
  return c;
}

std::vector<std::vector<TransformOp>> augmentation_ops(const Table& t,
                                                       std::uint64_t seed) {
  std::vector<std::vector<TransformOp>> out;
  out.reserve(8);
  for (std::uint64_t subset = 0; subset < 8; ++subset) {
    Rng rng(mix_seed(seed, subset));
    std::vector<TransformOp> ops;
    Table current = t;
    if (subset & 1u) {
      ops.push_back(TransformOp::transpose());
      current = transpose(current);
    }
    if (subset & 2u) {
      ops.push_back(
          TransformOp::row_shuffle(rng.permutation(current.data_rows().size())));
      current = apply_op(current, ops.back());
    }
    if (subset & 4u) {
      ops.push_back(
          TransformOp::col_shuffle(rng.permutation(current.data_cols().size())));
    }
    out.push_back(std::move(ops));
  }
  return out;
}

std::vector<Table> enumerate_augmentations(const Table& t,
                                           std::uint64_t seed) {
  std::vector<Table> out;
  out.reserve(8);
  for (const auto& ops : augmentation_ops(t, seed)) {
    out.push_back(apply_sequence(t, ops));
  }
  return out;
}

std::vector<TransformOp> perturbation_ops(const Table& t,
                                          std::uint64_t seed) {
  Rng rng(seed);
  const Table transposed = transpose(t);
  std::vector<TransformOp> ops;
  ops.push_back(TransformOp::transpose());
  ops.push_back(
      TransformOp::row_shuffle(rng.permutation(transposed.data_rows().size())));
  ops.push_back(
      TransformOp::col_shuffle(rng.permutation(transposed.data_cols().size())));
  return ops;
}

Table perturb(const Table& t, std::uint64_t seed) {
  return apply_sequence(t, perturbation_ops(t, seed));
}

bool structurally_related(const Table& t, Coord a, Coord b) {
  for (const Coord& c : {a, b}) {
    if (c.row >= t.n_rows() || c.col >= t.n_cols()) {
      throw Error(ErrorCode::kOutOfRange, "coordinate " + at(c.row, c.col) +
                                              " is out of range");
    }
  }
  return a.row == b.row || a.col == b.col;
}

}  // namespace tabinv
