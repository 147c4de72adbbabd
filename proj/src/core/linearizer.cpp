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

#include "linearizer.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <tuple>

#include "error.hpp"

namespace tabinv {

namespace {

struct CellBlock {
  Coord coord;
  std::string content;
  std::vector<std::string> headers;  // emitted inside <header> markers
  std::string hash;
};

std::string block_hash(const std::string& content,
                       const std::vector<std::string>& headers) {
  std::string key = content;
  key.push_back('\x1f');
  for (const std::string& h : headers) {
    key += h;
    key.push_back('\x1e');
  }
  return content_hash(key);
}

CellBlock make_block(Coord coord, std::string content,
                     std::vector<std::string> headers) {
  CellBlock b{coord, std::move(content), std::move(headers), {}};
  b.hash = block_hash(b.content, b.headers);
  return b;
}

// Order never consults coordinates.
void sort_lexicographic(std::vector<CellBlock>& blocks) {
  std::stable_sort(blocks.begin(), blocks.end(),
                   [](const CellBlock& a, const CellBlock& b) {
                     return std::tie(a.content, a.headers, a.hash) <
                            std::tie(b.content, b.headers, b.hash);
                   });
}

std::vector<std::string> sorted_headers(const Table& t, Coord c) {
  std::vector<std::string> headers = t.row_headers(c);
  std::vector<std::string> col = t.col_headers(c);
  headers.insert(headers.end(), col.begin(), col.end());
  std::sort(headers.begin(), headers.end());
  return headers;
}

class SequenceBuilder {
 public:
  explicit SequenceBuilder(const Vocabulary& vocab) : vocab_(vocab) {}

  std::size_t add_field(Field field) {
    seq_.fields.push_back(std::move(field));
    current_ = seq_.fields.size() - 1;
    return current_;
  }
  void select(std::size_t field) { current_ = field; }

  void marker(std::string_view m) { push(vocab_.id(m), std::string(m)); }
  void text(std::string_view s) {
    for (std::string& w : split_words(s)) {
      TokenId id = vocab_.id(w);
      push(id, std::move(w));
    }
  }

  LinearizedSequence finish() { return std::move(seq_); }

 private:
  void push(TokenId id, std::string text) {
    seq_.token_ids.push_back(id);
    seq_.token_texts.push_back(std::move(text));
    seq_.field_of.push_back(current_);
  }

  const Vocabulary& vocab_;
  LinearizedSequence seq_;
  std::size_t current_ = 0;
};

Field metadata_field() { return Field{FieldKind::kMetadata, {}, {}, {}}; }

Field cell_field(const CellBlock& b) {
  return Field{FieldKind::kCell, {b.coord.row}, {b.coord.col}, b.hash};
}

// Emits the title blocks and the opening <table>; returns the field that
// owns <table> and </table>.
std::size_t begin_table(SequenceBuilder& out, const Table& t) {
  out.add_field(metadata_field());
  out.marker(markers::kPageTitleOpen);
  out.text(t.page_title());
  out.marker(markers::kPageTitleClose);
  out.add_field(metadata_field());
  out.marker(markers::kSectionTitleOpen);
  out.text(t.section_title());
  out.marker(markers::kSectionTitleClose);
  const std::size_t frame = out.add_field(metadata_field());
  out.marker(markers::kTableOpen);
  return frame;
}

void end_table(SequenceBuilder& out, std::size_t frame) {
  out.select(frame);
  out.marker(markers::kTableClose);
}

void emit_cell_blocks(SequenceBuilder& out, const std::vector<CellBlock>& blocks) {
  for (const CellBlock& b : blocks) {
    out.add_field(cell_field(b));
    out.marker(markers::kCellOpen);
    out.text(b.content);
    for (const std::string& h : b.headers) {
      out.marker(markers::kHeaderOpen);
      out.text(h);
      out.marker(markers::kHeaderClose);
    }
    out.marker(markers::kCellClose);
  }
}

void require_highlight(const Table& t) {
  if (t.highlighted().empty()) {
    throw Error(ErrorCode::kNoHighlight, "table has no highlighted cells");
  }
}

}  // namespace

LinearizationFormat parse_format(std::string_view name) {
  if (name == "totto") return LinearizationFormat::kTotto;
  if (name == "hitab") return LinearizationFormat::kHitab;
  if (name == "agnostic") return LinearizationFormat::kAgnostic;
  if (name == "indexed") return LinearizationFormat::kIndexed;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown linearization format '" + std::string(name) + "'");
}

std::string_view format_name(LinearizationFormat format) {
  switch (format) {
    case LinearizationFormat::kTotto:
      return "totto";
    case LinearizationFormat::kHitab:
      return "hitab";
    case LinearizationFormat::kAgnostic:
      return "agnostic";
    case LinearizationFormat::kIndexed:
      return "indexed";
  }
  return "totto";
}

std::string content_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[h & 0xF];
    h >>= 4;
  }
  return out;
}

LinearizedSequence linearize_totto(const Table& t, const Vocabulary& vocab) {
  require_highlight(t);
  std::vector<CellBlock> blocks;
  for (const Coord& c : t.highlighted()) {
    blocks.push_back(make_block(c, t.cell(c).content, sorted_headers(t, c)));
  }
  sort_lexicographic(blocks);

  SequenceBuilder out(vocab);
  const std::size_t frame = begin_table(out, t);
  emit_cell_blocks(out, blocks);
  end_table(out, frame);
  return out.finish();
}

LinearizedSequence linearize_layout_agnostic(const Table& t,
                                             const Vocabulary& vocab) {
  LinearizedSequence seq = linearize_totto(t, vocab);
  for (Field& f : seq.fields) {
    f.row_ids.clear();
    f.col_ids.clear();
  }
  return seq;
}

LinearizedSequence linearize_indexed(const Table& t, const Vocabulary& vocab) {
  require_highlight(t);
  // highlighted() is sorted row-major
  std::vector<CellBlock> blocks;
  for (const Coord& c : t.highlighted()) {
    std::vector<std::string> headers = t.row_headers(c);
    std::vector<std::string> col = t.col_headers(c);
    headers.insert(headers.end(), col.begin(), col.end());
    blocks.push_back(make_block(c, t.cell(c).content, std::move(headers)));
  }
  SequenceBuilder out(vocab);
  const std::size_t frame = begin_table(out, t);
  emit_cell_blocks(out, blocks);
  end_table(out, frame);
  return out.finish();
}

LinearizedSequence linearize_hitab(const Table& t, const Vocabulary& vocab) {
  require_highlight(t);

  // Role 0: highlighted, 1: header of a highlighted cell, 2: data cell under a
  // highlighted header. A coordinate keeps its strongest role.
  std::map<Coord, int> role;
  auto assign = [&role](Coord c, int r) {
    auto [it, inserted] = role.emplace(c, r);
    if (!inserted) it->second = std::min(it->second, r);
  };
  for (const Coord& h : t.highlighted()) {
    assign(h, 0);
    for (std::size_t c = 0; c < t.n_cols(); ++c) {
      if (c != h.col && t.cell(h.row, c).is_row_header) assign({h.row, c}, 1);
    }
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
      if (r != h.row && t.cell(r, h.col).is_col_header) assign({r, h.col}, 1);
    }
    const Cell& cell = t.cell(h);
    if (cell.is_col_header) {
      for (std::size_t r = 0; r < t.n_rows(); ++r) {
        if (t.is_data_cell({r, h.col})) assign({r, h.col}, 2);
      }
    }
    if (cell.is_row_header) {
      for (std::size_t c = 0; c < t.n_cols(); ++c) {
        if (t.is_data_cell({h.row, c})) assign({h.row, c}, 2);
      }
    }
  }

  std::vector<CellBlock> blocks;
  for (const auto& [coord, r] : role) {
    std::vector<std::string> headers;
    if (r == 0) headers = sorted_headers(t, coord);
    blocks.push_back(make_block(coord, t.cell(coord).content, std::move(headers)));
  }
  sort_lexicographic(blocks);

  SequenceBuilder out(vocab);
  const std::size_t frame = begin_table(out, t);
  for (const CellBlock& b : blocks) {
    out.add_field(cell_field(b));
    out.marker(markers::kSep);
    out.text(b.content);
    for (const std::string& h : b.headers) {
      out.marker(markers::kHeaderOpen);
      out.text(h);
      out.marker(markers::kHeaderClose);
    }
  }
  end_table(out, frame);
  return out.finish();
}

LinearizedSequence linearize(const Table& t, const Vocabulary& vocab,
                             LinearizationFormat format) {
  switch (format) {
    case LinearizationFormat::kTotto:
      return linearize_totto(t, vocab);
    case LinearizationFormat::kHitab:
      return linearize_hitab(t, vocab);
    case LinearizationFormat::kAgnostic:
      return linearize_layout_agnostic(t, vocab);
    case LinearizationFormat::kIndexed:
      return linearize_indexed(t, vocab);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown linearization format");
}

LinearizedSequence truncate(const LinearizedSequence& seq,
                            std::size_t max_len) {
  if (max_len == 0) {
    throw Error(ErrorCode::kInvalidArgument, "max_len must be at least 1");
  }
  if (seq.size() <= max_len) return seq;
  LinearizedSequence out;
  constexpr auto kUnmapped = static_cast<std::size_t>(-1);
  std::vector<std::size_t> remap(seq.fields.size(), kUnmapped);
  for (std::size_t i = 0; i < max_len; ++i) {
    const std::size_t f = seq.field_of[i];
    if (remap[f] == kUnmapped) {
      remap[f] = out.fields.size();
      out.fields.push_back(seq.fields[f]);
    }
    out.token_ids.push_back(seq.token_ids[i]);
    out.token_texts.push_back(seq.token_texts[i]);
    out.field_of.push_back(remap[f]);
  }
  return out;
}

void check_field_map(const LinearizedSequence& seq) {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvariantViolated, what);
  };
  if (seq.token_texts.size() != seq.size() ||
      seq.field_of.size() != seq.size()) {
    fail("token, text and field lists differ in length");
  }
  std::vector<bool> used(seq.fields.size(), false);
  for (std::size_t f : seq.field_of) {
    if (f >= seq.fields.size()) fail("token refers to a missing field");
    used[f] = true;
  }
  for (std::size_t f = 0; f < used.size(); ++f) {
    if (!used[f]) fail("field " + std::to_string(f) + " has no tokens");
    if (seq.fields[f].is_metadata() &&
        (!seq.fields[f].row_ids.empty() || !seq.fields[f].col_ids.empty())) {
      fail("metadata field carries row or column ids");
    }
  }
}

}  // namespace tabinv
