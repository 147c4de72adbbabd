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

#include "dataset.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "error.hpp"
#include "json.hpp"
#include "rng.hpp"

namespace tabinv {

using nlohmann::json;

namespace {

[[noreturn]] void parse_error(const std::string& what) {
  throw Error(ErrorCode::kParse, what);
}

Table table_from(const json& j) {
  if (!j.is_object()) parse_error("table must be a JSON object");
  std::vector<std::vector<Cell>> rows;
  for (const json& row : j.at("rows")) {
    std::vector<Cell> cells;
    for (const json& c : row) {
      Cell cell;
      cell.content = c.at("content").get<std::string>();
      cell.is_row_header = c.value("rh", false);
      cell.is_col_header = c.value("ch", false);
      cells.push_back(std::move(cell));
    }
    rows.push_back(std::move(cells));
  }
  std::vector<Coord> highlighted;
  if (j.contains("highlighted")) {
    for (const json& h : j.at("highlighted")) {
      if (!h.is_array() || h.size() != 2) {
        parse_error("highlighted entries must be [row, col] pairs");
      }
      highlighted.push_back({h[0].get<std::size_t>(), h[1].get<std::size_t>()});
    }
  }
  return Table(j.value("page_title", std::string()),
               j.value("section_title", std::string()), std::move(rows),
               std::move(highlighted));
}

json table_json(const Table& t) {
  json rows = json::array();
  for (const auto& row : t.rows()) {
    json cells = json::array();
    for (const Cell& c : row) {
      cells.push_back(
          {{"content", c.content}, {"rh", c.is_row_header}, {"ch", c.is_col_header}});
    }
    rows.push_back(std::move(cells));
  }
  json highlighted = json::array();
  for (const Coord& h : t.highlighted()) highlighted.push_back({h.row, h.col});
  json j;
  j["page_title"] = t.page_title();
  j["section_title"] = t.section_title();
  j["rows"] = std::move(rows);
  j["highlighted"] = std::move(highlighted);
  return j;
}

template <typename Fn>
auto parse_guarded(const std::string& text, Fn&& fn) {
  try {
    return fn(json::parse(text));
  } catch (const json::exception& e) {
    parse_error(e.what());
  }
}

}  // namespace

Table table_from_json(const std::string& text) {
  return parse_guarded(text, [](const json& j) { return table_from(j); });
}

std::string table_to_json(const Table& t) { return table_json(t).dump(); }

Example example_from_json(const std::string& line) {
  return parse_guarded(line, [](const json& j) {
    if (!j.is_object()) parse_error("example must be a JSON object");
    return Example{table_from(j.at("table")), j.at("target").get<std::string>()};
  });
}

std::string example_to_json(const Example& ex) {
  json j;
  j["table"] = table_json(ex.table);
  j["target"] = ex.target;
  return j.dump();
}

std::vector<Example> read_jsonl(std::istream& in) {
  std::vector<Example> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(example_from_json(line));
    } catch (const Error& e) {
      throw Error(e.code() == ErrorCode::kInvalidTable ? ErrorCode::kInvalidTable
                                                       : ErrorCode::kParse,
                  "line " + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

std::vector<Example> read_jsonl_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return read_jsonl(in);
}

void write_jsonl(std::ostream& out, const std::vector<Example>& examples) {
  for (const Example& ex : examples) out << example_to_json(ex) << '\n';
}

void write_jsonl_file(const std::string& path,
                      const std::vector<Example>& examples) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  write_jsonl(out, examples);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

std::vector<Example> augment_dataset(const std::vector<Example>& in,
                                     std::uint64_t seed) {
  std::vector<Example> out;
  out.reserve(in.size() * 8);
  for (std::size_t i = 0; i < in.size(); ++i) {
    for (Table& t : enumerate_augmentations(in[i].table, mix_seed(seed, i))) {
      out.push_back(Example{std::move(t), in[i].target});
    }
  }
  return out;
}

std::vector<Example> perturb_dataset(const std::vector<Example>& in,
                                     std::uint64_t seed) {
  std::vector<Example> out;
  out.reserve(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    out.push_back(Example{perturb(in[i].table, mix_seed(seed, i)), in[i].target});
  }
  return out;
}

Example example_from_totto_json(const std::string& line) {
  return parse_guarded(line, [](const json& j) {
    struct RawCell {
      std::string value;
      bool is_header = false;
      bool filled = false;
    };
    std::vector<std::vector<RawCell>> grid;
    // (raw row, raw index) -> grid column of the span's top-left cell
    std::vector<std::vector<std::size_t>> origin;
    const json& raw_rows = j.at("table");
    for (std::size_t r = 0; r < raw_rows.size(); ++r) {
      if (grid.size() <= r) grid.resize(r + 1);
      origin.emplace_back();
      std::size_t col = 0;
      for (const json& c : raw_rows[r]) {
        while (col < grid[r].size() && grid[r][col].filled) ++col;
        origin.back().push_back(col);
        const std::size_t col_span =
            std::max<std::size_t>(1, c.value("column_span", 1));
        const std::size_t row_span =
            std::max<std::size_t>(1, c.value("row_span", 1));
        const RawCell cell{c.value("value", std::string()),
                           c.value("is_header", false), true};
        for (std::size_t dr = 0; dr < row_span; ++dr) {
          if (grid.size() <= r + dr) grid.resize(r + dr + 1);
          auto& row = grid[r + dr];
          if (row.size() < col + col_span) row.resize(col + col_span);
          for (std::size_t dc = 0; dc < col_span; ++dc) row[col + dc] = cell;
        }
        col += col_span;
      }
    }
    std::size_t width = 0;
    for (const auto& row : grid) width = std::max(width, row.size());
    if (grid.empty() || width == 0) parse_error("ToTTo table is empty");
    for (auto& row : grid) row.resize(width);

    std::vector<bool> header_row(grid.size(), false);
    for (std::size_t r = 0; r < grid.size(); ++r) {
      bool all = true;
      for (const RawCell& c : grid[r]) all = all && c.is_header;
      header_row[r] = all;
    }
    std::vector<bool> header_col(width, false);
    bool any_data_row = false;
    for (std::size_t c = 0; c < width; ++c) {
      bool all = true;
      for (std::size_t r = 0; r < grid.size(); ++r) {
        if (header_row[r]) continue;
        any_data_row = true;
        all = all && grid[r][c].is_header;
      }
      header_col[c] = all;
    }
    if (!any_data_row) header_col.assign(width, false);

    std::vector<std::vector<Cell>> rows(grid.size(), std::vector<Cell>(width));
    for (std::size_t r = 0; r < grid.size(); ++r) {
      for (std::size_t c = 0; c < width; ++c) {
        Cell& cell = rows[r][c];
        cell.content = grid[r][c].value;
        cell.is_col_header = header_row[r];
        cell.is_row_header = !header_row[r] && header_col[c];
      }
    }
    std::vector<Coord> highlighted;
    for (const json& h : j.value("highlighted_cells", json::array())) {
      const auto r = h.at(0).get<std::size_t>();
      const auto i = h.at(1).get<std::size_t>();
      if (r < origin.size() && i < origin[r].size()) {
        highlighted.push_back({r, origin[r][i]});
      }
    }
    std::string target;
    if (j.contains("sentence_annotations") &&
        !j["sentence_annotations"].empty()) {
      target = j["sentence_annotations"][0].value("final_sentence", "");
    }
    return Example{Table(j.value("table_page_title", std::string()),
                         j.value("table_section_title", std::string()),
                         std::move(rows), std::move(highlighted)),
                   target};
  });
}

}  // namespace tabinv
