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

#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "dataset.hpp"
#include "doctest.h"
#include "error.hpp"
#include "pipeline.hpp"
#include "test_support.hpp"

using namespace tabinv;
using namespace tabinv::testing;

namespace {

std::string dump(const std::vector<Example>& data) {
  std::ostringstream out;
  write_jsonl(out, data);
  return out.str();
}

CorpusSpec spec(std::size_t n, std::uint64_t seed,
                TemplateFamily family = TemplateFamily::kFilmography) {
  CorpusSpec s;
  s.n_tables = n;
  s.seed = seed;
  s.family = family;
  return s;
}

}  // namespace

TEST_CASE("table JSON round trip") {
  Table t = film_table();
  std::string text = table_to_json(t);
  CHECK(table_from_json(text) == t);
  Table parsed = table_from_json(
      R"({"page_title":"p","section_title":"s",)"
      R"("rows":[[{"content":"a","rh":false,"ch":true}],[{"content":"b","rh":false,"ch":false}]],)"
      R"("highlighted":[[1,0]]})");
  CHECK(parsed.is_header_row(0));
  CHECK(parsed.highlighted() == std::vector<Coord>{{1, 0}});

  try {
    table_from_json("{not json");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
  }
  try {
    table_from_json(R"({"page_title":"p","section_title":"s","rows":[[{"content":"a","rh":true,"ch":true}]],"highlighted":[]})");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidTable);
  }
}

TEST_CASE("JSONL reading reports the failing line") {
  Example ex{film_table(), "He played Wai Siu-bo in Royal Tramp."};
  std::string good = example_to_json(ex);
  CHECK(example_from_json(good) == ex);
  std::istringstream in(good + "\n\n" + good + "\n{\"table\": 3}\n");
  try {
    read_jsonl(in);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
  std::istringstream ok(good + "\n\n" + good + "\n");
  CHECK(read_jsonl(ok).size() == 2);
  try {
    read_jsonl_file("/nonexistent/data.jsonl");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
  }
}

TEST_CASE("augmentation of a dataset") {
  auto data = generate_corpus(spec(5, 3));
  auto aug = augment_dataset(data, 9);
  REQUIRE(aug.size() == 40);
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(aug[8 * i].table == data[i].table);
    for (std::size_t k = 0; k < 8; ++k) {
      CHECK(aug[8 * i + k].target == data[i].target);
      CHECK(contents(aug[8 * i + k].table) == contents(data[i].table));
    }
  }
  CHECK(dump(augment_dataset(data, 9)) == dump(aug));
}

TEST_CASE("perturbation of a dataset") {
  auto data = generate_corpus(spec(30, 4));
  auto pert = perturb_dataset(data, 17);
  REQUIRE(pert.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(pert[i].target == data[i].target);
    CHECK(contents(pert[i].table) == contents(data[i].table));
    // Every generated table has at least two data lines each way after the
    // header row, so no perturbation can be the identity.
    CHECK_FALSE(pert[i].table == data[i].table);
  }
  std::vector<Example> one{{Table("p", "s", {{testing::data("x")}}, {{0, 0}}), "x"}};
  CHECK(perturb_dataset(one, 5) == one);
}

TEST_CASE("synthetic corpus") {
  CHECK(generate_corpus(spec(0, 1)).empty());
  CHECK(dump(generate_corpus(spec(50, 8))) == dump(generate_corpus(spec(50, 8))));
  CHECK(dump(generate_corpus(spec(50, 8))) != dump(generate_corpus(spec(50, 9))));

  for (auto family : {TemplateFamily::kFilmography, TemplateFamily::kCareerStats}) {
    auto data = generate_corpus(spec(300, 5, family));
    const auto& function_words = template_function_words(family);
    for (const Example& ex : data) {
      const Table& t = ex.table;
      CHECK(t.data_rows().size() >= 2);
      CHECK(t.data_rows().size() <= 5);
      CHECK(t.data_cols().size() >= 2);
      CHECK(t.data_cols().size() <= 4);
      CHECK(t.highlighted().size() >= 1);
      CHECK(t.highlighted().size() <= 3);
      std::set<std::string> words(function_words.begin(), function_words.end());
      for (const std::string& s : {t.page_title(), t.section_title()}) {
        for (auto& w : split_words(s)) words.insert(w);
      }
      for (const auto& row : t.rows()) {
        for (const Cell& c : row) {
          for (auto& w : split_words(c.content)) words.insert(w);
        }
      }
      for (const std::string& w : split_words(ex.target)) {
        INFO(ex.target);
        CHECK(words.count(w) == 1);
      }
    }
  }
  std::vector<Example> big = generate_corpus(spec(2000, 6));
  auto more = generate_corpus(spec(2000, 7, TemplateFamily::kCareerStats));
  big.insert(big.end(), more.begin(), more.end());
  CHECK(build_vocabulary(big).size() < 2000);

  CorpusSpec bad = spec(3, 1);
  bad.min_rows = 4;
  bad.max_rows = 2;
  CHECK_THROWS_AS(generate_corpus(bad), Error);
}

TEST_CASE("ToTTo import") {
  const std::string line = R"({
    "table_page_title": "Stephen Chow", "table_section_title": "Filmography",
    "table": [
      [{"value": "Year", "is_header": true, "column_span": 1, "row_span": 1},
       {"value": "Film", "is_header": true, "column_span": 1, "row_span": 1},
       {"value": "Role", "is_header": true, "column_span": 1, "row_span": 1}],
      [{"value": "1992", "is_header": false, "column_span": 1, "row_span": 2},
       {"value": "Royal Tramp", "is_header": false, "column_span": 1, "row_span": 1},
       {"value": "Wai Siu-bo", "is_header": false, "column_span": 1, "row_span": 1}],
      [{"value": "Royal Tramp II", "is_header": false, "column_span": 2, "row_span": 1}]
    ],
    "highlighted_cells": [[1, 1], [2, 0]],
    "sentence_annotations": [{"final_sentence": "He played Wai Siu-bo."}]
  })";
  std::string flat;
  for (char c : line) {
    if (c != '\n') flat.push_back(c);
  }
  Example ex = example_from_totto_json(flat);
  const Table& t = ex.table;
  CHECK(ex.target == "He played Wai Siu-bo.");
  REQUIRE(t.n_rows() == 3);
  REQUIRE(t.n_cols() == 3);
  CHECK(t.is_header_row(0));
  CHECK(t.cell(2, 0).content == "1992");  // row span replicated
  CHECK(t.cell(2, 1).content == "Royal Tramp II");
  CHECK(t.cell(2, 2).content == "Royal Tramp II");  // column span replicated
  // The first raw cell of row 2 starts at grid column 1.
  CHECK(t.highlighted() == std::vector<Coord>{{1, 1}, {2, 1}});
  CHECK_THROWS_AS(example_from_totto_json("{}"), Error);
}
