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

#include "corpus.hpp"

#include <algorithm>
#include <array>
#include <string_view>

#include "error.hpp"
#include "rng.hpp"

namespace tabinv {

namespace {

constexpr std::array<std::string_view, 24> kFirstNames = {
    "Stephen", "Anita",  "Jackie", "Maggie", "Tony",  "Carina", "Andy",
    "Gigi",    "Leslie", "Brigitte", "Chow", "Sammi", "Aaron", "Faye",
    "Donnie",  "Cecilia", "Nicholas", "Karen", "Louis", "Charlene", "Simon",
    "Joey",    "Eric",   "Michelle"};

constexpr std::array<std::string_view, 24> kLastNames = {
    "Chow",  "Mui",   "Chan",  "Cheung", "Leung", "Lau",  "Lai",  "Yen",
    "Wong",  "Lin",   "Kwok",  "Tse",    "Koo",   "Yip",  "Ng",   "Ho",
    "Fung",  "Tsang", "Lam",   "Cheng",  "Yuen",  "Tang", "Mok",  "Shek"};

constexpr std::array<std::string_view, 28> kFilmAdjectives = {
    "Royal",  "Silent", "Golden", "Flying", "Lost",   "Iron",  "Crimson",
    "Hidden", "Last",   "Broken", "Eternal", "Wild",  "Secret", "Fallen",
    "Shadow", "Mighty", "Drunken", "Lucky", "Burning", "Frozen", "Wandering",
    "Jade",   "Midnight", "Twin",  "Painted", "Dragon", "Lonely", "Savage"};

constexpr std::array<std::string_view, 28> kFilmNouns = {
    "Tramp",   "Beggars", "Sword",  "Dragon", "Master", "Warrior", "Harbour",
    "Empire",  "Legend",  "Tiger",  "Fist",   "Blade",  "Storm",   "Mountain",
    "River",   "Lotus",   "Monk",   "Bride",  "Prince", "Island",  "Assassin",
    "Phoenix", "Fortune", "Kingdom", "Lantern", "Temple", "Serpent", "Eagle"};

constexpr std::array<std::string_view, 30> kRoles = {
    "Wai Siu-bo", "So Chan",     "Ah Kam",     "Wong Fei-hung", "Lo Fung",
    "Chief Inspector", "Uncle Tak", "Siu Ming", "Captain Ko",   "Dr. Lam",
    "Ling Ling",  "Master Pak",  "Kid Lau",    "Ah Fai",        "Madam Yip",
    "Brother Keung", "Old Chiu", "Detective Ho", "Princess Yu", "Fat Chai",
    "Lady Mok",   "Tai Ping",    "Young Ding", "Sister Bo",     "General Cho",
    "Judge Pao",  "Ah Sing",     "Big Brother", "Officer Tse",  "Mr. Kwan"};

constexpr std::array<std::string_view, 24> kTeamPlaces = {
    "Riverside", "Harbour", "Northgate", "Eastfield", "Kowloon", "Westmoor",
    "Highbury",  "Lakeside", "Stonebridge", "Ashford", "Millbrook", "Redcliff",
    "Oakham",    "Fairview", "Southport", "Kingsway", "Hillcrest", "Brookdale",
    "Seaview",   "Thornton", "Greenvale", "Marlow",  "Ironside", "Bayview"};

constexpr std::array<std::string_view, 8> kTeamSuffixes = {
    "United", "City", "Rovers", "Athletic", "Wanderers", "Rangers", "Town",
    "Albion"};

template <std::size_t N>
std::string pick(Rng& rng, const std::array<std::string_view, N>& words) {
  return std::string(words[rng.uniform_index(N)]);
}

// `count` distinct strings from `draw`.
template <typename Draw>
std::vector<std::string> distinct(std::size_t count, Draw&& draw) {
  std::vector<std::string> out;
  while (out.size() < count) {
    std::string v = draw();
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}

std::vector<std::string> distinct_numbers(Rng& rng, std::size_t count, int lo,
                                          int hi, bool ascending) {
  std::vector<std::string> values = distinct(count, [&] {
    return std::to_string(lo + static_cast<int>(rng.uniform_index(
                                   static_cast<std::size_t>(hi - lo + 1))));
  });
  if (ascending) {
    std::sort(values.begin(), values.end(),
              [](const std::string& a, const std::string& b) {
                return std::stoi(a) < std::stoi(b);
              });
  }
  return values;
}

std::string join_list(std::vector<std::string> items) {
  std::sort(items.begin(), items.end());
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += (i + 1 == items.size()) ? " and " : ", ";
    out += items[i];
  }
  return out;
}

// Attribute slots; position in the array is the canonical column order.
struct Schema {
  std::array<std::string_view, 4> headers;
  std::array<int, 2> required;  // always present
  int third;                    // added for >= 3 columns
  int fourth;                   // added for 4 columns
};

constexpr Schema kFilmSchema{{"Year", "Film", "Role", "Director"}, {1, 2}, 0, 3};
constexpr Schema kStatsSchema{{"Season", "Team", "Apps", "Goals"}, {1, 3}, 0, 2};

enum FilmAttr { kYear = 0, kFilm = 1, kRole = 2, kDirector = 3 };
enum StatsAttr { kSeason = 0, kTeam = 1, kApps = 2, kGoals = 3 };

struct Draft {
  std::string subject;
  std::vector<int> attrs;                      // column -> attribute slot
  std::vector<std::vector<std::string>> values;  // [row][column]
};

Draft draft_table(Rng& rng, const CorpusSpec& spec, const Schema& schema,
                  std::size_t n_rows, std::size_t n_cols) {
  Draft d;
  d.subject = pick(rng, kFirstNames) + " " + pick(rng, kLastNames);
  std::vector<int> attrs = {schema.required[0], schema.required[1]};
  if (n_cols >= 3) attrs.push_back(schema.third);
  if (n_cols >= 4) attrs.push_back(schema.fourth);
  std::sort(attrs.begin(), attrs.end());
  d.attrs = attrs;

  std::vector<std::vector<std::string>> columns;
  for (int attr : attrs) {
    std::vector<std::string> col;
    if (spec.family == TemplateFamily::kFilmography) {
      switch (attr) {
        case kYear:
          col = distinct_numbers(rng, n_rows, 1980, 2019, true);
          break;
        case kFilm:
          col = distinct(n_rows, [&] {
            return pick(rng, kFilmAdjectives) + " " + pick(rng, kFilmNouns);
          });
          break;
        case kRole:
          col = distinct(n_rows, [&] { return pick(rng, kRoles); });
          break;
        default:
          col = distinct(n_rows, [&] {
            return pick(rng, kFirstNames) + " " + pick(rng, kLastNames);
          });
          break;
      }
    } else {
      switch (attr) {
        case kSeason:
          col = distinct_numbers(rng, n_rows, 1990, 2020, true);
          break;
        case kTeam:
          col = distinct(n_rows, [&] {
            return pick(rng, kTeamPlaces) + " " + pick(rng, kTeamSuffixes);
          });
          break;
        case kApps:
          col = distinct_numbers(rng, n_rows, 1, 40, false);
          break;
        default:
          col = distinct_numbers(rng, n_rows, 0, 30, false);
          break;
      }
    }
    columns.push_back(std::move(col));
  }
  d.values.assign(n_rows, std::vector<std::string>(n_cols));
  for (std::size_t r = 0; r < n_rows; ++r) {
    for (std::size_t c = 0; c < n_cols; ++c) d.values[r][c] = columns[c][r];
  }
  return d;
}

int column_of(const Draft& d, int attr) {
  for (std::size_t c = 0; c < d.attrs.size(); ++c) {
    if (d.attrs[c] == attr) return static_cast<int>(c);
  }
  return -1;
}

// ---- sentence templates

std::string film_row(const Draft& d, std::size_t row,
                     const std::vector<std::size_t>& cols) {
  auto has = [&](int attr) {
    for (std::size_t c : cols) {
      if (d.attrs[c] == attr) return true;
    }
    return false;
  };
  auto value = [&](int attr) {
    return d.values[row][static_cast<std::size_t>(column_of(d, attr))];
  };
  std::string s;
  if (has(kYear)) s += "In " + value(kYear) + ", ";
  s += d.subject;
  if (has(kRole) && has(kFilm)) {
    s += " played " + value(kRole) + " in the film " + value(kFilm);
  } else if (has(kRole)) {
    s += " played " + value(kRole);
  } else if (has(kFilm)) {
    s += " appeared in " + value(kFilm);
  } else {
    s += " made a film";
  }
  if (has(kDirector)) {
    s += has(kFilm) ? ", directed by " + value(kDirector)
                    : " with director " + value(kDirector);
  }
  return s + ".";
}

std::string film_column(const Draft& d, int attr,
                        const std::vector<std::string>& items) {
  const std::string list = join_list(items);
  switch (attr) {
    case kFilm:
      return d.subject + " appeared in " + list + ".";
    case kRole:
      return d.subject + " played " + list + ".";
    case kYear:
      return d.subject + " made films in " + list + ".";
    default:
      return d.subject + " worked with " + list + ".";
  }
}

std::string stats_row(const Draft& d, std::size_t row,
                      const std::vector<std::size_t>& cols) {
  auto has = [&](int attr) {
    for (std::size_t c : cols) {
      if (d.attrs[c] == attr) return true;
    }
    return false;
  };
  auto value = [&](int attr) {
    return d.values[row][static_cast<std::size_t>(column_of(d, attr))];
  };
  std::string s;
  if (has(kSeason)) s += "In the " + value(kSeason) + " season, ";
  s += d.subject;
  if (has(kGoals)) s += " scored " + value(kGoals) + " goals";
  if (has(kApps)) {
    s += (has(kGoals) ? " in " : " made ") + value(kApps) + " appearances";
  }
  if (has(kTeam)) s += (has(kGoals) || has(kApps) ? " for " : " played for ") + value(kTeam);
  if (!has(kGoals) && !has(kApps) && !has(kTeam)) s += " played";
  return s + ".";
}

std::string stats_column(const Draft& d, int attr,
                         const std::vector<std::string>& items) {
  const std::string list = join_list(items);
  switch (attr) {
    case kTeam:
      return d.subject + " played for " + list + ".";
    case kSeason:
      return d.subject + " played in the " + list + " seasons.";
    case kGoals:
      return d.subject + " scored " + list + " goals.";
    default:
      return d.subject + " made " + list + " appearances.";
  }
}

struct Highlight {
  std::vector<Coord> cells;  // grid coordinates (header row is row 0)
  std::string target;
};

std::vector<std::size_t> choose_distinct(Rng& rng, std::size_t n,
                                         std::size_t k) {
  std::vector<std::size_t> all = rng.permutation(n);
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

Highlight choose_highlight(Rng& rng, const CorpusSpec& spec, const Draft& d) {
  const bool film = spec.family == TemplateFamily::kFilmography;
  const std::size_t n_rows = d.values.size();
  const std::size_t n_cols = d.attrs.size();
  const std::size_t k = spec.min_highlight +
                        rng.uniform_index(spec.max_highlight - spec.min_highlight + 1);

  auto row_sentence = [&](std::size_t row, const std::vector<std::size_t>& cols) {
    return film ? film_row(d, row, cols) : stats_row(d, row, cols);
  };
  auto same_row = [&](std::size_t count) {
    const std::size_t row = rng.uniform_index(n_rows);
    const std::vector<std::size_t> cols = choose_distinct(rng, n_cols, count);
    Highlight h;
    for (std::size_t c : cols) h.cells.push_back({row + 1, c});
    h.target = row_sentence(row, cols);
    return h;
  };
  auto same_col = [&](std::size_t count) {
    const std::size_t col = rng.uniform_index(n_cols);
    const std::vector<std::size_t> rows = choose_distinct(rng, n_rows, count);
    Highlight h;
    std::vector<std::string> items;
    for (std::size_t r : rows) {
      h.cells.push_back({r + 1, col});
      items.push_back(d.values[r][col]);
    }
    h.target = film ? film_column(d, d.attrs[col], items)
                    : stats_column(d, d.attrs[col], items);
    return h;
  };
  // One row contributes two cells, another row one; which value belongs to
  // which is only recoverable from the layout.
  auto cross = [&] {
    const std::vector<std::size_t> rows = choose_distinct(rng, n_rows, 2);
    const bool flip = rng.uniform_index(2) == 1;
    const std::size_t a = flip ? rows[1] : rows[0];
    const std::size_t b = flip ? rows[0] : rows[1];
    const int anchor = film ? static_cast<int>(kFilm) : static_cast<int>(kTeam);
    const int detail = film ? static_cast<int>(kRole) : static_cast<int>(kGoals);
    const auto ca = static_cast<std::size_t>(column_of(d, anchor));
    const auto cd = static_cast<std::size_t>(column_of(d, detail));
    Highlight h;
    h.cells = {{a + 1, ca}, {a + 1, cd}, {b + 1, ca}};
    h.target = film ? d.subject + " played " + d.values[a][cd] +
                          " in the film " + d.values[a][ca] +
                          " and also appeared in " + d.values[b][ca] + "."
                    : d.subject + " scored " + d.values[a][cd] + " goals for " +
                          d.values[a][ca] + " and also played for " +
                          d.values[b][ca] + ".";
    return h;
  };

  if (k <= 1) return same_row(1);
  if (k == 2) {
    if (n_rows >= 2 && rng.uniform() < 0.3) return same_col(2);
    return same_row(2);
  }
  std::vector<int> options;
  if (n_cols >= 3) options.push_back(0);
  if (n_rows >= 2) {
    options.push_back(1);
    options.push_back(1);
  }
  if (n_rows >= 3) options.push_back(2);
  switch (options[rng.uniform_index(options.size())]) {
    case 0:
      return same_row(3);
    case 1:
      return cross();
    default:
      return same_col(3);
  }
}

}  // namespace

void CorpusSpec::validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, what);
  };
  if (min_rows < 1 || min_rows > max_rows || max_rows > 8) {
    fail("data row range must satisfy 1 <= min <= max <= 8");
  }
  if (min_cols < 2 || min_cols > max_cols || max_cols > 4) {
    fail("data column range must satisfy 2 <= min <= max <= 4");
  }
  if (min_highlight < 1 || min_highlight > max_highlight || max_highlight > 3) {
    fail("highlight range must satisfy 1 <= min <= max <= 3");
  }
}

std::vector<Example> generate_corpus(const CorpusSpec& spec) {
  spec.validate();
  const Schema& schema =
      spec.family == TemplateFamily::kFilmography ? kFilmSchema : kStatsSchema;
  const std::string section = spec.family == TemplateFamily::kFilmography
                                  ? "Filmography"
                                  : "Career statistics";
  std::vector<Example> out;
  out.reserve(spec.n_tables);
  for (std::size_t i = 0; i < spec.n_tables; ++i) {
    Rng rng(mix_seed(spec.seed, i));
    const std::size_t n_rows =
        spec.min_rows + rng.uniform_index(spec.max_rows - spec.min_rows + 1);
    const std::size_t n_cols =
        spec.min_cols + rng.uniform_index(spec.max_cols - spec.min_cols + 1);
    const Draft d = draft_table(rng, spec, schema, n_rows, n_cols);
    const Highlight h = choose_highlight(rng, spec, d);

    std::vector<std::vector<Cell>> rows;
    std::vector<Cell> header;
    for (int attr : d.attrs) {
      header.push_back(Cell{std::string(schema.headers[static_cast<std::size_t>(attr)]),
                            false, true});
    }
    rows.push_back(std::move(header));
    for (const auto& values : d.values) {
      std::vector<Cell> row;
      for (const std::string& v : values) row.push_back(Cell{v, false, false});
      rows.push_back(std::move(row));
    }
    out.push_back(Example{Table(d.subject, section, std::move(rows), h.cells),
                          h.target});
  }
  return out;
}

const std::set<std::string>& template_function_words(TemplateFamily family) {
  static const std::set<std::string> kFilm = {
      "in", "the", "film", "played", "appeared", "made", "a", "films",
      "directed", "by", "with", "director", "worked", "and", "also", ",", "."};
  static const std::set<std::string> kStats = {
      "in", "the", "season", "seasons", "scored", "goals", "made",
      "appearances", "for", "played", "and", "also", ",", "."};
  return family == TemplateFamily::kFilmography ? kFilm : kStats;
}

}  // namespace tabinv
