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

#include "vocab.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include "error.hpp"

namespace tabinv {

namespace {

const std::vector<std::string>& reserved_tokens() {
  static const std::vector<std::string> kReserved = {
      "<pad>",
      "<s>",
      "</s>",
      "<unk>",
      std::string(markers::kPageTitleOpen),
      std::string(markers::kPageTitleClose),
      std::string(markers::kSectionTitleOpen),
      std::string(markers::kSectionTitleClose),
      std::string(markers::kTableOpen),
      std::string(markers::kTableClose),
      std::string(markers::kCellOpen),
      std::string(markers::kCellClose),
      std::string(markers::kHeaderOpen),
      std::string(markers::kHeaderClose),
      std::string(markers::kSep),
  };
  return kReserved;
}

bool is_space(unsigned char c) { return std::isspace(c) != 0; }
bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }
// Bytes >= 0x80 belong to UTF-8 sequences and are treated as word characters.
bool is_punct(unsigned char c) { return c < 0x80 && std::ispunct(c) != 0; }

}  // namespace

Vocabulary::Vocabulary() : tokens_(reserved_tokens()) { index(); }

std::size_t Vocabulary::reserved_count() const {
  return reserved_tokens().size();
}

void Vocabulary::index() {
  ids_.clear();
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    auto [it, inserted] = ids_.emplace(tokens_[i], static_cast<TokenId>(i));
    if (!inserted) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate vocabulary token '" + tokens_[i] + "'");
    }
  }
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  const auto& reserved = reserved_tokens();
  if (tokens.size() < reserved.size() ||
      !std::equal(reserved.begin(), reserved.end(), tokens.begin())) {
    throw Error(ErrorCode::kInvalidArgument,
                "vocabulary does not start with the reserved tokens");
  }
  Vocabulary v;
  v.tokens_ = std::move(tokens);
  v.index();
  return v;
}

Vocabulary Vocabulary::build(std::span<const std::string> texts) {
  std::set<std::string> words;
  for (const std::string& text : texts) {
    for (std::string& w : split_words(text)) words.insert(std::move(w));
  }
  Vocabulary v;
  for (const std::string& w : words) {
    if (!v.contains(w)) v.tokens_.push_back(w);
  }
  v.index();
  return v;
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open vocabulary " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return from_tokens(std::move(tokens));
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write vocabulary " + path);
  for (const std::string& t : tokens_) out << t << '\n';
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return ids_.count(std::string(token)) != 0;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw Error(ErrorCode::kOutOfRange,
                "token id " + std::to_string(id) + " is out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) words.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_space(c)) {
      flush();
    } else if (is_punct(c)) {
      const bool numeric_separator =
          (c == '.' || c == ',') && !current.empty() &&
          is_digit(static_cast<unsigned char>(current.back())) &&
          i + 1 < text.size() &&
          is_digit(static_cast<unsigned char>(text[i + 1]));
      if (numeric_separator) {
        current.push_back(static_cast<char>(c));
      } else {
        flush();
        words.emplace_back(1, static_cast<char>(c));
      }
    } else {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return words;
}

std::vector<TokenId> tokenize(std::string_view text, const Vocabulary& vocab) {
  std::vector<TokenId> ids;
  for (const std::string& w : split_words(text)) ids.push_back(vocab.id(w));
  return ids;
}

std::string detokenize(std::span<const TokenId> ids, const Vocabulary& vocab) {
  std::string out;
  for (TokenId id : ids) {
    if (id == Vocabulary::kPad || id == Vocabulary::kBos ||
        id == Vocabulary::kEos) {
      continue;
    }
    if (!out.empty()) out.push_back(' ');
    out += vocab.token(id);
  }
  return out;
}

std::string normalize_text(std::string_view text) {
  std::string out;
  for (const std::string& w : split_words(text)) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

}  // namespace tabinv
