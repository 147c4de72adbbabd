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

#ifndef TABINV_CORE_VOCAB_HPP_
#define TABINV_CORE_VOCAB_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tabinv {

using TokenId = std::int32_t;

namespace markers {
inline constexpr std::string_view kPageTitleOpen = "<page_title>";
inline constexpr std::string_view kPageTitleClose = "</page_title>";
inline constexpr std::string_view kSectionTitleOpen = "<section_title>";
inline constexpr std::string_view kSectionTitleClose = "</section_title>";
inline constexpr std::string_view kTableOpen = "<table>";
inline constexpr std::string_view kTableClose = "</table>";
inline constexpr std::string_view kCellOpen = "<cell>";
inline constexpr std::string_view kCellClose = "</cell>";
inline constexpr std::string_view kHeaderOpen = "<header>";
inline constexpr std::string_view kHeaderClose = "</header>";
inline constexpr std::string_view kSep = "[SEP]";
}  // namespace markers

// Dense token <-> id bijection. Ids 0..3 are PAD, BOS, EOS, UNK, followed by
// the structural markers, followed by corpus tokens in sorted order.
class Vocabulary {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kBos = 1;
  static constexpr TokenId kEos = 2;
  static constexpr TokenId kUnk = 3;

  // Reserved tokens only.
  Vocabulary();

  // Throws Error(kInvalidArgument) if the reserved prefix is missing or a
  // token repeats.
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  // Reserved tokens plus every word of `texts`, sorted.
  static Vocabulary build(std::span<const std::string> texts);

  // One token per line, line number = id.
  static Vocabulary load(const std::string& path);
  void save(const std::string& path) const;

  TokenId id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(TokenId id) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t reserved_count() const;
  bool is_special(TokenId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < reserved_count();
  }

  bool operator==(const Vocabulary& other) const {
    return tokens_ == other.tokens_;
  }

 private:
  void index();

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

// Lowercases and splits on whitespace; punctuation characters become tokens
// of their own, except '.' and ',' between digits (numbers stay whole).
std::vector<std::string> split_words(std::string_view text);

std::vector<TokenId> tokenize(std::string_view text, const Vocabulary& vocab);

// Space-joined token texts, skipping PAD/BOS/EOS.
std::string detokenize(std::span<const TokenId> ids, const Vocabulary& vocab);

// split_words joined by single spaces; the normal form used for references.
std::string normalize_text(std::string_view text);

}  // namespace tabinv

#endif  // TABINV_CORE_VOCAB_HPP_
