// Copyright 2026 The CRTM Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace crtm {

// Half-open [begin, end) range over token indices.
struct TokenRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return end <= begin; }
  bool contains(std::size_t i) const { return i >= begin && i < end; }
  bool contains(const TokenRange& r) const { return r.begin >= begin && r.end <= end; }
  bool operator==(const TokenRange&) const = default;
};

// Half-open byte range inside a text.
struct ByteRange {
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct TokenizedText {
  std::vector<std::string> tokens;
  std::vector<ByteRange> offsets;  // one per token
  std::vector<TokenRange> sentences;
};

namespace detail {

// Bytes >= 0x80 are treated as word characters so UTF-8 letters stay
// inside their words. Only ASCII is case-folded.
inline bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

inline bool is_sentence_break(char c) { return c == '.' || c == '!' || c == '?' || c == '\n'; }

inline bool inside_any(std::size_t pos, std::span<const ByteRange> ranges) {
  for (const auto& r : ranges)
    if (pos >= r.begin && pos < r.end) return true;
  return false;
}

}  // namespace detail

// Lowercased alphanumeric-run tokens, sentences split on . ! ? and newline.
// Break characters inside a protected byte range (anchor texts) never end a
// sentence, so every anchor stays within a single sentence.
inline TokenizedText tokenize_and_segment(std::string_view text,
                                          std::span<const ByteRange> protected_ranges = {}) {
  TokenizedText out;
  std::size_t sentence_start = 0;
  std::size_t i = 0;
  auto close_sentence = [&] {
    if (out.tokens.size() > sentence_start) {
      out.sentences.push_back({sentence_start, out.tokens.size()});
      sentence_start = out.tokens.size();
    }
  };
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (detail::is_word_byte(c)) {
      const std::size_t start = i;
      std::string tok;
      while (i < text.size() && detail::is_word_byte(static_cast<unsigned char>(text[i]))) {
        char ch = text[i];
        if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
        tok.push_back(ch);
        ++i;
      }
      out.tokens.push_back(std::move(tok));
      out.offsets.push_back({start, i});
      continue;
    }
    if (detail::is_sentence_break(text[i]) && !detail::inside_any(i, protected_ranges)) close_sentence();
    ++i;
  }
  close_sentence();
  return out;
}

}  // namespace crtm
