#pragma once

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace derivata {

struct Token {
  std::string text;
  std::size_t char_start = 0;  // byte offset into the source text
  std::size_t char_end = 0;    // one past the last byte
};

using TokenSeq = std::vector<Token>;

namespace detail {

inline bool is_space_byte(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

inline bool is_digit_byte(char c) {
  return c >= '0' && c <= '9';
}

// Word characters: ASCII alphanumerics plus any non-ASCII byte, so UTF-8
// sequences like "£100" stay in one token.
inline bool is_word_byte(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u) != 0;
}

inline bool is_alpha_byte(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) != 0;
}

}  // namespace detail

// Whitespace-and-punctuation tokenizer. Runs of word bytes form one token;
// '.' and ',' stay inside a token only between digits ("47.3", "25,532");
// an apostrophe grabs the letters after it ("Linda's" -> "Linda", "'s");
// every other punctuation byte is its own token. Byte offsets always slice
// the original text exactly.
inline TokenSeq tokenize(std::string_view text) {
  using namespace detail;
  TokenSeq out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto emit = [&](std::size_t a, std::size_t b) {
    out.push_back(Token{std::string(text.substr(a, b - a)), a, b});
  };
  while (i < n) {
    char c = text[i];
    if (is_space_byte(c)) {
      ++i;
    } else if (is_word_byte(c)) {
      std::size_t j = i;
      while (j < n) {
        char cj = text[j];
        if (is_word_byte(cj)) {
          ++j;
        } else if ((cj == '.' || cj == ',') && j > i && is_digit_byte(text[j - 1]) &&
                   j + 1 < n && is_digit_byte(text[j + 1])) {
          ++j;
        } else {
          break;
        }
      }
      emit(i, j);
      i = j;
    } else if (c == '\'') {
      std::size_t j = i + 1;
      while (j < n && is_alpha_byte(text[j])) ++j;
      emit(i, j);
      i = j;
    } else {
      emit(i, i + 1);
      ++i;
    }
  }
  return out;
}

// Space-joined text of tokens [start, end).
inline std::string join_tokens(const TokenSeq& tokens, std::size_t start, std::size_t end) {
  std::string out;
  for (std::size_t t = start; t < end && t < tokens.size(); ++t) {
    if (!out.empty()) out += ' ';
    out += tokens[t].text;
  }
  return out;
}

}  // namespace derivata
