#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "redsimpl/error.hpp"

namespace redsimpl {

struct SourceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t line = 1;
  std::size_t column = 1;
};

enum class Tok { Name, Number, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourceSpan span;
};

/// Error carrying the source location it was raised at.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, SourceSpan span)
      : Error(ErrorCode::SyntaxError,
              std::to_string(span.line) + ":" + std::to_string(span.column) + ": " + what),
        span_(span) {}
  const SourceSpan& span() const { return span_; }

 private:
  SourceSpan span_;
};

inline std::vector<Token> tokenize(std::string_view src) {
  static const char* const kMulti[] = {"->", "<=", ">=", "==", "&&"};
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#' || (c == '/' && i + 1 < src.size() && src[i + 1] == '/')) {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.span = SourceSpan{i, i, line, col};
    std::size_t len = 0;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      t.kind = Tok::Name;
      while (i + len < src.size() && (std::isalnum(static_cast<unsigned char>(src[i + len])) || src[i + len] == '_'))
        ++len;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      t.kind = Tok::Number;
      while (i + len < src.size() && std::isdigit(static_cast<unsigned char>(src[i + len]))) ++len;
      if (i + len + 1 < src.size() && src[i + len] == '.' && std::isdigit(static_cast<unsigned char>(src[i + len + 1]))) {
        ++len;
        while (i + len < src.size() && std::isdigit(static_cast<unsigned char>(src[i + len]))) ++len;
      }
    } else {
      t.kind = Tok::Punct;
      len = 1;
      for (const char* m : kMulti)
        if (src.substr(i, 2) == m) len = 2;
      if (len == 1 && std::string_view("{}[]()<>=,;:+-*/|!").find(c) == std::string_view::npos)
        throw SyntaxError(std::string("unexpected character '") + c + "'", t.span);
    }
    t.text = std::string(src.substr(i, len));
    advance(len);
    t.span.end = i;
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = Tok::End;
  end.span = SourceSpan{i, i, line, col};
  out.push_back(end);
  return out;
}

/// Cursor over a token list with the usual expect/accept helpers.
class TokenStream {
 public:
  explicit TokenStream(std::vector<Token> toks) : toks_(std::move(toks)) {}

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t k = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[k];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool at_end() const { return peek().kind == Tok::End; }
  bool is(std::string_view text) const { return peek().kind != Tok::End && peek().text == text; }
  bool accept(std::string_view text) {
    if (!is(text)) return false;
    next();
    return true;
  }
  const Token& expect(std::string_view text) {
    if (!is(text)) error("expected '" + std::string(text) + "'");
    return next();
  }
  std::string expect_name() {
    if (peek().kind != Tok::Name) error("expected a name");
    return next().text;
  }
  [[noreturn]] void error(const std::string& what) const {
    std::string found = peek().kind == Tok::End ? "end of input" : "'" + peek().text + "'";
    throw SyntaxError(what + ", found " + found, peek().span);
  }
  std::size_t position() const { return pos_; }
  void rewind(std::size_t pos) { pos_ = pos; }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace redsimpl
