#pragma once

#include <cctype>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "finch/util.hpp"

namespace finch::sql {

// Diagnostics deliberately mirror the SQLite style ("near \"x\": syntax
// error", "unrecognized token: \"x\"", "incomplete input") so one error
// classifier serves both the embedded engine and this parser.
struct LexError : std::runtime_error {
  explicit LexError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class TokKind {
  End,
  Ident,    // bare or quoted identifier (quoted flag set)
  String,   // 'text' with '' escapes, text holds unescaped content
  Number,   // decimal or hex literal, text holds raw spelling
  Blob,     // x'hex', text holds hex digits
  Op,       // operator or punctuation, text holds the symbol
};

struct Token {
  TokKind kind = TokKind::End;
  std::string text;
  bool quoted = false;  // identifiers only
  size_t pos = 0;

  std::string lower() const { return to_lower(text); }
  bool is_op(std::string_view s) const { return kind == TokKind::Op && text == s; }
  bool is_kw(std::string_view kw) const {
    return kind == TokKind::Ident && !quoted && starts_with_ci(text, kw) && text.size() == kw.size();
  }
};

namespace detail {

inline bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
inline bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

}  // namespace detail

inline std::vector<Token> lex(std::string_view sql) {
  std::vector<Token> out;
  size_t i = 0;
  const size_t n = sql.size();
  auto bad_token = [&](size_t start) -> LexError {
    std::string rest(sql.substr(start, std::min<size_t>(n - start, 40)));
    return LexError("unrecognized token: \"" + rest + "\"");
  };
  while (i < n) {
    char c = sql[i];
    if (is_space(c)) {
      ++i;
      continue;
    }
    if (c == '-' && i + 1 < n && sql[i + 1] == '-') {
      while (i < n && sql[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && sql[i + 1] == '*') {
      i += 2;
      while (i + 1 < n && !(sql[i] == '*' && sql[i + 1] == '/')) ++i;
      i = (i + 1 < n) ? i + 2 : n;
      continue;
    }
    Token t;
    t.pos = i;
    if (detail::ident_start(c)) {
      size_t s = i;
      while (i < n && detail::ident_char(sql[i])) ++i;
      std::string word(sql.substr(s, i - s));
      // blob literal x'...'
      if ((word == "x" || word == "X") && i < n && sql[i] == '\'') {
        size_t bs = ++i;
        while (i < n && sql[i] != '\'') ++i;
        if (i >= n) throw bad_token(s);
        std::string hex(sql.substr(bs, i - bs));
        ++i;
        for (char h : hex)
          if (!std::isxdigit(static_cast<unsigned char>(h))) throw bad_token(s);
        t.kind = TokKind::Blob;
        t.text = to_lower(hex);
        out.push_back(std::move(t));
        continue;
      }
      t.kind = TokKind::Ident;
      t.text = std::move(word);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(sql[i + 1])))) {
      size_t s = i;
      bool hex = false;
      if (c == '0' && i + 1 < n && (sql[i + 1] == 'x' || sql[i + 1] == 'X')) {
        i += 2;
        hex = true;
        size_t ds = i;
        while (i < n && std::isxdigit(static_cast<unsigned char>(sql[i]))) ++i;
        if (i == ds || (i < n && detail::ident_char(sql[i]))) throw bad_token(s);
      } else {
        while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
        if (i < n && sql[i] == '.') {
          ++i;
          while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
        }
        if (i < n && (sql[i] == 'e' || sql[i] == 'E')) {
          size_t e = i + 1;
          if (e < n && (sql[e] == '+' || sql[e] == '-')) ++e;
          if (e >= n || !std::isdigit(static_cast<unsigned char>(sql[e]))) throw bad_token(s);
          i = e;
          while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
        }
        if (i < n && detail::ident_char(sql[i])) throw bad_token(s);
      }
      (void)hex;
      t.kind = TokKind::Number;
      t.text = std::string(sql.substr(s, i - s));
      out.push_back(std::move(t));
      continue;
    }
    if (c == '\'') {
      size_t s = i++;
      std::string content;
      bool closed = false;
      while (i < n) {
        if (sql[i] == '\'') {
          if (i + 1 < n && sql[i + 1] == '\'') {
            content.push_back('\'');
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        content.push_back(sql[i++]);
      }
      if (!closed) throw bad_token(s);
      t.kind = TokKind::String;
      t.text = std::move(content);
      out.push_back(std::move(t));
      continue;
    }
    if (c == '"' || c == '`' || c == '[') {
      char close = (c == '[') ? ']' : c;
      size_t s = i++;
      std::string content;
      bool closed = false;
      while (i < n) {
        if (sql[i] == close) {
          if (close != ']' && i + 1 < n && sql[i + 1] == close) {
            content.push_back(close);
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        content.push_back(sql[i++]);
      }
      if (!closed) throw bad_token(s);
      t.kind = TokKind::Ident;
      t.quoted = true;
      t.text = std::move(content);
      out.push_back(std::move(t));
      continue;
    }
    // multi-char operators first
    auto two = sql.substr(i, 2);
    if (two == "||" || two == "<<" || two == ">>" || two == "<=" || two == ">=" ||
        two == "==" || two == "!=" || two == "<>" || two == "->") {
      if (two == "->" && i + 2 < n && sql[i + 2] == '>') {
        t.kind = TokKind::Op;
        t.text = "->>";
        i += 3;
      } else {
        t.kind = TokKind::Op;
        t.text = std::string(two);
        i += 2;
      }
      out.push_back(std::move(t));
      continue;
    }
    if (std::string_view("+-*/%=<>(),.;&|~").find(c) != std::string_view::npos) {
      t.kind = TokKind::Op;
      t.text = std::string(1, c);
      ++i;
      out.push_back(std::move(t));
      continue;
    }
    throw bad_token(i);
  }
  out.push_back(Token{TokKind::End, "", false, n});
  return out;
}

}  // namespace finch::sql
