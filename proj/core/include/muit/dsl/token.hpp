#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "muit/dsl/diagnostic.hpp"

namespace muit::dsl {

enum class TokenKind {
  Error,
  Identifier,
  String,
  Integer,
  DateTime,
  // keywords
  KwEntity,
  KwOperation,
  KwScreen,
  KwWidget,
  KwTouch,
  KwHandler,
  KwVar,
  KwForeach,
  KwFor,
  KwIn,
  KwIf,
  KwElseif,
  KwElse,
  KwReturn,
  KwWhen,
  KwWhere,
  KwHeader,
  KwImport,
  KwTrue,
  KwFalse,
  KwNew,
  KwFunction,
  KwAsync,
  // punctuation
  LBrace,
  RBrace,
  LParen,
  RParen,
  Comma,
  Semicolon,
  Colon,
  Dot,
  At,
  Pipe,
  Slash,
  // operators
  Plus,
  Minus,
  Star,
  Percent,
  Assign,
  EqEq,
  NotEq,
  Less,
  Greater,
  LessEq,
  GreaterEq,
  OrOr,
  AndAnd,
  Bang,
};

std::string_view to_string(TokenKind kind);
bool is_keyword(TokenKind kind);

struct Token {
  TokenKind kind = TokenKind::Error;
  // Identifier/keyword spelling, unescaped string contents, or the literal
  // digits of numbers and date-times.
  std::string text;
  SourceLocation location;

  friend bool operator==(const Token& a, const Token& b) {
    return a.kind == b.kind && a.text == b.text;
  }
};

struct TokenStream {
  std::vector<Token> tokens;
  Diagnostics diagnostics;
  std::uint32_t end_line = 1;
  std::uint32_t end_column = 1;
  std::uint32_t end_offset = 0;
};

// Converts source text into tokens. Never fails: malformed input produces
// Error tokens plus diagnostics and scanning resumes after them.
TokenStream tokenize(std::string_view source);

// Keyword spelling lookup; returns Identifier when `word` is not reserved.
TokenKind keyword_kind(std::string_view word);

}  // namespace muit::dsl
