#include <array>
#include <cstdint>
#include <utility>

#include "muit/dsl/token.hpp"

namespace muit::dsl {
namespace {

constexpr std::array<std::pair<std::string_view, TokenKind>, 23> kKeywords{{
    {"entity", TokenKind::KwEntity},     {"operation", TokenKind::KwOperation},
    {"screen", TokenKind::KwScreen},     {"widget", TokenKind::KwWidget},
    {"touch", TokenKind::KwTouch},       {"handler", TokenKind::KwHandler},
    {"var", TokenKind::KwVar},           {"foreach", TokenKind::KwForeach},
    {"for", TokenKind::KwFor},           {"in", TokenKind::KwIn},
    {"if", TokenKind::KwIf},             {"elseif", TokenKind::KwElseif},
    {"else", TokenKind::KwElse},         {"return", TokenKind::KwReturn},
    {"when", TokenKind::KwWhen},         {"where", TokenKind::KwWhere},
    {"header", TokenKind::KwHeader},     {"import", TokenKind::KwImport},
    {"true", TokenKind::KwTrue},         {"false", TokenKind::KwFalse},
    {"new", TokenKind::KwNew},           {"function", TokenKind::KwFunction},
    {"async", TokenKind::KwAsync},
}};

bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  TokenStream run() {
    while (true) {
      skip_trivia();
      if (at_end()) break;
      scan_token();
    }
    out_.end_line = line_;
    out_.end_column = column_;
    out_.end_offset = static_cast<std::uint32_t>(pos_);
    return std::move(out_);
  }

 private:
  bool at_end() const { return pos_ >= src_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (at_end()) return;
    if (src_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  SourceLocation mark() const {
    return {static_cast<std::uint32_t>(pos_), line_, column_, 0};
  }

  void finish(SourceLocation& loc) const {
    loc.length = static_cast<std::uint32_t>(pos_ - loc.offset);
  }

  void emit(TokenKind kind, std::string text, SourceLocation loc) {
    finish(loc);
    out_.tokens.push_back(Token{kind, std::move(text), loc});
  }

  void error(DiagCode code, std::string message, SourceLocation loc) {
    out_.diagnostics.push_back(
        Diagnostic{Severity::Error, code, std::move(message), loc});
  }

  void skip_trivia() {
    while (!at_end()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' ||
          c == '\v') {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (!at_end() && peek() != '\n') advance();
      } else if (c == '/' && peek(1) == '*') {
        SourceLocation start = mark();
        advance();
        advance();
        bool closed = false;
        while (!at_end()) {
          if (peek() == '*' && peek(1) == '/') {
            advance();
            advance();
            closed = true;
            break;
          }
          advance();
        }
        if (!closed) {
          finish(start);
          error(DiagCode::UnexpectedToken, "unterminated block comment", start);
        }
      } else {
        break;
      }
    }
  }

  // YYYY-MM-DD with optional THH:MM[:SS]; anything else is an integer.
  std::size_t date_time_length() const {
    auto digits = [&](std::size_t at, std::size_t n) {
      for (std::size_t i = 0; i < n; ++i) {
        if (!is_digit(peek(at + i))) return false;
      }
      return true;
    };
    if (!(digits(0, 4) && peek(4) == '-' && digits(5, 2) && peek(7) == '-' &&
          digits(8, 2))) {
      return 0;
    }
    if (is_ident_char(peek(10)) && peek(10) != 'T') return 0;
    std::size_t len = 10;
    if (peek(10) == 'T' && digits(11, 2) && peek(13) == ':' && digits(14, 2)) {
      len = 16;
      if (peek(16) == ':' && digits(17, 2)) len = 19;
    }
    if (is_ident_char(peek(len))) return 0;
    return len;
  }

  void scan_number() {
    SourceLocation loc = mark();
    if (std::size_t len = date_time_length(); len > 0) {
      std::string text(src_.substr(pos_, len));
      for (std::size_t i = 0; i < len; ++i) advance();
      emit(TokenKind::DateTime, std::move(text), loc);
      return;
    }
    std::string text;
    while (is_digit(peek())) {
      text += peek();
      advance();
    }
    if (is_ident_start(peek())) {
      // 12abc: report once and swallow the tail so it is not re-lexed.
      while (is_ident_char(peek())) {
        text += peek();
        advance();
      }
      finish(loc);
      error(DiagCode::UnknownCharacter, "malformed number '" + text + "'", loc);
      emit(TokenKind::Error, std::move(text), loc);
      return;
    }
    if (text.size() > 18) {
      finish(loc);
      error(DiagCode::IntegerOverflow, "integer literal too large", loc);
      emit(TokenKind::Error, std::move(text), loc);
      return;
    }
    emit(TokenKind::Integer, std::move(text), loc);
  }

  static void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
      out += static_cast<char>(cp);
    } else if (cp < 0x800) {
      out += static_cast<char>(0xC0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
      out += static_cast<char>(0xE0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (cp >> 18));
      out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    }
  }

  static int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  }

  void scan_string() {
    SourceLocation loc = mark();
    advance();  // opening quote
    std::string value;
    while (true) {
      if (at_end() || peek() == '\n') {
        finish(loc);
        error(DiagCode::UnterminatedString, "unterminated string literal", loc);
        emit(TokenKind::Error, std::move(value), loc);
        return;
      }
      char c = peek();
      if (c == '"') {
        advance();
        emit(TokenKind::String, std::move(value), loc);
        return;
      }
      if (c == '\\') {
        SourceLocation esc = mark();
        advance();
        char e = peek();
        switch (e) {
          case '"': value += '"'; advance(); break;
          case '\\': value += '\\'; advance(); break;
          case '/': value += '/'; advance(); break;
          case 'n': value += '\n'; advance(); break;
          case 't': value += '\t'; advance(); break;
          case 'r': value += '\r'; advance(); break;
          case 'u': {
            advance();
            std::uint32_t cp = 0;
            bool ok = true;
            for (int i = 0; i < 4; ++i) {
              int h = hex_value(peek());
              if (h < 0) {
                ok = false;
                break;
              }
              cp = cp * 16 + static_cast<std::uint32_t>(h);
              advance();
            }
            if (!ok || (cp >= 0xD800 && cp <= 0xDFFF)) {
              finish(esc);
              error(DiagCode::InvalidEscape, "invalid \\u escape", esc);
            } else {
              append_utf8(value, cp);
            }
            break;
          }
          default:
            if (e == '\n' || e == '\0') break;  // reported as unterminated
            advance();
            finish(esc);
            error(DiagCode::InvalidEscape,
                  std::string("invalid escape '\\") + e + "'", esc);
            break;
        }
        continue;
      }
      value += c;
      advance();
    }
  }

  void scan_token() {
    char c = peek();
    if (is_ident_start(c)) {
      SourceLocation loc = mark();
      std::string word;
      while (is_ident_char(peek())) {
        word += peek();
        advance();
      }
      TokenKind kind = keyword_kind(word);
      emit(kind, std::move(word), loc);
      return;
    }
    if (is_digit(c)) {
      scan_number();
      return;
    }
    if (c == '"') {
      scan_string();
      return;
    }
    SourceLocation loc = mark();
    auto single = [&](TokenKind kind) {
      std::string text(1, c);
      advance();
      emit(kind, std::move(text), loc);
    };
    auto pair = [&](TokenKind kind) {
      std::string text(src_.substr(pos_, 2));
      advance();
      advance();
      emit(kind, std::move(text), loc);
    };
    switch (c) {
      case '{': return single(TokenKind::LBrace);
      case '}': return single(TokenKind::RBrace);
      case '(': return single(TokenKind::LParen);
      case ')': return single(TokenKind::RParen);
      case ',': return single(TokenKind::Comma);
      case ';': return single(TokenKind::Semicolon);
      case ':': return single(TokenKind::Colon);
      case '.': return single(TokenKind::Dot);
      case '@': return single(TokenKind::At);
      case '/': return single(TokenKind::Slash);
      case '+': return single(TokenKind::Plus);
      case '-': return single(TokenKind::Minus);
      case '*': return single(TokenKind::Star);
      case '%': return single(TokenKind::Percent);
      case '=':
        return peek(1) == '=' ? pair(TokenKind::EqEq) : single(TokenKind::Assign);
      case '!':
        return peek(1) == '=' ? pair(TokenKind::NotEq) : single(TokenKind::Bang);
      case '<':
        return peek(1) == '=' ? pair(TokenKind::LessEq) : single(TokenKind::Less);
      case '>':
        return peek(1) == '=' ? pair(TokenKind::GreaterEq)
                              : single(TokenKind::Greater);
      case '|':
        return peek(1) == '|' ? pair(TokenKind::OrOr) : single(TokenKind::Pipe);
      case '&':
        if (peek(1) == '&') return pair(TokenKind::AndAnd);
        break;
      default:
        break;
    }
    // Unknown byte; swallow a whole UTF-8 sequence so the column stays sane.
    std::string text(1, c);
    advance();
    auto uc = static_cast<unsigned char>(c);
    int continuation = uc >= 0xF0 ? 3 : uc >= 0xE0 ? 2 : uc >= 0xC0 ? 1 : 0;
    for (int i = 0; i < continuation && !at_end(); ++i) {
      auto next = static_cast<unsigned char>(peek());
      if ((next & 0xC0) != 0x80) break;
      text += peek();
      advance();
    }
    finish(loc);
    std::string shown;
    if (uc >= 0x20 && uc < 0x7F) {
      shown = "'" + text + "'";
    } else {
      static constexpr char kHex[] = "0123456789abcdef";
      shown = "byte 0x";
      shown += kHex[uc >> 4];
      shown += kHex[uc & 0xF];
    }
    error(DiagCode::UnknownCharacter, "unknown character " + shown, loc);
    emit(TokenKind::Error, std::move(text), loc);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::uint32_t line_ = 1;
  std::uint32_t column_ = 1;
  TokenStream out_;
};

}  // namespace

TokenKind keyword_kind(std::string_view word) {
  for (const auto& [spelling, kind] : kKeywords) {
    if (spelling == word) return kind;
  }
  return TokenKind::Identifier;
}

bool is_keyword(TokenKind kind) {
  return kind >= TokenKind::KwEntity && kind <= TokenKind::KwAsync;
}

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::Error: return "error";
    case TokenKind::Identifier: return "identifier";
    case TokenKind::String: return "string";
    case TokenKind::Integer: return "integer";
    case TokenKind::DateTime: return "date-time";
    case TokenKind::KwEntity: return "'entity'";
    case TokenKind::KwOperation: return "'operation'";
    case TokenKind::KwScreen: return "'screen'";
    case TokenKind::KwWidget: return "'widget'";
    case TokenKind::KwTouch: return "'touch'";
    case TokenKind::KwHandler: return "'handler'";
    case TokenKind::KwVar: return "'var'";
    case TokenKind::KwForeach: return "'foreach'";
    case TokenKind::KwFor: return "'for'";
    case TokenKind::KwIn: return "'in'";
    case TokenKind::KwIf: return "'if'";
    case TokenKind::KwElseif: return "'elseif'";
    case TokenKind::KwElse: return "'else'";
    case TokenKind::KwReturn: return "'return'";
    case TokenKind::KwWhen: return "'when'";
    case TokenKind::KwWhere: return "'where'";
    case TokenKind::KwHeader: return "'header'";
    case TokenKind::KwImport: return "'import'";
    case TokenKind::KwTrue: return "'true'";
    case TokenKind::KwFalse: return "'false'";
    case TokenKind::KwNew: return "'new'";
    case TokenKind::KwFunction: return "'function'";
    case TokenKind::KwAsync: return "'async'";
    case TokenKind::LBrace: return "'{'";
    case TokenKind::RBrace: return "'}'";
    case TokenKind::LParen: return "'('";
    case TokenKind::RParen: return "')'";
    case TokenKind::Comma: return "','";
    case TokenKind::Semicolon: return "';'";
    case TokenKind::Colon: return "':'";
    case TokenKind::Dot: return "'.'";
    case TokenKind::At: return "'@'";
    case TokenKind::Pipe: return "'|'";
    case TokenKind::Slash: return "'/'";
    case TokenKind::Plus: return "'+'";
    case TokenKind::Minus: return "'-'";
    case TokenKind::Star: return "'*'";
    case TokenKind::Percent: return "'%'";
    case TokenKind::Assign: return "'='";
    case TokenKind::EqEq: return "'=='";
    case TokenKind::NotEq: return "'!='";
    case TokenKind::Less: return "'<'";
    case TokenKind::Greater: return "'>'";
    case TokenKind::LessEq: return "'<='";
    case TokenKind::GreaterEq: return "'>='";
    case TokenKind::OrOr: return "'||'";
    case TokenKind::AndAnd: return "'&&'";
    case TokenKind::Bang: return "'!'";
  }
  return "?";
}

TokenStream tokenize(std::string_view source) { return Lexer(source).run(); }

}  // namespace muit::dsl
