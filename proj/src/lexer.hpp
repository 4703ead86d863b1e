#pragma once

// Tokenizer shared by the Turtle and SELECT-query parsers.

#include <cstddef>
#include <string>
#include <string_view>

#include "cpes/rdf.hpp"

namespace cpes::rdf::detail {

enum class Tok {
  End,
  IriRef,     // text = IRI without brackets
  PName,      // text = prefix, aux = local
  BlankLabel, // text = label
  Var,        // text = name
  String,     // text = unescaped value
  Integer,
  Decimal,
  Double,
  Word,       // bare identifier (a, true, PREFIX, SELECT, ...)
  AtKeyword,  // @prefix, @base, or a language tag
  Punct,      // . ; , [ ] ( ) { } ^^ *
  Op,         // = != < <= > >= ! && ||
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::string aux;
  std::size_t line = 1;
  std::size_t column = 1;

  bool is(Tok k, std::string_view t) const { return kind == k && text == t; }
  bool punct(std::string_view t) const { return is(Tok::Punct, t); }
};

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next();
  Token peek() {
    std::size_t p = pos_, l = line_, c = col_;
    Token t = next();
    pos_ = p;
    line_ = l;
    col_ = c;
    return t;
  }

  [[noreturn]] void fail(const Token& at, const std::string& msg) const {
    throw ParseError(at.line, at.column, msg);
  }

private:
  char cur(std::size_t ahead = 0) const { return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0'; }
  void advance(std::size_t n = 1);
  void skip_space();
  [[noreturn]] void fail_here(const std::string& msg) const { throw ParseError(line_, col_, msg); }

  bool try_iri(Token& tok);
  void read_string(Token& tok);
  void read_number(Token& tok);
  std::string read_name_chars(bool local);

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

inline bool is_name_start(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_' || static_cast<unsigned char>(c) >= 0x80;
}

inline bool is_name_char(char c) { return is_name_start(c) || (c >= '0' && c <= '9') || c == '-'; }

inline void Lexer::advance(std::size_t n) {
  for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i) {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }
}

inline void Lexer::skip_space() {
  for (;;) {
    char c = cur();
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      advance();
    } else if (c == '#') {
      while (pos_ < src_.size() && cur() != '\n') advance();
    } else {
      return;
    }
  }
}

inline bool Lexer::try_iri(Token& tok) {
  std::size_t i = pos_ + 1;
  while (i < src_.size()) {
    char c = src_[i];
    if (c == '>') {
      tok.kind = Tok::IriRef;
      tok.text = std::string(src_.substr(pos_ + 1, i - pos_ - 1));
      advance(i - pos_ + 1);
      return true;
    }
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '<' || c == '"' || c == '{' || c == '}' ||
        c == '|' || c == '^' || c == '`' || c == '\\')
      return false;
    ++i;
  }
  return false;
}

inline void append_utf8(std::string& out, unsigned long cp) {
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

inline void Lexer::read_string(Token& tok) {
  char quote = cur();
  bool long_form = cur(1) == quote && cur(2) == quote;
  advance(long_form ? 3 : 1);
  tok.kind = Tok::String;
  std::string value;
  for (;;) {
    if (pos_ >= src_.size()) fail_here("unterminated string literal");
    char c = cur();
    if (long_form) {
      if (c == quote && cur(1) == quote && cur(2) == quote) {
        advance(3);
        break;
      }
    } else {
      if (c == quote) {
        advance();
        break;
      }
      if (c == '\n' || c == '\r') fail_here("newline in short string literal");
    }
    if (c == '\\') {
      char e = cur(1);
      advance(2);
      switch (e) {
      case 't': value += '\t'; break;
      case 'n': value += '\n'; break;
      case 'r': value += '\r'; break;
      case 'b': value += '\b'; break;
      case 'f': value += '\f'; break;
      case '"': value += '"'; break;
      case '\'': value += '\''; break;
      case '\\': value += '\\'; break;
      case 'u':
      case 'U': {
        std::size_t n = e == 'u' ? 4 : 8;
        std::string hex(src_.substr(pos_, n));
        if (hex.size() != n || hex.find_first_not_of("0123456789abcdefABCDEF") != std::string::npos)
          fail_here("bad unicode escape");
        append_utf8(value, std::stoul(hex, nullptr, 16));
        advance(n);
        break;
      }
      default:
        fail_here(std::string("unknown escape \\") + e);
      }
      continue;
    }
    value += c;
    advance();
  }
  tok.text = std::move(value);
}

inline void Lexer::read_number(Token& tok) {
  std::size_t start = pos_;
  if (cur() == '+' || cur() == '-') advance();
  bool digits = false;
  while (cur() >= '0' && cur() <= '9') {
    advance();
    digits = true;
  }
  tok.kind = Tok::Integer;
  if (cur() == '.' && cur(1) >= '0' && cur(1) <= '9') {
    advance();
    while (cur() >= '0' && cur() <= '9') advance();
    tok.kind = Tok::Decimal;
    digits = true;
  }
  if (!digits) fail_here("malformed number");
  if (cur() == 'e' || cur() == 'E') {
    advance();
    if (cur() == '+' || cur() == '-') advance();
    if (!(cur() >= '0' && cur() <= '9')) fail_here("malformed exponent");
    while (cur() >= '0' && cur() <= '9') advance();
    tok.kind = Tok::Double;
  }
  tok.text = std::string(src_.substr(start, pos_ - start));
}

inline std::string Lexer::read_name_chars(bool local) {
  std::size_t start = pos_;
  while (is_name_char(cur()) || (cur() == '.' && is_name_char(cur(1))) || (local && cur() == ':')) advance();
  return std::string(src_.substr(start, pos_ - start));
}

inline Token Lexer::next() {
  skip_space();
  Token tok;
  tok.line = line_;
  tok.column = col_;
  char c = cur();
  if (pos_ >= src_.size()) return tok;

  if (c == '<') {
    if (try_iri(tok)) return tok;
    tok.kind = Tok::Op;
    if (cur(1) == '=') {
      tok.text = "<=";
      advance(2);
    } else {
      tok.text = "<";
      advance();
    }
    return tok;
  }
  if (c == '>' || c == '=' || c == '!' || c == '&' || c == '|') {
    tok.kind = Tok::Op;
    std::string two{c, cur(1)};
    if (two == ">=" || two == "!=" || two == "&&" || two == "||") {
      tok.text = two;
      advance(2);
    } else {
      tok.text = std::string(1, c);
      advance();
    }
    return tok;
  }
  if (c == '"' || c == '\'') {
    read_string(tok);
    return tok;
  }
  if (c == '^') {
    if (cur(1) != '^') fail_here("expected ^^");
    tok.kind = Tok::Punct;
    tok.text = "^^";
    advance(2);
    return tok;
  }
  if ((c >= '0' && c <= '9') || ((c == '+' || c == '-') && ((cur(1) >= '0' && cur(1) <= '9') || cur(1) == '.')) ||
      (c == '.' && cur(1) >= '0' && cur(1) <= '9')) {
    read_number(tok);
    return tok;
  }
  if (c == '.' || c == ';' || c == ',' || c == '[' || c == ']' || c == '(' || c == ')' || c == '{' || c == '}' ||
      c == '*') {
    tok.kind = Tok::Punct;
    tok.text = std::string(1, c);
    advance();
    return tok;
  }
  if (c == '?' || c == '$') {
    advance();
    tok.kind = Tok::Var;
    tok.text = read_name_chars(false);
    if (tok.text.empty()) fail(tok, "empty variable name");
    for (char ch : tok.text)
      if (!(is_name_start(ch) || (ch >= '0' && ch <= '9'))) fail(tok, "invalid variable name ?" + tok.text);
    return tok;
  }
  if (c == '@') {
    advance();
    tok.kind = Tok::AtKeyword;
    tok.text = read_name_chars(false);
    if (tok.text.empty()) fail(tok, "stray '@'");
    return tok;
  }
  if (c == '_' && cur(1) == ':') {
    advance(2);
    tok.kind = Tok::BlankLabel;
    tok.text = read_name_chars(false);
    if (tok.text.empty()) fail(tok, "empty blank node label");
    return tok;
  }
  if (is_name_start(c) || c == ':') {
    std::string name = c == ':' ? std::string{} : read_name_chars(false);
    if (cur() == ':') {
      advance();
      tok.kind = Tok::PName;
      tok.text = std::move(name);
      tok.aux = read_name_chars(true);
      return tok;
    }
    tok.kind = Tok::Word;
    tok.text = std::move(name);
    return tok;
  }
  fail_here(std::string("unexpected character '") + c + "'");
}

} // namespace cpes::rdf::detail
