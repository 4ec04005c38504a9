#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "fixkit/errors.hpp"
#include "fixkit/value.hpp"

namespace fixkit {

namespace detail {

// Recursive-descent S-expression reader over a byte buffer.  Tracks 1-based
// line/column for error reports.  Comments run from ';' to end of line.
class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  Value read_one() {
    skip_space();
    if (at_end()) fail("unexpected end of input");
    return read_expr();
  }

  // After the last expression: only whitespace and comments may remain.
  void expect_end() {
    skip_space();
    if (!at_end()) fail("trailing content after expression");
  }

  bool at_expr() {
    skip_space();
    return !at_end();
  }

 private:
  std::string_view text_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;

  [[noreturn]] void fail(const std::string& reason) const {
    throw ParseError(line_, col_, reason);
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  char advance() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  static bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  }

  static bool is_delimiter(char c) {
    return is_space(c) || c == '(' || c == ')' || c == '"' || c == ';';
  }

  void skip_space() {
    while (!at_end()) {
      char c = peek();
      if (is_space(c)) {
        advance();
      } else if (c == ';') {
        while (!at_end() && peek() != '\n') advance();
      } else {
        return;
      }
    }
  }

  Value read_expr() {
    char c = peek();
    if (c == '(') return read_list();
    if (c == ')') fail("unexpected ')'");
    if (c == '"') return read_string();
    if (c == '#') return read_character();
    return read_atom_token();
  }

  Value read_list() {
    advance();  // '('
    std::vector<Value> elems;
    Value tail = Value::nil();
    while (true) {
      skip_space();
      if (at_end()) fail("unterminated list");
      if (peek() == ')') {
        advance();
        break;
      }
      // A lone '.' token marks the improper tail.
      if (peek() == '.' && dot_is_lone()) {
        if (elems.empty()) fail("dotted tail with no preceding element");
        advance();  // '.'
        skip_space();
        if (at_end()) fail("unterminated list");
        if (peek() == ')') fail("missing expression after '.'");
        tail = read_expr();
        skip_space();
        if (at_end()) fail("unterminated list");
        if (peek() != ')') fail("expected ')' after dotted tail");
        advance();
        break;
      }
      elems.push_back(read_expr());
    }
    Value out = tail;
    for (auto it = elems.rbegin(); it != elems.rend(); ++it)
      out = Value::cons(*it, out);
    return out;
  }

  bool dot_is_lone() const {
    return pos_ + 1 >= text_.size() || is_delimiter(text_[pos_ + 1]);
  }

  Value read_string() {
    advance();  // '"'
    std::string out;
    while (true) {
      if (at_end()) fail("unterminated string");
      char c = advance();
      if (c == '"') break;
      if (c == '\\') {
        if (at_end()) fail("unterminated string escape");
        char e = advance();
        if (e != '"' && e != '\\') fail("unknown string escape");
        out += e;
      } else {
        out += c;
      }
    }
    return Value::string(std::move(out));
  }

  Value read_character() {
    advance();  // '#'
    if (at_end() || peek() != '\\') fail("expected '\\' after '#'");
    advance();
    if (at_end()) fail("missing character after '#\\'");
    // First byte is taken unconditionally; a longer alphanumeric token
    // must be one of the named characters.
    std::string token(1, advance());
    while (!at_end() && std::isalnum(static_cast<unsigned char>(peek())))
      token += advance();
    if (token.size() == 1)
      return Value::character(static_cast<unsigned char>(token[0]));
    if (token == "Space") return Value::character(' ');
    if (token == "Newline") return Value::character('\n');
    if (token == "Nul") return Value::character(0);
    fail("unknown character name '" + token + "'");
  }

  Value read_atom_token() {
    std::string token;
    while (!at_end() && !is_delimiter(peek())) token += advance();
    if (token.empty()) fail("expected expression");
    if (token == ".") fail("'.' is only valid inside a list");
    if (is_integer_token(token))
      return Value::integer(Value::Int(token));
    return Value::symbol(std::move(token));
  }

  static bool is_integer_token(const std::string& token) {
    size_t i = token[0] == '-' ? 1 : 0;
    if (i >= token.size()) return false;
    for (; i < token.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(token[i]))) return false;
    return true;
  }
};

}  // namespace detail

// Reads a single S-expression; trailing whitespace/comments allowed.
inline Value read_value(std::string_view text) {
  detail::Reader reader(text);
  Value v = reader.read_one();
  reader.expect_end();
  return v;
}

// Reads a whole sequence of S-expressions (the .fty event stream).
inline std::vector<Value> read_all(std::string_view text) {
  detail::Reader reader(text);
  std::vector<Value> out;
  while (reader.at_expr()) out.push_back(reader.read_one());
  return out;
}

}  // namespace fixkit
