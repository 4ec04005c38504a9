#pragma once

#include <string>

#include "fixkit/value.hpp"

namespace fixkit {

namespace detail {

inline void print_to(const Value& v, std::string& out) {
  if (v.is_integer()) {
    out += v.as_integer().str();
    return;
  }
  if (v.is_character()) {
    unsigned char c = v.as_character();
    switch (c) {
      case 0:
        out += "#\\Nul";
        return;
      case '\n':
        out += "#\\Newline";
        return;
      case ' ':
        out += "#\\Space";
        return;
      default:
        out += "#\\";
        out += static_cast<char>(c);
        return;
    }
  }
  if (v.is_string()) {
    out += '"';
    for (char c : v.as_string()) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    out += '"';
    return;
  }
  if (v.is_symbol()) {
    out += v.symbol_name();
    return;
  }
  // Pair: list notation, dotted only for an improper tail.
  out += '(';
  const Value* p = &v;
  bool first = true;
  while (p->is_pair()) {
    if (!first) out += ' ';
    first = false;
    print_to(p->head(), out);
    p = &p->tail();
  }
  if (!p->is_nil()) {
    out += " . ";
    print_to(*p, out);
  }
  out += ')';
}

}  // namespace detail

// Canonical text form; read_value(print_value(v)) == v.
inline std::string print_value(const Value& v) {
  std::string out;
  detail::print_to(v, out);
  return out;
}

}  // namespace fixkit
