#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cassert>
#include <initializer_list>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fixkit/errors.hpp"

namespace fixkit {

// A datum of the untyped value universe: an arbitrary-precision integer, an
// 8-bit character, a string of 8-bit characters, a case-sensitive symbol, or
// a pair.  Values are immutable and structurally shared; copying is cheap.
class Value {
 public:
  using Int = boost::multiprecision::cpp_int;

  // Default-constructed value is the symbol nil.
  Value() : node_(nil_node()) {}

  static Value integer(Int n);
  static Value integer(long long n) { return integer(Int(n)); }
  static Value character(unsigned char code);
  static Value string(std::string chars);
  static Value symbol(std::string name);  // name must be non-empty
  static Value cons(Value head, Value tail);

  static Value nil() { return Value(); }
  static Value t();

  // Proper list of the given elements.
  static Value list(std::vector<Value> elems);
  static Value list(std::initializer_list<Value> elems) {
    return list(std::vector<Value>(elems));
  }

  bool is_integer() const;
  bool is_character() const;
  bool is_string() const;
  bool is_symbol() const;
  bool is_pair() const;
  bool is_atom() const { return !is_pair(); }

  bool is_nil() const { return is_symbol() && symbol_name() == "nil"; }
  bool is_t() const { return is_symbol() && symbol_name() == "t"; }
  // Symbols whose names begin with ':' are keywords.
  bool is_keyword() const { return is_symbol() && symbol_name()[0] == ':'; }

  const Int& as_integer() const;
  unsigned char as_character() const;
  const std::string& as_string() const;
  const std::string& symbol_name() const;
  const Value& head() const;
  const Value& tail() const;

  // nil, or a pair whose tail is a proper list.
  bool is_proper_list() const;

  // Spine of a proper list.  Throws Error on improper lists.
  std::vector<Value> list_elements() const;

  friend bool operator==(const Value& a, const Value& b);
  friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }

 private:
  struct Node;
  struct Str {
    std::string chars;
  };
  struct Sym {
    std::string name;
  };

  explicit Value(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static const std::shared_ptr<const Node>& nil_node();

  std::shared_ptr<const Node> node_;
};

struct Value::Node {
  std::variant<Int, unsigned char, Str, Sym, std::pair<Value, Value>> rep;
};

inline const std::shared_ptr<const Value::Node>& Value::nil_node() {
  static const std::shared_ptr<const Node> node =
      std::make_shared<const Node>(Node{Sym{"nil"}});
  return node;
}

inline Value Value::integer(Int n) {
  return Value(std::make_shared<const Node>(Node{std::move(n)}));
}

inline Value Value::character(unsigned char code) {
  return Value(std::make_shared<const Node>(Node{code}));
}

inline Value Value::string(std::string chars) {
  return Value(std::make_shared<const Node>(Node{Str{std::move(chars)}}));
}

inline Value Value::symbol(std::string name) {
  assert(!name.empty());
  if (name == "nil") return nil();
  return Value(std::make_shared<const Node>(Node{Sym{std::move(name)}}));
}

inline Value Value::t() {
  static const Value v(std::make_shared<const Node>(Node{Sym{"t"}}));
  return v;
}

inline Value Value::cons(Value head, Value tail) {
  return Value(std::make_shared<const Node>(
      Node{std::make_pair(std::move(head), std::move(tail))}));
}

inline Value Value::list(std::vector<Value> elems) {
  Value out = nil();
  for (auto it = elems.rbegin(); it != elems.rend(); ++it)
    out = cons(std::move(*it), std::move(out));
  return out;
}

inline bool Value::is_integer() const {
  return std::holds_alternative<Int>(node_->rep);
}
inline bool Value::is_character() const {
  return std::holds_alternative<unsigned char>(node_->rep);
}
inline bool Value::is_string() const {
  return std::holds_alternative<Str>(node_->rep);
}
inline bool Value::is_symbol() const {
  return std::holds_alternative<Sym>(node_->rep);
}
inline bool Value::is_pair() const {
  return std::holds_alternative<std::pair<Value, Value>>(node_->rep);
}

inline const Value::Int& Value::as_integer() const {
  return std::get<Int>(node_->rep);
}
inline unsigned char Value::as_character() const {
  return std::get<unsigned char>(node_->rep);
}
inline const std::string& Value::as_string() const {
  return std::get<Str>(node_->rep).chars;
}
inline const std::string& Value::symbol_name() const {
  return std::get<Sym>(node_->rep).name;
}
inline const Value& Value::head() const {
  return std::get<std::pair<Value, Value>>(node_->rep).first;
}
inline const Value& Value::tail() const {
  return std::get<std::pair<Value, Value>>(node_->rep).second;
}

inline bool Value::is_proper_list() const {
  const Value* v = this;
  while (v->is_pair()) v = &v->tail();
  return v->is_nil();
}

inline std::vector<Value> Value::list_elements() const {
  std::vector<Value> out;
  const Value* v = this;
  while (v->is_pair()) {
    out.push_back(v->head());
    v = &v->tail();
  }
  if (!v->is_nil()) throw Error("list_elements: improper list");
  return out;
}

// Structural equality; the only equality over values.  Iterative down the
// tail so long lists do not recurse.
inline bool operator==(const Value& a, const Value& b) {
  const Value* x = &a;
  const Value* y = &b;
  while (true) {
    if (x->node_ == y->node_) return true;
    if (x->node_->rep.index() != y->node_->rep.index()) return false;
    if (!x->is_pair()) {
      switch (x->node_->rep.index()) {
        case 0:
          return x->as_integer() == y->as_integer();
        case 1:
          return x->as_character() == y->as_character();
        case 2:
          return x->as_string() == y->as_string();
        default:
          return x->symbol_name() == y->symbol_name();
      }
    }
    if (!(x->head() == y->head())) return false;
    x = &x->tail();
    y = &y->tail();
  }
}

inline bool values_equal(const Value& a, const Value& b) { return a == b; }

// Truthiness convention: nil is false, everything else is true.
inline bool truthy(const Value& v) { return !v.is_nil(); }
inline Value boolean(bool b) { return b ? Value::t() : Value::nil(); }

}  // namespace fixkit
