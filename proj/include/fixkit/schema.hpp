#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "fixkit/errors.hpp"
#include "fixkit/printer.hpp"
#include "fixkit/reader.hpp"
#include "fixkit/value.hpp"

namespace fixkit {

// ---------------------------------------------------------------------------
// Builtin base-type catalog.
//
// name    recognizer   fixer        ill-typed target   default
// nat     natp         nfix         0                  0
// int     integerp     ifix         0                  0
// string  stringp      string-fix   ""                 ""
// bool    booleanp     bool-fix     t                  nil
// char    characterp   char-fix     code 0             code 0
// sym     symbolp      symbol-fix   nil                nil
// ---------------------------------------------------------------------------

enum class Builtin { Nat, Int, String, Bool, Char, Sym };

inline const char* builtin_name(Builtin b) {
  switch (b) {
    case Builtin::Nat: return "nat";
    case Builtin::Int: return "int";
    case Builtin::String: return "string";
    case Builtin::Bool: return "bool";
    case Builtin::Char: return "char";
    default: return "sym";
  }
}

inline const char* builtin_pred_id(Builtin b) {
  switch (b) {
    case Builtin::Nat: return "natp";
    case Builtin::Int: return "integerp";
    case Builtin::String: return "stringp";
    case Builtin::Bool: return "booleanp";
    case Builtin::Char: return "characterp";
    default: return "symbolp";
  }
}

inline const char* builtin_fix_id(Builtin b) {
  switch (b) {
    case Builtin::Nat: return "nfix";
    case Builtin::Int: return "ifix";
    case Builtin::String: return "string-fix";
    case Builtin::Bool: return "bool-fix";
    case Builtin::Char: return "char-fix";
    default: return "symbol-fix";
  }
}

inline bool builtin_recognize(Builtin b, const Value& v) {
  switch (b) {
    case Builtin::Nat: return v.is_integer() && v.as_integer() >= 0;
    case Builtin::Int: return v.is_integer();
    case Builtin::String: return v.is_string();
    case Builtin::Bool: return v.is_nil() || v.is_t();
    case Builtin::Char: return v.is_character();
    default: return v.is_symbol();
  }
}

inline Value builtin_default(Builtin b) {
  switch (b) {
    case Builtin::Nat:
    case Builtin::Int: return Value::integer(0);
    case Builtin::String: return Value::string("");
    case Builtin::Bool: return Value::nil();
    case Builtin::Char: return Value::character(0);
    default: return Value::nil();
  }
}

inline Value builtin_fix(Builtin b, const Value& v) {
  if (builtin_recognize(b, v)) return v;
  if (b == Builtin::Bool) return Value::t();
  return builtin_default(b);
}

// ---------------------------------------------------------------------------
// Type definitions.
// ---------------------------------------------------------------------------

struct Field {
  std::string name;
  std::string type;
};

struct BaseBody {
  Builtin builtin;
};

struct ProdBody {
  std::vector<Field> fields;
};

struct Variant {
  std::string tag;  // with the leading ':'
  std::vector<Field> fields;
};

struct TagSumBody {
  std::vector<Variant> variants;
};

struct ListBody {
  std::string elem;
};

struct AlistBody {
  std::string key;
  std::string val;
};

struct OptionBody {
  std::string some;
};

struct TypeDef {
  std::string name;
  std::variant<BaseBody, ProdBody, TagSumBody, ListBody, AlistBody, OptionBody>
      body;

  bool is_base() const { return std::holds_alternative<BaseBody>(body); }
  bool is_prod() const { return std::holds_alternative<ProdBody>(body); }
  bool is_sum() const { return std::holds_alternative<TagSumBody>(body); }
  bool is_list() const { return std::holds_alternative<ListBody>(body); }
  bool is_alist() const { return std::holds_alternative<AlistBody>(body); }
  bool is_option() const { return std::holds_alternative<OptionBody>(body); }

  const char* kind_name() const {
    if (is_base()) return "base";
    if (is_prod()) return "prod";
    if (is_sum()) return "tagsum";
    if (is_list()) return "list";
    if (is_alist()) return "alist";
    return "option";
  }
};

// ---------------------------------------------------------------------------
// Events: the parsed surface forms of a .fty file, in source order.
// ---------------------------------------------------------------------------

struct TypeEvent {
  std::vector<TypeDef> members;  // singleton, or a deftypes clique
  std::string clique_name;       // empty for singletons
};

struct RawFormal {
  std::string name;
  std::optional<std::string> type;
  bool raw = false;
};

struct DefineEvent {
  std::string name;
  std::vector<RawFormal> formals;
  std::optional<std::string> returns;
  bool has_measure = false;
  Value body;  // uncompiled expression
};

struct DefinesEvent {
  std::string group_name;
  std::vector<DefineEvent> members;
};

struct VisitorEvent {
  std::string name;
  std::string root;
  bool collect = true;  // else transform
  std::vector<std::pair<std::string, std::string>> targets;  // type -> action
};

struct HookEvent {
  bool enabled;
};

using Event =
    std::variant<TypeEvent, DefineEvent, DefinesEvent, VisitorEvent, HookEvent>;

// ---------------------------------------------------------------------------
// Surface parsing: S-expressions -> events.  Name resolution happens later,
// in validate().
// ---------------------------------------------------------------------------

namespace detail {

inline std::string expect_name(const Value& v, const char* what) {
  if (!v.is_symbol() || v.is_keyword() || v.is_nil() || v.is_t())
    throw ValidateError(std::string("expected ") + what + ", got " +
                        print_value(v));
  return v.symbol_name();
}

inline std::vector<Field> parse_field_list(const Value& v,
                                           const std::string& context) {
  if (!v.is_proper_list())
    throw ValidateError(context + ": field list must be a proper list");
  std::vector<Field> fields;
  for (const Value& f : v.list_elements()) {
    if (!f.is_proper_list())
      throw ValidateError(context + ": malformed field " + print_value(f));
    auto parts = f.list_elements();
    if (parts.size() != 2)
      throw ValidateError(context + ": field needs (name type), got " +
                          print_value(f));
    fields.push_back(Field{expect_name(parts[0], "field name"),
                           expect_name(parts[1], "field type")});
  }
  return fields;
}

// Keyword-argument tail: (:key value :key value ...).
inline std::map<std::string, Value> parse_keyword_args(
    const std::vector<Value>& items, size_t start, const std::string& context) {
  std::map<std::string, Value> out;
  for (size_t i = start; i < items.size(); i += 2) {
    if (!items[i].is_keyword())
      throw ValidateError(context + ": expected keyword, got " +
                          print_value(items[i]));
    if (i + 1 >= items.size())
      throw ValidateError(context + ": missing value for " +
                          items[i].symbol_name());
    if (!out.emplace(items[i].symbol_name(), items[i + 1]).second)
      throw ValidateError(context + ": duplicate " + items[i].symbol_name());
  }
  return out;
}

inline TypeDef parse_typedef_form(const Value& form);

inline TypeDef parse_deffixtype(const std::vector<Value>& items) {
  if (items.size() < 2)
    throw ValidateError("deffixtype: missing type name");
  std::string name = expect_name(items[1], "type name");
  auto args = parse_keyword_args(items, 2, "deffixtype " + name);
  auto pred = args.find(":pred");
  auto fix = args.find(":fix");
  if (pred == args.end() || fix == args.end())
    throw ValidateError("deffixtype " + name + ": needs :pred and :fix");
  std::string pred_id = expect_name(pred->second, "predicate id");
  std::string fix_id = expect_name(fix->second, "fixer id");
  for (Builtin b : {Builtin::Nat, Builtin::Int, Builtin::String, Builtin::Bool,
                    Builtin::Char, Builtin::Sym}) {
    if (pred_id == builtin_pred_id(b)) {
      if (fix_id != builtin_fix_id(b))
        throw ValidateError("deffixtype " + name + ": fixer " + fix_id +
                            " does not match predicate " + pred_id);
      return TypeDef{name, BaseBody{b}};
    }
  }
  throw ValidateError("deffixtype " + name + ": unknown builtin predicate " +
                      pred_id);
}

inline TypeDef parse_defprod(const std::vector<Value>& items) {
  if (items.size() != 3)
    throw ValidateError("defprod: expected (defprod name (fields...))");
  std::string name = expect_name(items[1], "type name");
  return TypeDef{name, ProdBody{parse_field_list(items[2], "defprod " + name)}};
}

inline TypeDef parse_deftagsum(const std::vector<Value>& items) {
  if (items.size() < 3)
    throw ValidateError("deftagsum: needs a name and at least one variant");
  std::string name = expect_name(items[1], "type name");
  TagSumBody body;
  for (size_t i = 2; i < items.size(); ++i) {
    if (!items[i].is_proper_list())
      throw ValidateError("deftagsum " + name + ": malformed variant " +
                          print_value(items[i]));
    auto parts = items[i].list_elements();
    if (parts.size() != 2 || !parts[0].is_keyword())
      throw ValidateError("deftagsum " + name +
                          ": variant needs (:tag (fields...)), got " +
                          print_value(items[i]));
    std::string tag = parts[0].symbol_name();
    body.variants.push_back(Variant{
        tag, parse_field_list(parts[1], "deftagsum " + name + " " + tag)});
  }
  return TypeDef{name, std::move(body)};
}

inline TypeDef parse_deflist(const std::vector<Value>& items) {
  if (items.size() < 2) throw ValidateError("deflist: missing type name");
  std::string name = expect_name(items[1], "type name");
  auto args = parse_keyword_args(items, 2, "deflist " + name);
  auto elt = args.find(":elt-type");
  if (elt == args.end())
    throw ValidateError("deflist " + name + ": needs :elt-type");
  return TypeDef{name, ListBody{expect_name(elt->second, "element type")}};
}

inline TypeDef parse_defalist(const std::vector<Value>& items) {
  if (items.size() < 2) throw ValidateError("defalist: missing type name");
  std::string name = expect_name(items[1], "type name");
  auto args = parse_keyword_args(items, 2, "defalist " + name);
  auto key = args.find(":key-type");
  auto val = args.find(":val-type");
  if (key == args.end() || val == args.end())
    throw ValidateError("defalist " + name + ": needs :key-type and :val-type");
  return TypeDef{name, AlistBody{expect_name(key->second, "key type"),
                                 expect_name(val->second, "value type")}};
}

inline TypeDef parse_defoption(const std::vector<Value>& items) {
  if (items.size() != 3)
    throw ValidateError("defoption: expected (defoption name some-type)");
  std::string name = expect_name(items[1], "type name");
  return TypeDef{name, OptionBody{expect_name(items[2], "some type")}};
}

inline TypeDef parse_typedef_form(const Value& form) {
  auto items = form.list_elements();
  const std::string& head = items[0].symbol_name();
  if (head == "defprod") return parse_defprod(items);
  if (head == "deftagsum") return parse_deftagsum(items);
  if (head == "deflist") return parse_deflist(items);
  if (head == "defalist") return parse_defalist(items);
  if (head == "defoption") return parse_defoption(items);
  throw ValidateError("deftypes: unsupported member form " + head);
}

inline DefineEvent parse_define(const std::vector<Value>& items) {
  if (items.size() < 4)
    throw ValidateError("define: expected (define name (formals...) body)");
  DefineEvent def;
  def.name = expect_name(items[1], "function name");
  if (!items[2].is_proper_list())
    throw ValidateError("define " + def.name + ": malformed formals");
  for (const Value& f : items[2].list_elements()) {
    if (!f.is_proper_list())
      throw ValidateError("define " + def.name + ": malformed formal " +
                          print_value(f));
    auto parts = f.list_elements();
    RawFormal formal;
    if (parts.empty())
      throw ValidateError("define " + def.name + ": empty formal");
    formal.name = expect_name(parts[0], "formal name");
    for (size_t i = 1; i < parts.size(); ++i) {
      if (parts[i].is_keyword() && parts[i].symbol_name() == ":raw")
        formal.raw = true;
      else if (!formal.type)
        formal.type = expect_name(parts[i], "formal type");
      else
        throw ValidateError("define " + def.name + ": malformed formal " +
                            print_value(f));
    }
    def.formals.push_back(std::move(formal));
  }
  // Keyword options before the body: :measure <expr>, :returns (name type).
  size_t i = 3;
  while (i + 1 < items.size() && items[i].is_keyword()) {
    const std::string& key = items[i].symbol_name();
    if (key == ":measure") {
      def.has_measure = true;
    } else if (key == ":returns") {
      if (!items[i + 1].is_proper_list())
        throw ValidateError("define " + def.name + ": malformed :returns");
      auto parts = items[i + 1].list_elements();
      if (parts.size() != 2)
        throw ValidateError("define " + def.name +
                            ": :returns needs (name type)");
      def.returns = expect_name(parts[1], "return type");
    } else {
      throw ValidateError("define " + def.name + ": unknown option " + key);
    }
    i += 2;
  }
  if (i + 1 != items.size())
    throw ValidateError("define " + def.name + ": expected exactly one body");
  def.body = items[i];
  return def;
}

inline VisitorEvent parse_defvisitor(const std::vector<Value>& items) {
  VisitorEvent ev;
  if (items.size() < 2) throw ValidateError("defvisitor: missing name");
  ev.name = expect_name(items[1], "visitor name");
  bool have_mode = false;
  bool have_root = false;
  size_t i = 2;
  while (i < items.size()) {
    const Value& item = items[i];
    if (item.is_keyword() && item.symbol_name() == ":type") {
      if (i + 1 >= items.size())
        throw ValidateError("defvisitor " + ev.name + ": missing root type");
      ev.root = expect_name(items[i + 1], "root type");
      have_root = true;
      i += 2;
    } else if (item.is_keyword() && (item.symbol_name() == ":collect" ||
                                     item.symbol_name() == ":transform")) {
      ev.collect = item.symbol_name() == ":collect";
      have_mode = true;
      i += 1;
    } else if (item.is_proper_list()) {
      auto parts = item.list_elements();
      if (parts.size() != 3 || !parts[0].is_keyword() ||
          parts[0].symbol_name() != ":target")
        throw ValidateError("defvisitor " + ev.name +
                            ": expected (:target type action), got " +
                            print_value(item));
      ev.targets.emplace_back(expect_name(parts[1], "target type"),
                              expect_name(parts[2], "action function"));
      i += 1;
    } else {
      throw ValidateError("defvisitor " + ev.name + ": unexpected " +
                          print_value(item));
    }
  }
  if (!have_root || !have_mode || ev.targets.empty())
    throw ValidateError("defvisitor " + ev.name +
                        ": needs :type, a mode, and at least one :target");
  return ev;
}

}  // namespace detail

// Parses a .fty event stream.  Source order is preserved; names are not
// resolved here.
inline std::vector<Event> parse_events(std::string_view text) {
  std::vector<Event> events;
  for (const Value& form : read_all(text)) {
    if (!form.is_proper_list() || form.is_nil() || !form.head().is_symbol())
      throw ValidateError("expected an event form, got " + print_value(form));
    auto items = form.list_elements();
    const std::string& head = items[0].symbol_name();
    if (head == "deffixtype") {
      events.push_back(TypeEvent{{detail::parse_deffixtype(items)}, ""});
    } else if (head == "defprod" || head == "deftagsum" || head == "deflist" ||
               head == "defalist" || head == "defoption") {
      events.push_back(TypeEvent{{detail::parse_typedef_form(form)}, ""});
    } else if (head == "deftypes") {
      if (items.size() < 3)
        throw ValidateError("deftypes: needs a name and member forms");
      TypeEvent ev;
      ev.clique_name = detail::expect_name(items[1], "clique name");
      for (size_t i = 2; i < items.size(); ++i) {
        if (!items[i].is_proper_list() || items[i].is_nil() ||
            !items[i].head().is_symbol())
          throw ValidateError("deftypes " + ev.clique_name +
                              ": malformed member " + print_value(items[i]));
        ev.members.push_back(detail::parse_typedef_form(items[i]));
      }
      events.push_back(std::move(ev));
    } else if (head == "define") {
      events.push_back(detail::parse_define(items));
    } else if (head == "defines") {
      if (items.size() < 3)
        throw ValidateError("defines: needs a name and member defines");
      DefinesEvent ev;
      ev.group_name = detail::expect_name(items[1], "group name");
      for (size_t i = 2; i < items.size(); ++i) {
        if (!items[i].is_proper_list() || items[i].is_nil() ||
            !items[i].head().is_symbol() ||
            items[i].head().symbol_name() != "define")
          throw ValidateError("defines " + ev.group_name +
                              ": members must be define forms");
        ev.members.push_back(detail::parse_define(items[i].list_elements()));
      }
      events.push_back(std::move(ev));
    } else if (head == "defvisitor") {
      events.push_back(detail::parse_defvisitor(items));
    } else if (head == "set-fixequiv-hook") {
      if (items.size() != 2)
        throw ValidateError("set-fixequiv-hook: expected one argument");
      events.push_back(HookEvent{truthy(items[1])});
    } else {
      throw ValidateError("unknown event head '" + head + "'");
    }
  }
  return events;
}

// ---------------------------------------------------------------------------
// Schema: the validated, immutable type registry.
// ---------------------------------------------------------------------------

class Schema {
 public:
  struct Meta {
    size_t rank = 0;
    Value default_witness;
    std::uint64_t min_count = 0;
    // TagSum only: index of the default variant and per-variant minimal
    // counts, in declaration order.
    size_t default_variant = 0;
    std::vector<std::uint64_t> variant_min_counts;
  };

  // Registry preloaded with the builtin base catalog.
  Schema() {
    for (Builtin b : {Builtin::Nat, Builtin::Int, Builtin::String,
                      Builtin::Bool, Builtin::Char, Builtin::Sym}) {
      Meta meta;
      meta.rank = 0;
      meta.default_witness = builtin_default(b);
      meta.min_count = 0;
      add(TypeDef{builtin_name(b), BaseBody{b}}, meta, /*builtin=*/true);
    }
  }

  bool has(std::string_view name) const {
    return index_.count(std::string(name)) > 0;
  }

  const TypeDef& at(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end())
      throw LookupError("unknown type '" + std::string(name) + "'");
    return defs_[it->second];
  }

  const Meta& meta(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end())
      throw LookupError("unknown type '" + std::string(name) + "'");
    return meta_[it->second];
  }

  size_t rank(std::string_view name) const { return meta(name).rank; }
  const Value& default_witness(std::string_view name) const {
    return meta(name).default_witness;
  }

  bool is_builtin(std::string_view name) const {
    auto it = index_.find(std::string(name));
    return it != index_.end() && builtin_flags_[it->second];
  }

  const std::vector<TypeDef>& defs() const { return defs_; }

  // Names in definition order; builtins first, then user definitions.
  std::vector<std::string> names(bool include_builtins = true) const {
    std::vector<std::string> out;
    for (size_t i = 0; i < defs_.size(); ++i)
      if (include_builtins || !builtin_flags_[i]) out.push_back(defs_[i].name);
    return out;
  }

  // Deterministic text form: one line per type.
  std::string dump(bool include_builtins = false) const {
    std::string out;
    for (size_t i = 0; i < defs_.size(); ++i) {
      if (!include_builtins && builtin_flags_[i]) continue;
      out += defs_[i].name;
      out += '\t';
      out += defs_[i].kind_name();
      out += '\t';
      out += std::to_string(meta_[i].rank);
      out += '\t';
      out += print_value(meta_[i].default_witness);
      out += '\n';
    }
    return out;
  }

 private:
  friend Schema validate(const std::vector<Event>& events);
  friend class SchemaBuilder;

  void add(TypeDef def, Meta meta, bool builtin) {
    index_.emplace(def.name, defs_.size());
    defs_.push_back(std::move(def));
    meta_.push_back(std::move(meta));
    builtin_flags_.push_back(builtin);
  }

  std::vector<TypeDef> defs_;
  std::vector<Meta> meta_;
  std::vector<bool> builtin_flags_;
  std::unordered_map<std::string, size_t> index_;
};

// ---------------------------------------------------------------------------
// Validation.
// ---------------------------------------------------------------------------

namespace detail {

// Least-fixed-point groundedness over one clique.  Base/List/Alist/Option
// members ground immediately at rank 0; a Prod grounds once every field is
// grounded; a TagSum grounds at the first round where some variant (tried in
// declaration order) has all fields grounded, which freezes that variant as
// the sum's default.  A stalled round with ungrounded members is an error.
class GroundednessPass {
 public:
  GroundednessPass(Schema& schema, const std::vector<TypeDef>& clique)
      : schema_(schema), clique_(clique) {}

  std::vector<Schema::Meta> run(const std::string& clique_label) {
    metas_.resize(clique_.size());
    grounded_.assign(clique_.size(), false);
    bool progress = true;
    size_t remaining = clique_.size();
    while (remaining > 0 && progress) {
      progress = false;
      for (size_t i = 0; i < clique_.size(); ++i) {
        if (grounded_[i]) continue;
        if (try_ground(i)) {
          grounded_[i] = true;
          --remaining;
          progress = true;
        }
      }
    }
    if (remaining > 0) {
      std::string stuck;
      for (size_t i = 0; i < clique_.size(); ++i)
        if (!grounded_[i]) stuck += (stuck.empty() ? "" : ", ") + clique_[i].name;
      throw ValidateError("ungrounded clique" +
                          (clique_label.empty() ? "" : " " + clique_label) +
                          ": no base case for " + stuck);
    }
    compute_min_counts();
    return metas_;
  }

 private:
  Schema& schema_;
  const std::vector<TypeDef>& clique_;
  std::vector<Schema::Meta> metas_;
  std::vector<bool> grounded_;

  std::optional<size_t> clique_index(const std::string& name) const {
    for (size_t i = 0; i < clique_.size(); ++i)
      if (clique_[i].name == name) return i;
    return std::nullopt;
  }

  bool ref_grounded(const std::string& name) const {
    if (auto i = clique_index(name)) return grounded_[*i];
    return true;  // out-of-clique refs were validated as already grounded
  }

  size_t ref_rank(const std::string& name) const {
    if (auto i = clique_index(name)) return metas_[*i].rank;
    return schema_.rank(name);
  }

  Value ref_default(const std::string& name) const {
    if (auto i = clique_index(name)) return metas_[*i].default_witness;
    return schema_.default_witness(name);
  }

  bool fields_grounded(const std::vector<Field>& fields) const {
    for (const Field& f : fields)
      if (!ref_grounded(f.type)) return false;
    return true;
  }

  size_t fields_rank(const std::vector<Field>& fields) const {
    size_t r = 0;
    for (const Field& f : fields) r = std::max(r, ref_rank(f.type));
    return r;
  }

  Value fields_default(const std::vector<Field>& fields) const {
    std::vector<Value> vals;
    for (const Field& f : fields) vals.push_back(ref_default(f.type));
    return Value::list(std::move(vals));
  }

  bool try_ground(size_t i) {
    const TypeDef& def = clique_[i];
    Schema::Meta& meta = metas_[i];
    if (const auto* base = std::get_if<BaseBody>(&def.body)) {
      meta.rank = 0;
      meta.default_witness = builtin_default(base->builtin);
      return true;
    }
    if (def.is_list() || def.is_alist() || def.is_option()) {
      meta.rank = 0;
      meta.default_witness = Value::nil();
      return true;
    }
    if (const auto* prod = std::get_if<ProdBody>(&def.body)) {
      if (!fields_grounded(prod->fields)) return false;
      meta.rank = 1 + fields_rank(prod->fields);
      meta.default_witness = fields_default(prod->fields);
      return true;
    }
    const auto& sum = std::get<TagSumBody>(def.body);
    for (size_t v = 0; v < sum.variants.size(); ++v) {
      if (!fields_grounded(sum.variants[v].fields)) continue;
      meta.rank = 1 + fields_rank(sum.variants[v].fields);
      meta.default_variant = v;
      meta.default_witness =
          Value::cons(Value::symbol(sum.variants[v].tag),
                      fields_default(sum.variants[v].fields));
      return true;
    }
    return false;
  }

  // Minimal structural count per type (and per sum variant), by least fixed
  // point starting from "unknown".  Used by the typed generator's budgets.
  void compute_min_counts() {
    constexpr std::uint64_t kUnknown = std::numeric_limits<std::uint64_t>::max();
    std::vector<std::uint64_t> mins(clique_.size(), kUnknown);
    auto ref_min = [&](const std::string& name) -> std::uint64_t {
      if (auto i = clique_index(name)) return mins[*i];
      return schema_.meta(name).min_count;
    };
    auto ref_is_base = [&](const std::string& name) -> bool {
      if (auto i = clique_index(name)) return clique_[*i].is_base();
      return schema_.at(name).is_base();
    };
    auto fields_min = [&](const std::vector<Field>& fields) -> std::uint64_t {
      std::uint64_t total = 1;
      for (const Field& f : fields) {
        if (ref_is_base(f.type)) continue;
        std::uint64_t m = ref_min(f.type);
        if (m == kUnknown) return kUnknown;
        total += m;
      }
      return total;
    };
    bool changed = true;
    while (changed) {
      changed = false;
      for (size_t i = 0; i < clique_.size(); ++i) {
        const TypeDef& def = clique_[i];
        std::uint64_t next = mins[i];
        if (def.is_base())
          next = 0;
        else if (def.is_list() || def.is_alist())
          next = 1;
        else if (def.is_option())
          next = 0;
        else if (const auto* prod = std::get_if<ProdBody>(&def.body))
          next = fields_min(prod->fields);
        else {
          const auto& sum = std::get<TagSumBody>(def.body);
          for (const Variant& v : sum.variants)
            next = std::min(next, fields_min(v.fields));
        }
        if (next < mins[i]) {
          mins[i] = next;
          changed = true;
        }
      }
    }
    for (size_t i = 0; i < clique_.size(); ++i) {
      metas_[i].min_count = mins[i];
      if (const auto* sum = std::get_if<TagSumBody>(&clique_[i].body)) {
        for (const Variant& v : sum->variants) {
          std::uint64_t m = fields_min(v.fields);
          metas_[i].variant_min_counts.push_back(m);
        }
      }
    }
  }
};

// Does the type recognize nil?  Decided by the body kind alone: lists,
// alists, and options all accept the empty case, sums never do, and a
// product only when it has no fields (its spine is then the empty list).
inline bool admits_nil(const Schema& schema, const std::string& name) {
  const TypeDef& def = schema.at(name);
  if (const auto* base = std::get_if<BaseBody>(&def.body))
    return builtin_recognize(base->builtin, Value::nil());
  if (def.is_list() || def.is_alist() || def.is_option()) return true;
  if (def.is_sum()) return false;
  return std::get<ProdBody>(def.body).fields.empty();
}

}  // namespace detail

// Processes the type events in order and produces the validated registry.
// Definition and function/visitor events may interleave in a file; only the
// type events matter here.
inline Schema validate(const std::vector<Event>& events) {
  Schema schema;
  for (const Event& event : events) {
    const auto* type_event = std::get_if<TypeEvent>(&event);
    if (!type_event) continue;
    const std::vector<TypeDef>& clique = type_event->members;

    // Names: no redefinition, no duplicates inside the clique.  Re-declaring
    // a builtin base with the identical builtin is accepted (the catalog is
    // preloaded, and base files legitimately spell out their deffixtypes).
    std::vector<const TypeDef*> fresh;
    for (const TypeDef& def : clique) {
      if (schema.has(def.name)) {
        const TypeDef& existing = schema.at(def.name);
        const auto* old_base = std::get_if<BaseBody>(&existing.body);
        const auto* new_base = std::get_if<BaseBody>(&def.body);
        if (schema.is_builtin(def.name) && old_base && new_base &&
            old_base->builtin == new_base->builtin)
          continue;  // idempotent re-registration
        throw ValidateError("redefinition of type '" + def.name + "'");
      }
      for (const TypeDef* other : fresh)
        if (other->name == def.name)
          throw ValidateError("duplicate type '" + def.name + "' in clique");
      fresh.push_back(&def);
    }
    if (fresh.empty()) continue;
    std::vector<TypeDef> members;
    for (const TypeDef* d : fresh) members.push_back(*d);

    auto in_clique = [&members](const std::string& name) {
      for (const TypeDef& d : members)
        if (d.name == name) return true;
      return false;
    };

    // Structural checks and reference resolution.
    for (const TypeDef& def : members) {
      auto check_fields = [&](const std::vector<Field>& fields,
                              const std::string& context) {
        for (size_t i = 0; i < fields.size(); ++i) {
          for (size_t j = i + 1; j < fields.size(); ++j)
            if (fields[i].name == fields[j].name)
              throw ValidateError(context + ": duplicate field '" +
                                  fields[i].name + "'");
          if (!schema.has(fields[i].type) && !in_clique(fields[i].type))
            throw ValidateError(context + ": unresolved type '" +
                                fields[i].type + "'");
        }
      };
      auto check_ref = [&](const std::string& type,
                           const std::string& context) {
        if (!schema.has(type) && !in_clique(type))
          throw ValidateError(context + ": unresolved type '" + type + "'");
      };
      if (const auto* prod = std::get_if<ProdBody>(&def.body)) {
        check_fields(prod->fields, "defprod " + def.name);
      } else if (const auto* sum = std::get_if<TagSumBody>(&def.body)) {
        if (sum->variants.empty())
          throw ValidateError("deftagsum " + def.name + ": no variants");
        for (size_t i = 0; i < sum->variants.size(); ++i) {
          for (size_t j = i + 1; j < sum->variants.size(); ++j)
            if (sum->variants[i].tag == sum->variants[j].tag)
              throw ValidateError("deftagsum " + def.name +
                                  ": duplicate tag " + sum->variants[i].tag);
          check_fields(sum->variants[i].fields,
                       "deftagsum " + def.name + " " + sum->variants[i].tag);
        }
      } else if (const auto* list = std::get_if<ListBody>(&def.body)) {
        check_ref(list->elem, "deflist " + def.name);
      } else if (const auto* alist = std::get_if<AlistBody>(&def.body)) {
        check_ref(alist->key, "defalist " + def.name);
        check_ref(alist->val, "defalist " + def.name);
      } else if (const auto* option = std::get_if<OptionBody>(&def.body)) {
        check_ref(option->some, "defoption " + def.name);
      }
    }

    // Groundedness, then registration.
    detail::GroundednessPass pass(schema, members);
    std::vector<Schema::Meta> metas = pass.run(type_event->clique_name);
    for (size_t i = 0; i < members.size(); ++i)
      schema.add(members[i], metas[i], /*builtin=*/false);

    // An option whose some-type admits nil cannot distinguish its none case.
    for (const TypeDef& def : members) {
      if (const auto* option = std::get_if<OptionBody>(&def.body)) {
        if (detail::admits_nil(schema, option->some))
          throw ValidateError("defoption " + def.name + ": some-type '" +
                              option->some + "' admits nil");
      }
    }
  }
  return schema;
}

}  // namespace fixkit
