#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fixkit/errors.hpp"
#include "fixkit/printer.hpp"
#include "fixkit/random.hpp"
#include "fixkit/schema.hpp"
#include "fixkit/value.hpp"

namespace fixkit {

// ---------------------------------------------------------------------------
// Recognizers.
// ---------------------------------------------------------------------------

inline bool recognize(const Schema& schema, std::string_view type,
                      const Value& v);

namespace detail {

// v must be a proper list matching the field arity, each field recognized.
inline bool recognize_spine(const Schema& schema,
                            const std::vector<Field>& fields, const Value& v) {
  const Value* p = &v;
  for (const Field& f : fields) {
    if (!p->is_pair()) return false;
    if (!recognize(schema, f.type, p->head())) return false;
    p = &p->tail();
  }
  return p->is_nil();
}

inline const Variant* find_variant(const TagSumBody& sum,
                                   const std::string& tag) {
  for (const Variant& v : sum.variants)
    if (v.tag == tag) return &v;
  return nullptr;
}

}  // namespace detail

inline bool recognize(const Schema& schema, std::string_view type,
                      const Value& v) {
  const TypeDef& def = schema.at(type);
  if (const auto* base = std::get_if<BaseBody>(&def.body))
    return builtin_recognize(base->builtin, v);
  if (const auto* prod = std::get_if<ProdBody>(&def.body))
    return detail::recognize_spine(schema, prod->fields, v);
  if (const auto* sum = std::get_if<TagSumBody>(&def.body)) {
    if (!v.is_pair() || !v.head().is_symbol()) return false;
    const Variant* variant =
        detail::find_variant(*sum, v.head().symbol_name());
    return variant && detail::recognize_spine(schema, variant->fields, v.tail());
  }
  if (const auto* list = std::get_if<ListBody>(&def.body)) {
    const Value* p = &v;
    while (p->is_pair()) {
      if (!recognize(schema, list->elem, p->head())) return false;
      p = &p->tail();
    }
    return p->is_nil();
  }
  if (const auto* alist = std::get_if<AlistBody>(&def.body)) {
    const Value* p = &v;
    while (p->is_pair()) {
      const Value& entry = p->head();
      if (!entry.is_pair()) return false;
      if (!recognize(schema, alist->key, entry.head())) return false;
      if (!recognize(schema, alist->val, entry.tail())) return false;
      p = &p->tail();
    }
    return p->is_nil();
  }
  const auto& option = std::get<OptionBody>(def.body);
  return v.is_nil() || recognize(schema, option.some, v);
}

// ---------------------------------------------------------------------------
// Fixing functions.  Identity on recognized values (sharing the input);
// otherwise the body-specific repair, which bottoms out at the grounded
// default witnesses.
// ---------------------------------------------------------------------------

inline Value fix(const Schema& schema, std::string_view type, const Value& v);

namespace detail {

inline Value variant_witness(const Schema& schema, const TagSumBody& sum,
                             size_t index) {
  const Variant& variant = sum.variants[index];
  std::vector<Value> fields;
  for (const Field& f : variant.fields)
    fields.push_back(schema.default_witness(f.type));
  return Value::cons(Value::symbol(variant.tag), Value::list(std::move(fields)));
}

// Field spine repair shared by products and sum variants: a proper list of
// exactly the right arity gets field-wise fixing, anything else falls back
// to the witness.
inline Value fix_spine(const Schema& schema, const std::vector<Field>& fields,
                       const Value& v, const Value& witness) {
  std::vector<Value> elems;
  const Value* p = &v;
  for (const Field& f : fields) {
    if (!p->is_pair()) return witness;
    elems.push_back(fix(schema, f.type, p->head()));
    p = &p->tail();
  }
  if (!p->is_nil()) return witness;
  return Value::list(std::move(elems));
}

}  // namespace detail

inline Value fix(const Schema& schema, std::string_view type, const Value& v) {
  if (recognize(schema, type, v)) return v;
  const TypeDef& def = schema.at(type);
  if (const auto* base = std::get_if<BaseBody>(&def.body))
    return builtin_fix(base->builtin, v);
  if (const auto* prod = std::get_if<ProdBody>(&def.body))
    return detail::fix_spine(schema, prod->fields, v,
                             schema.default_witness(type));
  if (const auto* sum = std::get_if<TagSumBody>(&def.body)) {
    if (v.is_pair() && v.head().is_symbol()) {
      if (const Variant* variant =
              detail::find_variant(*sum, v.head().symbol_name())) {
        size_t index = variant - sum->variants.data();
        return Value::cons(
            v.head(),
            detail::fix_spine(schema, variant->fields, v.tail(),
                              detail::variant_witness(schema, *sum, index)
                                  .tail()));
      }
    }
    return schema.default_witness(type);
  }
  if (const auto* list = std::get_if<ListBody>(&def.body)) {
    std::vector<Value> elems;
    const Value* p = &v;
    while (p->is_pair()) {
      elems.push_back(fix(schema, list->elem, p->head()));
      p = &p->tail();
    }
    return Value::list(std::move(elems));  // any atom tail becomes nil
  }
  if (const auto* alist = std::get_if<AlistBody>(&def.body)) {
    std::vector<Value> entries;
    const Value* p = &v;
    while (p->is_pair()) {
      const Value& entry = p->head();
      if (entry.is_pair())  // non-pair entries are dropped
        entries.push_back(Value::cons(fix(schema, alist->key, entry.head()),
                                      fix(schema, alist->val, entry.tail())));
      p = &p->tail();
    }
    return Value::list(std::move(entries));
  }
  const auto& option = std::get<OptionBody>(def.body);
  if (v.is_nil()) return v;
  return fix(schema, option.some, v);
}

// Induced equivalence: equality up to fixing.
inline bool equiv(const Schema& schema, std::string_view type, const Value& a,
                  const Value& b) {
  return fix(schema, type, a) == fix(schema, type, b);
}

// ---------------------------------------------------------------------------
// Count measures.  Computed on the fixed value.  Base-typed positions
// contribute nothing, so counts order only the structural recursion.
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t count_typed(const Schema& schema, std::string_view type,
                                 const Value& v);

inline std::uint64_t count_fields(const Schema& schema,
                                  const std::vector<Field>& fields,
                                  const Value& spine) {
  std::uint64_t total = 0;
  const Value* p = &spine;
  for (const Field& f : fields) {
    if (!schema.at(f.type).is_base())
      total += count_typed(schema, f.type, p->head());
    p = &p->tail();
  }
  return total;
}

inline std::uint64_t count_typed(const Schema& schema, std::string_view type,
                                 const Value& v) {
  const TypeDef& def = schema.at(type);
  if (def.is_base()) return 0;
  if (const auto* prod = std::get_if<ProdBody>(&def.body))
    return 1 + count_fields(schema, prod->fields, v);
  if (const auto* sum = std::get_if<TagSumBody>(&def.body)) {
    const Variant* variant = find_variant(*sum, v.head().symbol_name());
    return 1 + count_fields(schema, variant->fields, v.tail());
  }
  if (const auto* list = std::get_if<ListBody>(&def.body)) {
    std::uint64_t total = 1;
    bool base_elem = schema.at(list->elem).is_base();
    for (const Value* p = &v; p->is_pair(); p = &p->tail())
      if (!base_elem) total += count_typed(schema, list->elem, p->head());
    return total;
  }
  if (const auto* alist = std::get_if<AlistBody>(&def.body)) {
    std::uint64_t total = 1;
    bool base_key = schema.at(alist->key).is_base();
    bool base_val = schema.at(alist->val).is_base();
    for (const Value* p = &v; p->is_pair(); p = &p->tail()) {
      total += 1;
      if (!base_key) total += count_typed(schema, alist->key, p->head().head());
      if (!base_val) total += count_typed(schema, alist->val, p->head().tail());
    }
    return total;
  }
  const auto& option = std::get<OptionBody>(def.body);
  if (v.is_nil()) return 0;
  return 1 + count_typed(schema, option.some, v);
}

}  // namespace detail

inline std::uint64_t count(const Schema& schema, std::string_view type,
                           const Value& v) {
  return detail::count_typed(schema, type, fix(schema, type, v));
}

// ---------------------------------------------------------------------------
// Constructors, accessors, kind dispatch.
// ---------------------------------------------------------------------------

namespace detail {

inline const std::vector<Field>& ctor_fields(const Schema& schema,
                                             std::string_view type,
                                             const std::optional<std::string>& tag,
                                             const Variant** variant_out) {
  const TypeDef& def = schema.at(type);
  if (const auto* prod = std::get_if<ProdBody>(&def.body)) {
    if (tag)
      throw LookupError("type '" + std::string(type) + "' has no tags");
    return prod->fields;
  }
  if (const auto* sum = std::get_if<TagSumBody>(&def.body)) {
    if (!tag)
      throw LookupError("type '" + std::string(type) + "' needs a tag");
    const Variant* variant = find_variant(*sum, *tag);
    if (!variant)
      throw LookupError("unknown tag '" + *tag + "' on type '" +
                        std::string(type) + "'");
    if (variant_out) *variant_out = variant;
    return variant->fields;
  }
  throw LookupError("type '" + std::string(type) +
                    "' has no constructor or fields");
}

}  // namespace detail

// Builds a value of the product or tagged-sum type; every field value is
// fixed at its declared type first, so the result is always recognized.
inline Value construct(const Schema& schema, std::string_view type,
                       const std::optional<std::string>& tag,
                       const std::vector<Value>& field_values) {
  const std::vector<Field>& fields =
      detail::ctor_fields(schema, type, tag, nullptr);
  if (fields.size() != field_values.size())
    throw LookupError("constructor for '" + std::string(type) +
                      (tag ? " " + *tag : "") + "' expects " +
                      std::to_string(fields.size()) + " fields, got " +
                      std::to_string(field_values.size()));
  std::vector<Value> fixed;
  for (size_t i = 0; i < fields.size(); ++i)
    fixed.push_back(fix(schema, fields[i].type, field_values[i]));
  Value spine = Value::list(std::move(fixed));
  if (tag) return Value::cons(Value::symbol(*tag), std::move(spine));
  return spine;
}

// Projects a field out of fix(type, v); on a sum, a wrong-kind value
// projects out of the requested variant's witness so the result is always
// recognized at the field's type.
inline Value access(const Schema& schema, std::string_view type,
                    const std::optional<std::string>& tag,
                    std::string_view field, const Value& v) {
  const Variant* variant = nullptr;
  const std::vector<Field>& fields =
      detail::ctor_fields(schema, type, tag, &variant);
  size_t index = fields.size();
  for (size_t i = 0; i < fields.size(); ++i)
    if (fields[i].name == field) index = i;
  if (index == fields.size())
    throw LookupError("unknown field '" + std::string(field) + "' on '" +
                      std::string(type) + (tag ? " " + *tag : "") + "'");
  Value fixed = fix(schema, type, v);
  Value spine = fixed;
  if (tag) {
    if (fixed.head().symbol_name() != *tag) {
      const auto& sum = std::get<TagSumBody>(schema.at(type).body);
      spine = detail::variant_witness(schema, sum, variant - sum.variants.data());
    } else {
      spine = fixed;
    }
    spine = spine.tail();
  }
  for (size_t i = 0; i < index; ++i) spine = spine.tail();
  return spine.head();
}

// The tag of fix(type, v).
inline Value kind_of(const Schema& schema, std::string_view type,
                     const Value& v) {
  const TypeDef& def = schema.at(type);
  if (!def.is_sum())
    throw LookupError("type '" + std::string(type) + "' is not a tagged sum");
  return fix(schema, type, v).head();
}

// ---------------------------------------------------------------------------
// Typed generation.  Deterministic per seed; the budget bounds the total
// count (a budget too small for any shape falls back to the default
// witness's shape).
// ---------------------------------------------------------------------------

namespace detail {

inline Value generate_base(Builtin b, Rng& rng) {
  switch (b) {
    case Builtin::Nat:
      if (rng.chance(1, 16)) {
        Value::Int big = 1;
        big <<= 64;
        return Value::integer(big + static_cast<long long>(rng.next_below(100)));
      }
      return Value::integer(static_cast<long long>(rng.next_below(50)));
    case Builtin::Int:
      if (rng.chance(1, 16)) {
        Value::Int big = 1;
        big <<= 64;
        return Value::integer(rng.chance(1, 2) ? big : -big);
      }
      return Value::integer(rng.next_in(-50, 50));
    case Builtin::String: {
      static const char cs[] = "abcxyz 019-";
      std::string s;
      size_t n = rng.next_below(5);
      for (size_t i = 0; i < n; ++i) s += cs[rng.next_below(sizeof(cs) - 1)];
      return Value::string(std::move(s));
    }
    case Builtin::Bool:
      return boolean(rng.chance(1, 2));
    case Builtin::Char:
      return Value::character(static_cast<unsigned char>(rng.next_below(256)));
    default:
      return Value::symbol(symbol_alphabet(rng.next_below(10)));
  }
}

inline Value generate_typed_impl(const Schema& schema, std::string_view type,
                                 std::uint64_t budget, Rng& rng);

// Budget split for a field spine: each non-base field gets its minimum plus
// a random share of the slack above the shape's own cost.
inline std::vector<Value> generate_fields(const Schema& schema,
                                          const std::vector<Field>& fields,
                                          std::uint64_t budget, Rng& rng) {
  std::uint64_t need = 1;
  for (const Field& f : fields)
    if (!schema.at(f.type).is_base()) need += schema.meta(f.type).min_count;
  std::uint64_t slack = budget > need ? budget - need : 0;
  std::vector<Value> out;
  for (const Field& f : fields) {
    if (schema.at(f.type).is_base()) {
      out.push_back(
          generate_base(std::get<BaseBody>(schema.at(f.type).body).builtin,
                        rng));
      continue;
    }
    std::uint64_t share = rng.next_below(slack + 1);
    slack -= share;
    out.push_back(generate_typed_impl(
        schema, f.type, schema.meta(f.type).min_count + share, rng));
  }
  return out;
}

inline Value generate_typed_impl(const Schema& schema, std::string_view type,
                                 std::uint64_t budget, Rng& rng) {
  const TypeDef& def = schema.at(type);
  const Schema::Meta& meta = schema.meta(type);
  if (const auto* base = std::get_if<BaseBody>(&def.body))
    return generate_base(base->builtin, rng);
  if (const auto* prod = std::get_if<ProdBody>(&def.body))
    return Value::list(generate_fields(schema, prod->fields, budget, rng));
  if (const auto* sum = std::get_if<TagSumBody>(&def.body)) {
    // Uniform over the variants whose minimal count fits the budget; if
    // none fit, the grounded default variant.
    std::vector<size_t> candidates;
    for (size_t i = 0; i < sum->variants.size(); ++i)
      if (meta.variant_min_counts[i] <= budget) candidates.push_back(i);
    size_t pick = candidates.empty()
                      ? meta.default_variant
                      : candidates[rng.next_below(candidates.size())];
    return Value::cons(
        Value::symbol(sum->variants[pick].tag),
        Value::list(
            generate_fields(schema, sum->variants[pick].fields, budget, rng)));
  }
  if (const auto* list = std::get_if<ListBody>(&def.body)) {
    bool base_elem = schema.at(list->elem).is_base();
    std::uint64_t elem_min =
        base_elem ? 0 : std::max<std::uint64_t>(schema.meta(list->elem).min_count, 1);
    std::uint64_t cap =
        base_elem ? std::min<std::uint64_t>(budget, 8)
                  : std::min<std::uint64_t>(budget > 0 ? (budget - 1) / elem_min : 0, 8);
    std::uint64_t n = rng.next_below(cap + 1);
    std::uint64_t slack = 0;
    if (!base_elem && budget > 1 + n * elem_min) slack = budget - 1 - n * elem_min;
    std::vector<Value> elems;
    for (std::uint64_t i = 0; i < n; ++i) {
      if (base_elem) {
        elems.push_back(generate_base(
            std::get<BaseBody>(schema.at(list->elem).body).builtin, rng));
      } else {
        std::uint64_t share = rng.next_below(slack + 1);
        slack -= share;
        elems.push_back(generate_typed_impl(
            schema, list->elem, schema.meta(list->elem).min_count + share, rng));
      }
    }
    return Value::list(std::move(elems));
  }
  if (const auto* alist = std::get_if<AlistBody>(&def.body)) {
    std::uint64_t entry_min = 1;
    if (!schema.at(alist->key).is_base())
      entry_min += schema.meta(alist->key).min_count;
    if (!schema.at(alist->val).is_base())
      entry_min += schema.meta(alist->val).min_count;
    std::uint64_t cap =
        std::min<std::uint64_t>(budget > 0 ? (budget - 1) / entry_min : 0, 8);
    std::uint64_t n = rng.next_below(cap + 1);
    std::uint64_t slack = budget > 1 + n * entry_min ? budget - 1 - n * entry_min : 0;
    std::vector<Value> entries;
    for (std::uint64_t i = 0; i < n; ++i) {
      auto gen_side = [&](const std::string& t) {
        if (schema.at(t).is_base())
          return generate_base(std::get<BaseBody>(schema.at(t).body).builtin,
                               rng);
        std::uint64_t share = rng.next_below(slack + 1);
        slack -= share;
        return generate_typed_impl(schema, t,
                                   schema.meta(t).min_count + share, rng);
      };
      Value key = gen_side(alist->key);
      Value val = gen_side(alist->val);
      entries.push_back(Value::cons(std::move(key), std::move(val)));
    }
    return Value::list(std::move(entries));
  }
  const auto& option = std::get<OptionBody>(def.body);
  std::uint64_t some_need = 1;
  if (!schema.at(option.some).is_base())
    some_need += schema.meta(option.some).min_count;
  if (budget < some_need || rng.chance(1, 3)) return Value::nil();
  return generate_typed_impl(schema, option.some, budget - 1, rng);
}

}  // namespace detail

inline Value generate_typed(const Schema& schema, std::string_view type,
                            std::uint64_t budget, Rng& rng) {
  return detail::generate_typed_impl(schema, type, budget, rng);
}

inline Value generate_typed(const Schema& schema, std::string_view type,
                            std::uint64_t budget, std::uint64_t seed) {
  Rng rng(seed);
  return generate_typed(schema, type, budget, rng);
}

// ---------------------------------------------------------------------------
// Equivalence-class sampling: given a recognized value w, produce a random
// raw value whose fix is exactly w.  The law harness uses this to build
// equivalent-by-construction argument pairs.
// ---------------------------------------------------------------------------

namespace detail {

inline Value junk_atom(Rng& rng) {
  Value v = random_atom(rng);
  return v;
}

// An atom that a base fix maps to w, when w is the fix target; otherwise w
// itself (positive naturals, non-empty strings etc. are their own only
// preimage).
inline Value equiv_variant_base(Builtin b, const Value& w, Rng& rng) {
  if (!rng.chance(1, 2)) return w;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Value junk = random_atom(rng);
    if (!builtin_recognize(b, junk) && builtin_fix(b, junk) == w) return junk;
  }
  return w;
}

inline Value equiv_variant_impl(const Schema& schema, std::string_view type,
                                const Value& w, Rng& rng);

inline Value equiv_variant_spine(const Schema& schema,
                                 const std::vector<Field>& fields,
                                 const Value& spine, Rng& rng) {
  std::vector<Value> out;
  const Value* p = &spine;
  for (const Field& f : fields) {
    out.push_back(equiv_variant_impl(schema, f.type, p->head(), rng));
    p = &p->tail();
  }
  return Value::list(std::move(out));
}

inline Value equiv_variant_impl(const Schema& schema, std::string_view type,
                                const Value& w, Rng& rng) {
  const TypeDef& def = schema.at(type);
  if (const auto* base = std::get_if<BaseBody>(&def.body))
    return equiv_variant_base(base->builtin, w, rng);
  if (const auto* prod = std::get_if<ProdBody>(&def.body)) {
    // Any non-spine value fixes to the witness; atoms are never a spine of
    // positive arity, and the nil atom already is the empty spine.
    if (!prod->fields.empty() && w == schema.default_witness(type) &&
        rng.chance(1, 3))
      return junk_atom(rng);
    return equiv_variant_spine(schema, prod->fields, w, rng);
  }
  if (const auto* sum = std::get_if<TagSumBody>(&def.body)) {
    if (w == schema.default_witness(type) && rng.chance(1, 4))
      return junk_atom(rng);  // unrecognized shapes fall to the witness
    const Variant* variant = find_variant(*sum, w.head().symbol_name());
    size_t index = variant - sum->variants.data();
    if (!variant->fields.empty() &&
        w == variant_witness(schema, *sum, index) && rng.chance(1, 4))
      return Value::cons(w.head(), junk_atom(rng));  // broken variant spine
    return Value::cons(w.head(),
                       equiv_variant_spine(schema, variant->fields, w.tail(),
                                           rng));
  }
  if (const auto* list = std::get_if<ListBody>(&def.body)) {
    std::vector<Value> elems;
    for (const Value* p = &w; p->is_pair(); p = &p->tail())
      elems.push_back(equiv_variant_impl(schema, list->elem, p->head(), rng));
    Value tail = Value::nil();
    if (rng.chance(1, 3)) {
      Value junk = junk_atom(rng);
      if (!junk.is_pair() && !junk.is_nil()) tail = junk;
    }
    Value out = tail;
    for (auto it = elems.rbegin(); it != elems.rend(); ++it)
      out = Value::cons(*it, out);
    return out;
  }
  if (const auto* alist = std::get_if<AlistBody>(&def.body)) {
    std::vector<Value> entries;
    for (const Value* p = &w; p->is_pair(); p = &p->tail()) {
      if (rng.chance(1, 4)) {
        Value junk = junk_atom(rng);  // non-pair entries get dropped by fix
        if (!junk.is_pair()) entries.push_back(junk);
      }
      entries.push_back(
          Value::cons(equiv_variant_impl(schema, alist->key, p->head().head(), rng),
                      equiv_variant_impl(schema, alist->val, p->head().tail(), rng)));
    }
    if (rng.chance(1, 4)) {
      Value junk = junk_atom(rng);
      if (!junk.is_pair()) entries.push_back(junk);
    }
    Value tail = Value::nil();
    if (rng.chance(1, 3)) {
      Value junk = junk_atom(rng);
      if (!junk.is_pair() && !junk.is_nil()) tail = junk;
    }
    Value out = tail;
    for (auto it = entries.rbegin(); it != entries.rend(); ++it)
      out = Value::cons(*it, out);
    return out;
  }
  const auto& option = std::get<OptionBody>(def.body);
  if (w.is_nil()) return w;  // nil is its own only preimage
  Value candidate = equiv_variant_impl(schema, option.some, w, rng);
  if (candidate.is_nil()) return w;  // nil would read as the none case
  return candidate;
}

}  // namespace detail

// Random member of the fix-equivalence class of v: the result always
// satisfies fix(type, result) == fix(type, v).
inline Value equiv_variant(const Schema& schema, std::string_view type,
                           const Value& v, Rng& rng) {
  return detail::equiv_variant_impl(schema, type, fix(schema, type, v), rng);
}

}  // namespace fixkit
