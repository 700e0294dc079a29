#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tlpe {

// Interned atom / functor name. Ids are process-global and stable.
class Symbol {
 public:
  Symbol() = default;
  static Symbol intern(std::string_view name);
  static Symbol from_id(uint32_t id) { return Symbol(id); }

  uint32_t id() const { return id_; }
  std::string_view name() const;

  friend bool operator==(Symbol a, Symbol b) { return a.id_ == b.id_; }
  friend bool operator!=(Symbol a, Symbol b) { return a.id_ != b.id_; }

 private:
  explicit Symbol(uint32_t id) : id_(id) {}
  uint32_t id_ = 0;
};

enum class TermKind : uint8_t { Var, Int, Dec, Atom, Compound };

// Decimal literals are stored as integers scaled by this factor (4 places).
inline constexpr int64_t kDecimalScale = 10000;

class Term;

struct CompoundNode {
  Symbol functor;
  bool ground;
  uint32_t var_bound;  // 1 + highest variable id occurring, 0 if none
  size_t hash;
  std::vector<Term> args;
};

// Immutable first-order term. Variables are term-local integer ids; two
// terms only share variables when the caller says so (e.g. by unifying them
// against one Bindings object).
class Term {
 public:
  Term() = default;  // the integer 0

  static Term var(uint32_t id);
  static Term integer(int64_t v);
  static Term decimal_scaled(int64_t scaled);
  static Term atom(Symbol s);
  static Term atom(std::string_view name) { return atom(Symbol::intern(name)); }
  static Term compound(Symbol functor, std::vector<Term> args);
  static Term compound(std::string_view functor, std::vector<Term> args) {
    return compound(Symbol::intern(functor), std::move(args));
  }
  static Term nil();
  static Term cons(Term head, Term tail);
  static Term list(std::span<const Term> items, Term tail = nil());

  TermKind kind() const { return kind_; }
  bool is_var() const { return kind_ == TermKind::Var; }
  bool is_int() const { return kind_ == TermKind::Int; }
  bool is_dec() const { return kind_ == TermKind::Dec; }
  bool is_number() const { return kind_ == TermKind::Int || kind_ == TermKind::Dec; }
  bool is_atom() const { return kind_ == TermKind::Atom; }
  bool is_compound() const { return kind_ == TermKind::Compound; }
  bool is_callable() const { return is_atom() || is_compound(); }
  bool is_atomic() const { return !is_var() && !is_compound(); }
  bool is_nil() const;
  bool is_cons() const;

  uint32_t var_id() const { return static_cast<uint32_t>(value_); }
  int64_t int_value() const { return value_; }  // Int value, or scaled Dec value
  Symbol symbol() const;                        // Atom name or Compound functor
  size_t arity() const { return node_ ? node_->args.size() : 0; }
  const Term& arg(size_t i) const { return node_->args[i]; }
  std::span<const Term> args() const;
  const CompoundNode* node() const { return node_.get(); }

  bool ground() const;
  uint32_t var_bound() const;
  size_t hash() const;

  // Structural identity (variables compared by id).
  friend bool operator==(const Term& a, const Term& b);
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }

 private:
  TermKind kind_ = TermKind::Int;
  int64_t value_ = 0;  // var id, int, scaled decimal, or symbol id
  std::shared_ptr<const CompoundNode> node_;
};

struct TermHash {
  size_t operator()(const Term& t) const { return t.hash(); }
};

// Name/arity pair identifying a predicate or functor.
struct PredKey {
  Symbol name;
  uint32_t arity = 0;
  friend bool operator==(PredKey a, PredKey b) { return a.name == b.name && a.arity == b.arity; }
  std::string str() const;
};

struct PredKeyHash {
  size_t operator()(PredKey k) const { return (size_t(k.name.id()) << 8) ^ k.arity; }
};

bool pred_key_less(PredKey a, PredKey b);  // by name, then arity

inline PredKey pred_key_of(const Term& callable) {
  return PredKey{callable.symbol(), static_cast<uint32_t>(callable.arity())};
}

// Dense, var-id-indexed binding store. Bindings may chain (X->Y->a); deref
// follows them.
class Bindings {
 public:
  Bindings() = default;
  explicit Bindings(uint32_t nvars) : slots_(nvars), bound_(nvars, false) {}

  uint32_t size() const { return static_cast<uint32_t>(slots_.size()); }
  void reserve_vars(uint32_t nvars);
  bool is_bound(uint32_t v) const { return v < bound_.size() && bound_[v]; }
  const Term& binding(uint32_t v) const { return slots_[v]; }
  void bind(uint32_t v, Term t);
  void unbind(uint32_t v) { bound_[v] = false; }

  Term deref(Term t) const;
  // Applies the bindings recursively.
  Term resolve(const Term& t) const;

  size_t trail_size() const { return trail_.size(); }
  void undo_to(size_t mark);

 private:
  std::vector<Term> slots_;
  std::vector<bool> bound_;
  std::vector<uint32_t> trail_;
};

// Substitution in map form: var id -> term, idempotent.
using Substitution = std::map<uint32_t, Term>;

Term apply(const Substitution& s, const Term& t);

// Unification within one variable namespace. On failure the bindings are
// restored to their state at entry.
bool unify(const Term& a, const Term& b, Bindings& env, bool occurs_check = false);
std::optional<Substitution> unify(const Term& a, const Term& b, bool occurs_check = false);

bool variant(const Term& a, const Term& b);

// One-way matching: binds only variables of `general`; the variables of
// `specific` are treated as constants even when ids overlap.
std::optional<Substitution> subsumes(const Term& general, const Term& specific);
bool match(const Term& general, const Term& specific, std::vector<std::optional<Term>>& env);

// Renumbers variables 0,1,2,... in first-occurrence preorder.
Term canonicalize(const Term& t);

// Renames variables by adding `offset` to every id.
Term offset_vars(const Term& t, uint32_t offset);

// Standard order of terms: Var < Number < Atom < Compound.
std::strong_ordering compare_terms(const Term& a, const Term& b);

struct TermLess {
  bool operator()(const Term& a, const Term& b) const { return compare_terms(a, b) < 0; }
};

// Renumbers variables of a group of terms jointly, applying `env` first.
// The result shares one dense namespace 0..count()-1.
class Renamer {
 public:
  explicit Renamer(const Bindings* env = nullptr) : env_(env) {}
  Term operator()(const Term& t);
  uint32_t count() const { return next_; }

 private:
  Term copy_compound(const Term& t);

  static constexpr uint32_t kMaxDepth = 100000;
  const Bindings* env_;
  uint32_t depth_ = 0;
  std::vector<uint32_t> map_;
  std::vector<bool> mapped_;
  std::vector<bool> expanding_;
  uint32_t next_ = 0;
};

size_t symbol_count(const Term& t);  // preorder symbol count

}  // namespace tlpe
