#include "tlpe/term.hpp"

#include "tlpe/error.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <mutex>
#include <unordered_map>

namespace tlpe {

namespace {

struct SymbolTable {
  std::mutex mu;
  std::deque<std::string> names;
  std::unordered_map<std::string_view, uint32_t> ids;

  SymbolTable() { intern("[]"); }

  uint32_t intern(std::string_view name) {
    auto it = ids.find(name);
    if (it != ids.end()) return it->second;
    names.emplace_back(name);
    auto id = static_cast<uint32_t>(names.size() - 1);
    ids.emplace(names.back(), id);
    return id;
  }
};

SymbolTable& symbols() {
  static SymbolTable table;
  return table;
}

size_t mix(size_t h, size_t v) { return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)); }

const Symbol& nil_symbol() {
  static const Symbol s = Symbol::intern("[]");
  return s;
}
const Symbol& dot_symbol() {
  static const Symbol s = Symbol::intern(".");
  return s;
}

}  // namespace

Symbol Symbol::intern(std::string_view name) {
  auto& t = symbols();
  std::lock_guard lock(t.mu);
  return Symbol(t.intern(name));
}

std::string_view Symbol::name() const {
  auto& t = symbols();
  std::lock_guard lock(t.mu);
  return t.names[id_];
}

std::string PredKey::str() const { return std::string(name.name()) + "/" + std::to_string(arity); }

bool pred_key_less(PredKey a, PredKey b) {
  if (a.name != b.name) return a.name.name() < b.name.name();
  return a.arity < b.arity;
}

Term Term::var(uint32_t id) {
  Term t;
  t.kind_ = TermKind::Var;
  t.value_ = id;
  return t;
}

Term Term::integer(int64_t v) {
  Term t;
  t.kind_ = TermKind::Int;
  t.value_ = v;
  return t;
}

Term Term::decimal_scaled(int64_t scaled) {
  Term t;
  t.kind_ = TermKind::Dec;
  t.value_ = scaled;
  return t;
}

Term Term::atom(Symbol s) {
  Term t;
  t.kind_ = TermKind::Atom;
  t.value_ = s.id();
  return t;
}

Term Term::compound(Symbol functor, std::vector<Term> args) {
  if (args.empty()) return atom(functor);
  bool ground = true;
  uint32_t bound = 0;
  size_t h = mix(functor.id(), args.size());
  for (const auto& a : args) {
    ground = ground && a.ground();
    bound = std::max(bound, a.var_bound());
    h = mix(h, a.hash());
  }
  Term t;
  t.kind_ = TermKind::Compound;
  t.node_ = std::make_shared<const CompoundNode>(CompoundNode{functor, ground, bound, h, std::move(args)});
  return t;
}

Term Term::nil() { return atom(nil_symbol()); }

Term Term::cons(Term head, Term tail) { return compound(dot_symbol(), {std::move(head), std::move(tail)}); }

Term Term::list(std::span<const Term> items, Term tail) {
  Term acc = std::move(tail);
  for (auto it = items.rbegin(); it != items.rend(); ++it) acc = cons(*it, std::move(acc));
  return acc;
}

bool Term::is_nil() const { return kind_ == TermKind::Atom && value_ == nil_symbol().id(); }

bool Term::is_cons() const {
  return kind_ == TermKind::Compound && node_->functor == dot_symbol() && node_->args.size() == 2;
}

Symbol Term::symbol() const {
  if (kind_ == TermKind::Compound) return node_->functor;
  return Symbol::from_id(static_cast<uint32_t>(value_));
}

std::span<const Term> Term::args() const {
  if (!node_) return {};
  return std::span<const Term>(node_->args);
}

bool Term::ground() const {
  switch (kind_) {
    case TermKind::Var: return false;
    case TermKind::Compound: return node_->ground;
    default: return true;
  }
}

uint32_t Term::var_bound() const {
  switch (kind_) {
    case TermKind::Var: return static_cast<uint32_t>(value_) + 1;
    case TermKind::Compound: return node_->var_bound;
    default: return 0;
  }
}

size_t Term::hash() const {
  if (kind_ == TermKind::Compound) return node_->hash;
  return mix(static_cast<size_t>(kind_) * 0x51ed27, static_cast<size_t>(value_));
}

bool operator==(const Term& a, const Term& b) {
  if (a.kind_ != b.kind_) return false;
  if (a.kind_ != TermKind::Compound) return a.value_ == b.value_;
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.hash != y.hash || x.functor != y.functor || x.args.size() != y.args.size()) return false;
  for (size_t i = 0; i < x.args.size(); ++i)
    if (!(x.args[i] == y.args[i])) return false;
  return true;
}

// ---------------------------------------------------------------------------

void Bindings::reserve_vars(uint32_t nvars) {
  if (nvars > slots_.size()) {
    slots_.resize(nvars);
    bound_.resize(nvars, false);
  }
}

void Bindings::bind(uint32_t v, Term t) {
  reserve_vars(v + 1);
  slots_[v] = std::move(t);
  bound_[v] = true;
  trail_.push_back(v);
}

void Bindings::undo_to(size_t mark) {
  while (trail_.size() > mark) {
    bound_[trail_.back()] = false;
    trail_.pop_back();
  }
}

Term Bindings::deref(Term t) const {
  while (t.is_var() && is_bound(t.var_id())) t = slots_[t.var_id()];
  return t;
}

Term Bindings::resolve(const Term& t) const {
  Term d = deref(t);
  if (!d.is_compound() || d.ground()) return d;
  std::vector<Term> args;
  args.reserve(d.arity());
  for (const auto& a : d.args()) args.push_back(resolve(a));
  return Term::compound(d.symbol(), std::move(args));
}

Term apply(const Substitution& s, const Term& t) {
  switch (t.kind()) {
    case TermKind::Var: {
      auto it = s.find(t.var_id());
      return it == s.end() ? t : it->second;
    }
    case TermKind::Compound: {
      if (t.ground()) return t;
      std::vector<Term> args;
      args.reserve(t.arity());
      for (const auto& a : t.args()) args.push_back(apply(s, a));
      return Term::compound(t.symbol(), std::move(args));
    }
    default: return t;
  }
}

namespace {

bool occurs(uint32_t v, const Term& t, const Bindings& env) {
  Term d = env.deref(t);
  if (d.is_var()) return d.var_id() == v;
  if (!d.is_compound() || d.ground()) return false;
  for (const auto& a : d.args())
    if (occurs(v, a, env)) return true;
  return false;
}

bool unify_rec(const Term& a0, const Term& b0, Bindings& env, bool occurs_check) {
  Term a = env.deref(a0);
  Term b = env.deref(b0);
  if (a.is_var()) {
    if (b.is_var() && b.var_id() == a.var_id()) return true;
    if (occurs_check && occurs(a.var_id(), b, env)) return false;
    env.bind(a.var_id(), b);
    return true;
  }
  if (b.is_var()) {
    if (occurs_check && occurs(b.var_id(), a, env)) return false;
    env.bind(b.var_id(), a);
    return true;
  }
  if (a.kind() != b.kind()) return false;
  if (!a.is_compound()) return a.int_value() == b.int_value();
  if (a.node() == b.node()) return true;
  if (a.symbol() != b.symbol() || a.arity() != b.arity()) return false;
  if (a.ground() && b.ground()) return a == b;
  for (size_t i = 0; i < a.arity(); ++i)
    if (!unify_rec(a.arg(i), b.arg(i), env, occurs_check)) return false;
  return true;
}

}  // namespace

bool unify(const Term& a, const Term& b, Bindings& env, bool occurs_check) {
  env.reserve_vars(std::max(a.var_bound(), b.var_bound()));
  size_t mark = env.trail_size();
  if (unify_rec(a, b, env, occurs_check)) return true;
  env.undo_to(mark);
  return false;
}

std::optional<Substitution> unify(const Term& a, const Term& b, bool occurs_check) {
  Bindings env(std::max(a.var_bound(), b.var_bound()));
  if (!unify(a, b, env, occurs_check)) return std::nullopt;
  Substitution s;
  for (uint32_t v = 0; v < env.size(); ++v) {
    if (!env.is_bound(v)) continue;
    Term r = env.resolve(Term::var(v));
    if (r.is_var() && r.var_id() == v) continue;
    s.emplace(v, std::move(r));
  }
  return s;
}

namespace {

bool variant_rec(const Term& a, const Term& b, std::vector<int64_t>& fwd, std::vector<int64_t>& back) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case TermKind::Var: {
      auto x = a.var_id(), y = b.var_id();
      if (fwd[x] < 0 && back[y] < 0) {
        fwd[x] = y;
        back[y] = x;
        return true;
      }
      return fwd[x] == y && back[y] == x;
    }
    case TermKind::Compound: {
      if (a.node() == b.node()) {
        // Shared structure is a variant of itself only if its variables are
        // consistently mapped to themselves; fall through otherwise.
        if (a.ground()) return true;
      }
      if (a.symbol() != b.symbol() || a.arity() != b.arity()) return false;
      if (a.ground() != b.ground()) return false;
      if (a.ground()) return a == b;
      for (size_t i = 0; i < a.arity(); ++i)
        if (!variant_rec(a.arg(i), b.arg(i), fwd, back)) return false;
      return true;
    }
    default: return a.int_value() == b.int_value();
  }
}

}  // namespace

bool variant(const Term& a, const Term& b) {
  std::vector<int64_t> fwd(a.var_bound(), -1), back(b.var_bound(), -1);
  return variant_rec(a, b, fwd, back);
}

bool match(const Term& g, const Term& s, std::vector<std::optional<Term>>& env) {
  switch (g.kind()) {
    case TermKind::Var: {
      auto v = g.var_id();
      if (v >= env.size()) env.resize(v + 1);
      if (!env[v]) {
        env[v] = s;
        return true;
      }
      return *env[v] == s;
    }
    case TermKind::Compound: {
      if (!s.is_compound() || g.symbol() != s.symbol() || g.arity() != s.arity()) return false;
      if (g.ground()) return g == s;
      for (size_t i = 0; i < g.arity(); ++i)
        if (!match(g.arg(i), s.arg(i), env)) return false;
      return true;
    }
    default: return g.kind() == s.kind() && g.int_value() == s.int_value();
  }
}

std::optional<Substitution> subsumes(const Term& general, const Term& specific) {
  std::vector<std::optional<Term>> env(general.var_bound());
  if (!match(general, specific, env)) return std::nullopt;
  Substitution s;
  for (uint32_t v = 0; v < env.size(); ++v)
    if (env[v]) s.emplace(v, *env[v]);
  return s;
}

Term Renamer::operator()(const Term& t0) {
  Term t = env_ ? env_->deref(t0) : t0;
  if (t0.is_var() && t.is_compound() && !t.ground()) {
    // A bound variable met again while its own binding is being copied.
    uint32_t v = t0.var_id();
    if (v >= expanding_.size()) expanding_.resize(v + 1, false);
    if (expanding_[v]) throw Error(ErrorKind::Type, "cyclic term");
    expanding_[v] = true;
    Term out = copy_compound(t);
    expanding_[v] = false;
    return out;
  }
  switch (t.kind()) {
    case TermKind::Var: {
      auto v = t.var_id();
      if (v >= map_.size()) {
        map_.resize(v + 1);
        mapped_.resize(v + 1, false);
      }
      if (!mapped_[v]) {
        mapped_[v] = true;
        map_[v] = next_++;
      }
      return Term::var(map_[v]);
    }
    case TermKind::Compound: return t.ground() ? t : copy_compound(t);
    default: return t;
  }
}

Term Renamer::copy_compound(const Term& t) {
  if (++depth_ > kMaxDepth) throw Error(ErrorKind::Type, "term nested too deeply");
  std::vector<Term> args;
  args.reserve(t.arity());
  for (const auto& a : t.args()) args.push_back((*this)(a));
  --depth_;
  return Term::compound(t.symbol(), std::move(args));
}

Term canonicalize(const Term& t) {
  Renamer r;
  return r(t);
}

Term offset_vars(const Term& t, uint32_t offset) {
  switch (t.kind()) {
    case TermKind::Var: return Term::var(t.var_id() + offset);
    case TermKind::Compound: {
      if (t.ground() || offset == 0) return t;
      std::vector<Term> args;
      args.reserve(t.arity());
      for (const auto& a : t.args()) args.push_back(offset_vars(a, offset));
      return Term::compound(t.symbol(), std::move(args));
    }
    default: return t;
  }
}

namespace {

int kind_rank(TermKind k) {
  switch (k) {
    case TermKind::Var: return 0;
    case TermKind::Int:
    case TermKind::Dec: return 1;
    case TermKind::Atom: return 2;
    case TermKind::Compound: return 3;
  }
  return 4;
}

// Numbers compare by value; on a tie a decimal sorts before an integer.
std::strong_ordering compare_numbers(const Term& a, const Term& b) {
  if (a.kind() == b.kind()) return a.int_value() <=> b.int_value();
  __int128 x = a.int_value(), y = b.int_value();
  if (a.is_int()) x *= kDecimalScale;
  if (b.is_int()) y *= kDecimalScale;
  if (x != y) return x < y ? std::strong_ordering::less : std::strong_ordering::greater;
  return a.is_dec() ? std::strong_ordering::less : std::strong_ordering::greater;
}

}  // namespace

std::strong_ordering compare_terms(const Term& a, const Term& b) {
  int ra = kind_rank(a.kind()), rb = kind_rank(b.kind());
  if (ra != rb) return ra <=> rb;
  switch (a.kind()) {
    case TermKind::Var: return a.var_id() <=> b.var_id();
    case TermKind::Int:
    case TermKind::Dec: return compare_numbers(a, b);
    case TermKind::Atom: {
      if (a.symbol() == b.symbol()) return std::strong_ordering::equal;
      return a.symbol().name().compare(b.symbol().name()) < 0 ? std::strong_ordering::less
                                                              : std::strong_ordering::greater;
    }
    case TermKind::Compound: {
      if (a.node() == b.node()) return std::strong_ordering::equal;
      if (a.arity() != b.arity()) return a.arity() <=> b.arity();
      if (a.symbol() != b.symbol())
        return a.symbol().name().compare(b.symbol().name()) < 0 ? std::strong_ordering::less
                                                                : std::strong_ordering::greater;
      for (size_t i = 0; i < a.arity(); ++i) {
        auto c = compare_terms(a.arg(i), b.arg(i));
        if (c != 0) return c;
      }
      return std::strong_ordering::equal;
    }
  }
  return std::strong_ordering::equal;
}

size_t symbol_count(const Term& t) {
  if (!t.is_compound()) return 1;
  size_t n = 1;
  for (const auto& a : t.args()) n += symbol_count(a);
  return n;
}

}  // namespace tlpe
