#include <algorithm>
#include <cstdlib>

#include "engine_impl.hpp"

namespace tlpe {

namespace {

struct Num {
  bool dec = false;
  int64_t v = 0;  // scaled by kDecimalScale when dec

  int64_t scaled() const { return dec ? v : v * kDecimalScale; }
  Term term() const { return dec ? Term::decimal_scaled(v) : Term::integer(v); }
};

[[noreturn]] void eval_error(const std::string& msg) { throw Error(ErrorKind::Evaluation, msg); }

int64_t require_int(const Num& n, const char* op) {
  if (n.dec) throw Error(ErrorKind::Type, std::string("integer expected in ") + op);
  return n.v;
}

Num make_dec(__int128 scaled) {
  if (scaled > INT64_MAX || scaled < INT64_MIN) eval_error("decimal overflow");
  return Num{true, static_cast<int64_t>(scaled)};
}

Num eval(const Term& t, const Bindings& env) {
  Term d = env.deref(t);
  switch (d.kind()) {
    case TermKind::Var: throw Error(ErrorKind::Instantiation, "arithmetic: unbound variable");
    case TermKind::Int: return Num{false, d.int_value()};
    case TermKind::Dec: return Num{true, d.int_value()};
    case TermKind::Atom: throw Error(ErrorKind::Type, "evaluable expected: " + format_term(d));
    case TermKind::Compound: break;
  }
  std::string_view op = d.symbol().name();
  if (d.arity() == 1) {
    Num a = eval(d.arg(0), env);
    if (op == "-") return Num{a.dec, -a.v};
    if (op == "+") return a;
    if (op == "abs") return Num{a.dec, a.v < 0 ? -a.v : a.v};
    if (op == "sign") return Num{a.dec, a.v > 0 ? (a.dec ? kDecimalScale : 1) : a.v < 0 ? (a.dec ? -kDecimalScale : -1) : 0};
    if (op == "truncate" || op == "integer" || op == "round" || op == "floor" || op == "ceiling") {
      if (!a.dec) return a;
      int64_t q = a.v / kDecimalScale, r = a.v % kDecimalScale;
      if (op == "round") {
        if (2 * std::abs(r) >= kDecimalScale) q += a.v < 0 ? -1 : 1;
      } else if (op == "floor") {
        if (r < 0) --q;
      } else if (op == "ceiling") {
        if (r > 0) ++q;
      }
      return Num{false, q};
    }
    eval_error("unknown function " + std::string(op) + "/1");
  }
  if (d.arity() != 2) eval_error("unknown function " + std::string(op) + "/" + std::to_string(d.arity()));
  Num a = eval(d.arg(0), env);
  Num b = eval(d.arg(1), env);
  bool dec = a.dec || b.dec;
  if (op == "+") return dec ? make_dec(__int128(a.scaled()) + b.scaled()) : Num{false, a.v + b.v};
  if (op == "-") return dec ? make_dec(__int128(a.scaled()) - b.scaled()) : Num{false, a.v - b.v};
  if (op == "*") return dec ? make_dec(__int128(a.scaled()) * b.scaled() / kDecimalScale) : Num{false, a.v * b.v};
  if (op == "/") {
    if (b.v == 0) eval_error("division by zero");
    if (!dec && a.v % b.v == 0) return Num{false, a.v / b.v};
    return make_dec(__int128(a.scaled()) * kDecimalScale / b.scaled());
  }
  if (op == "min") return (a.scaled() <= b.scaled()) ? a : b;
  if (op == "max") return (a.scaled() >= b.scaled()) ? a : b;
  int64_t x = require_int(a, std::string(op).c_str());
  int64_t y = require_int(b, std::string(op).c_str());
  if (op == "//") {
    if (y == 0) eval_error("division by zero");
    return Num{false, x / y};
  }
  if (op == "mod") {
    if (y == 0) eval_error("division by zero");
    int64_t m = x % y;
    if (m != 0 && ((m < 0) != (y < 0))) m += y;
    return Num{false, m};
  }
  if (op == "rem") {
    if (y == 0) eval_error("division by zero");
    return Num{false, x % y};
  }
  if (op == "**" || op == "^") {
    if (y < 0) eval_error("negative exponent");
    int64_t r = 1;
    for (int64_t i = 0; i < y; ++i) r *= x;
    return Num{false, r};
  }
  if (op == ">>") return Num{false, x >> y};
  if (op == "<<") return Num{false, x << y};
  if (op == "/\\") return Num{false, x & y};
  if (op == "\\/") return Num{false, x | y};
  if (op == "xor") return Num{false, x ^ y};
  eval_error("unknown function " + std::string(op) + "/2");
}

int compare_num(const Num& a, const Num& b) {
  int64_t x = a.scaled(), y = b.scaled();
  return x < y ? -1 : x > y ? 1 : 0;
}

bool list_items(const Term& t, std::vector<Term>& out) {
  Term cur = t;
  while (cur.is_cons()) {
    out.push_back(cur.arg(0));
    cur = cur.arg(1);
  }
  return cur.is_nil();
}

std::vector<Term> require_list(const Term& t, const char* what) {
  std::vector<Term> items;
  if (!list_items(t, items)) {
    if (t.is_var()) throw Error(ErrorKind::Instantiation, std::string(what) + ": unbound list");
    throw Error(ErrorKind::Type, std::string(what) + ": list expected, got " + format_term(t));
  }
  return items;
}

void flatten_into(const Term& t, std::vector<Term>& out) {
  if (t.is_nil()) return;
  if (t.is_cons()) {
    flatten_into(t.arg(0), out);
    flatten_into(t.arg(1), out);
    return;
  }
  out.push_back(t);
}

bool eq(const Term& a, const Term& b) { return compare_terms(a, b) == 0; }

Term sorted_set(std::vector<Term> items) {
  std::sort(items.begin(), items.end(), TermLess());
  items.erase(std::unique(items.begin(), items.end(), eq), items.end());
  return Term::list(items);
}

PredKey pred_indicator(const Term& t) {
  if (is_functor(t, "/", 2) && t.arg(0).is_atom() && t.arg(1).is_int())
    return PredKey{t.arg(0).symbol(), static_cast<uint32_t>(t.arg(1).int_value())};
  if (t.is_callable()) return pred_key_of(t);
  throw Error(ErrorKind::Type, "predicate indicator expected: " + format_term(t));
}

std::pair<Term, Term> split_clause(const Term& c) {
  if (is_functor(c, ":-", 2)) return {c.arg(0), c.arg(1)};
  return {c, Term::atom("true")};
}

using R = Engine::Impl::BuiltinResult;
using Handler = R (*)(Engine::Impl&, const Term&, Bindings&, uint32_t&);

R ok(bool b) { return b ? R::Success : R::Failure; }

bool u(Engine::Impl& e, const Term& a, const Term& b, Bindings& env) {
  return unify(a, b, env, e.cfg.occurs_check);
}

Term fresh_var(Bindings& env, uint32_t& nv) {
  env.reserve_vars(nv + 1);
  return Term::var(nv++);
}

R arith_compare(const Term& g, const Bindings& env, bool (*pred)(int)) {
  return ok(pred(compare_num(eval(g.arg(0), env), eval(g.arg(1), env))));
}

R order_compare(const Term& g, bool (*pred)(std::strong_ordering)) {
  return ok(pred(compare_terms(g.arg(0), g.arg(1))));
}

R do_functor(Engine::Impl& e, const Term& g, Bindings& env, uint32_t& nv) {
  const Term& t = g.arg(0);
  if (!t.is_var()) {
    Term name = t.is_compound() ? Term::atom(t.symbol()) : t;
    return ok(u(e, g.arg(1), name, env) && u(e, g.arg(2), Term::integer(static_cast<int64_t>(t.arity())), env));
  }
  const Term& name = g.arg(1);
  const Term& arity = g.arg(2);
  if (name.is_var() || arity.is_var()) throw Error(ErrorKind::Instantiation, "functor/3: insufficiently instantiated");
  if (!arity.is_int()) throw Error(ErrorKind::Type, "functor/3: integer arity expected");
  int64_t n = arity.int_value();
  if (n == 0) return ok(u(e, t, name, env));
  if (!name.is_atom()) throw Error(ErrorKind::Type, "functor/3: atom expected");
  std::vector<Term> args;
  for (int64_t i = 0; i < n; ++i) args.push_back(fresh_var(env, nv));
  return ok(u(e, t, Term::compound(name.symbol(), std::move(args)), env));
}

R do_arg(Engine::Impl& e, const Term& g, Bindings& env, uint32_t&) {
  const Term& n = g.arg(0);
  const Term& t = g.arg(1);
  if (!n.is_int()) throw Error(ErrorKind::Instantiation, "arg/3: integer index expected");
  if (!t.is_compound()) throw Error(ErrorKind::Type, "arg/3: compound expected");
  int64_t i = n.int_value();
  if (i < 1 || static_cast<size_t>(i) > t.arity()) return R::Failure;
  return ok(u(e, g.arg(2), t.arg(static_cast<size_t>(i - 1)), env));
}

R do_univ(Engine::Impl& e, const Term& g, Bindings& env, uint32_t&) {
  const Term& t = g.arg(0);
  if (!t.is_var()) {
    std::vector<Term> items;
    if (t.is_compound()) {
      items.push_back(Term::atom(t.symbol()));
      items.insert(items.end(), t.args().begin(), t.args().end());
    } else {
      items.push_back(t);
    }
    return ok(u(e, g.arg(1), Term::list(items), env));
  }
  std::vector<Term> items = require_list(g.arg(1), "=../2");
  if (items.empty()) throw Error(ErrorKind::Type, "=../2: nonempty list expected");
  if (items.size() == 1) return ok(u(e, t, items[0], env));
  if (!items[0].is_atom()) throw Error(ErrorKind::Type, "=../2: atom expected");
  Symbol f = items[0].symbol();
  items.erase(items.begin());
  return ok(u(e, t, Term::compound(f, std::move(items)), env));
}

R do_copy_term(Engine::Impl& e, const Term& g, Bindings& env, uint32_t& nv) {
  Term c = canonicalize(g.arg(0));
  Term copy = offset_vars(c, nv);
  nv += c.var_bound();
  env.reserve_vars(nv);
  return ok(u(e, g.arg(1), copy, env));
}

R do_length(Engine::Impl& e, const Term& g, Bindings& env, uint32_t& nv) {
  std::vector<Term> items;
  Term cur = g.arg(0);
  while (cur.is_cons()) {
    items.push_back(cur.arg(0));
    cur = cur.arg(1);
  }
  if (cur.is_nil()) return ok(u(e, g.arg(1), Term::integer(static_cast<int64_t>(items.size())), env));
  if (!cur.is_var()) return R::Failure;
  const Term& n = g.arg(1);
  if (!n.is_int()) throw Error(ErrorKind::Instantiation, "length/2: partial list with unbound length");
  int64_t want = n.int_value();
  if (want < static_cast<int64_t>(items.size())) return R::Failure;
  std::vector<Term> tail;
  for (int64_t i = static_cast<int64_t>(items.size()); i < want; ++i) tail.push_back(fresh_var(env, nv));
  return ok(u(e, cur, Term::list(tail), env));
}

R do_sort(Engine::Impl& e, const Term& g, Bindings& env, uint32_t&) {
  return ok(u(e, g.arg(1), sorted_set(require_list(g.arg(0), "sort/2")), env));
}

R do_msort(Engine::Impl& e, const Term& g, Bindings& env, uint32_t&) {
  auto items = require_list(g.arg(0), "msort/2");
  std::stable_sort(items.begin(), items.end(), TermLess());
  return ok(u(e, g.arg(1), Term::list(items), env));
}

R do_keysort(Engine::Impl& e, const Term& g, Bindings& env, uint32_t&) {
  auto items = require_list(g.arg(0), "keysort/2");
  for (const auto& p : items)
    if (!is_functor(p, "-", 2)) throw Error(ErrorKind::Type, "keysort/2: pair expected");
  std::stable_sort(items.begin(), items.end(),
                   [](const Term& a, const Term& b) { return compare_terms(a.arg(0), b.arg(0)) < 0; });
  return ok(u(e, g.arg(1), Term::list(items), env));
}

R do_flatten(Engine::Impl& e, const Term& g, Bindings& env, uint32_t&) {
  std::vector<Term> out;
  flatten_into(g.arg(0), out);
  return ok(u(e, g.arg(1), Term::list(out), env));
}

R do_ord_subset(Engine::Impl&, const Term& g, Bindings&, uint32_t&) {
  auto a = require_list(g.arg(0), "ord_subset/2");
  auto b = require_list(g.arg(1), "ord_subset/2");
  return ok(std::includes(b.begin(), b.end(), a.begin(), a.end(), TermLess()));
}

R do_ord_disjoint(Engine::Impl&, const Term& g, Bindings&, uint32_t&) {
  auto a = require_list(g.arg(0), "ord_disjoint/2");
  auto b = require_list(g.arg(1), "ord_disjoint/2");
  std::vector<Term> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common), TermLess());
  return ok(common.empty());
}

template <int Op>
R do_ord_setop(Engine::Impl& e, const Term& g, Bindings& env, uint32_t&) {
  auto a = require_list(g.arg(0), "ord set operation");
  auto b = require_list(g.arg(1), "ord set operation");
  std::vector<Term> out;
  if (Op == 0) std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out), TermLess());
  if (Op == 1) std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out), TermLess());
  if (Op == 2) std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out), TermLess());
  return ok(u(e, g.arg(2), Term::list(out), env));
}

R do_ord_memberchk(Engine::Impl&, const Term& g, Bindings&, uint32_t&) {
  auto items = require_list(g.arg(1), "ord_memberchk/2");
  return ok(std::binary_search(items.begin(), items.end(), g.arg(0), TermLess()));
}

R do_list_to_ord_set(Engine::Impl& e, const Term& g, Bindings& env, uint32_t&) {
  return ok(u(e, g.arg(1), sorted_set(require_list(g.arg(0), "list_to_ord_set/2")), env));
}

R do_sum_list(Engine::Impl& e, const Term& g, Bindings& env, uint32_t&) {
  Num acc;
  for (const auto& t : require_list(g.arg(0), "sum_list/2")) {
    Num x = eval(t, env);
    acc = (acc.dec || x.dec) ? make_dec(__int128(acc.scaled()) + x.scaled()) : Num{false, acc.v + x.v};
  }
  return ok(u(e, g.arg(1), acc.term(), env));
}

R do_assert(Engine::Impl& e, const Term& g, Bindings&, uint32_t&, ProgramStore::Position pos) {
  const Term& c = g.arg(0);
  if (c.is_var()) throw Error(ErrorKind::Instantiation, "assert/1: unbound clause");
  Clause cl = make_clause(c);
  e.program.assert_clause(cl, pos);
  e.note_fact_change(pred_key_of(cl.head));
  return R::Success;
}

R do_retract(Engine::Impl& e, const Term& g, Bindings& env, uint32_t& nv) {
  auto [head, body] = split_clause(g.arg(0));
  if (head.is_var()) throw Error(ErrorKind::Instantiation, "retract/1: unbound head");
  if (!head.is_callable()) throw Error(ErrorKind::Type, "retract/1: callable expected");
  PredKey key = pred_key_of(head);
  const PredicateInfo* info = e.program.find_info(key);
  if (info && !info->dynamic && e.program.clause_count(key) > 0)
    throw Error(ErrorKind::Permission, "retract/1: static procedure " + key.str());
  for (const auto& c : e.program.all_clauses(key)) {
    size_t mark = env.trail_size();
    Term h = offset_vars(c->head, nv);
    Term b = offset_vars(c->body, nv);
    env.reserve_vars(nv + c->nvars);
    if (u(e, head, h, env) && u(e, body, b, env)) {
      nv += c->nvars;
      e.program.erase_clause(c);
      e.note_fact_change(key);
      return R::Success;
    }
    env.undo_to(mark);
  }
  return R::Failure;
}

R do_retractall(Engine::Impl& e, const Term& g, Bindings& env, uint32_t& nv) {
  const Term& head = g.arg(0);
  if (head.is_var()) throw Error(ErrorKind::Instantiation, "retractall/1: unbound head");
  if (!head.is_callable()) throw Error(ErrorKind::Type, "retractall/1: callable expected");
  PredKey key = pred_key_of(head);
  PredicateInfo& info = e.program.info(key);
  if (!info.dynamic && e.program.clause_count(key) > 0)
    throw Error(ErrorKind::Permission, "retractall/1: static procedure " + key.str());
  info.dynamic = true;
  info.declared = true;
  bool changed = false;
  for (const auto& c : e.program.all_clauses(key)) {
    size_t mark = env.trail_size();
    env.reserve_vars(nv + c->nvars);
    if (u(e, head, offset_vars(c->head, nv), env)) {
      e.program.erase_clause(c);
      changed = true;
    }
    env.undo_to(mark);
  }
  if (changed) e.note_fact_change(key);
  return R::Success;
}

R do_abolish_all(Engine::Impl& e, const Term&, Bindings&, uint32_t&) {
  e.require_idle("abolish_all_tables/0");
  e.abolish_tables(e.tables.all_tables());
  return R::Success;
}

R do_abolish_pred(Engine::Impl& e, const Term& g, Bindings&, uint32_t&) {
  e.require_idle("abolish_table_pred/1");
  e.abolish_tables(e.tables.tables_of(pred_indicator(g.arg(0))));
  return R::Success;
}

R do_abolish_call(Engine::Impl& e, const Term& g, Bindings&, uint32_t&) {
  Table* t = e.tables.find_variant(g.arg(0));
  if (!t) throw Error(ErrorKind::TableAbsent, "no table for " + format_term(g.arg(0)));
  if (t->incomplete()) throw Error(ErrorKind::TableIncomplete, "cannot abolish incomplete table " + format_term(t->subgoal));
  e.abolish_tables({t});
  return R::Success;
}

R do_write(Engine::Impl& e, const Term& g, Bindings&, uint32_t&) {
  *e.out << format_term(g.arg(0));
  return R::Success;
}

R do_writeln(Engine::Impl& e, const Term& g, Bindings&, uint32_t&) {
  *e.out << format_term(g.arg(0)) << '\n';
  return R::Success;
}

R do_nl(Engine::Impl& e, const Term&, Bindings&, uint32_t&) {
  *e.out << '\n';
  return R::Success;
}

Change change_of(const Term& g, ChangeKind kind) {
  if (g.arg(0).is_var()) throw Error(ErrorKind::Instantiation, "incremental update: unbound fact");
  return Change{kind, g.arg(0)};
}

const std::unordered_map<PredKey, Handler, PredKeyHash>& handlers() {
  static const auto table = [] {
    std::unordered_map<PredKey, Handler, PredKeyHash> m;
    auto add = [&](std::string_view name, uint32_t arity, Handler h) { m[PredKey{Symbol::intern(name), arity}] = h; };
    add("=", 2, [](Engine::Impl& e, const Term& g, Bindings& env, uint32_t&) { return ok(u(e, g.arg(0), g.arg(1), env)); });
    add("\\=", 2, [](Engine::Impl& e, const Term& g, Bindings&, uint32_t&) {
      Bindings scratch;
      return ok(!unify(g.arg(0), g.arg(1), scratch, e.cfg.occurs_check));
    });
    add("==", 2, [](Engine::Impl&, const Term& g, Bindings&, uint32_t&) { return ok(g.arg(0) == g.arg(1)); });
    add("\\==", 2, [](Engine::Impl&, const Term& g, Bindings&, uint32_t&) { return ok(g.arg(0) != g.arg(1)); });
    add("@<", 2, [](Engine::Impl&, const Term& g, Bindings&, uint32_t&) { return order_compare(g, [](std::strong_ordering o) { return o < 0; }); });
    add("@>", 2, [](Engine::Impl&, const Term& g, Bindings&, uint32_t&) { return order_compare(g, [](std::strong_ordering o) { return o > 0; }); });
    add("@=<", 2, [](Engine::Impl&, const Term& g, Bindings&, uint32_t&) { return order_compare(g, [](std::strong_ordering o) { return o <= 0; }); });
    add("@>=", 2, [](Engine::Impl&, const Term& g, Bindings&, uint32_t&) { return order_compare(g, [](std::strong_ordering o) { return o >= 0; }); });
    add("compare", 3, [](Engine::Impl& e, const Term& g, Bindings& env, uint32_t&) {
      auto o = compare_terms(g.arg(1), g.arg(2));
      return ok(u(e, g.arg(0), Term::atom(o < 0 ? "<" : o > 0 ? ">" : "="), env));
    });
    add("is", 2, [](Engine::Impl& e, const Term& g, Bindings& env, uint32_t&) {
      return ok(u(e, g.arg(0), eval(g.arg(1), env).term(), env));
    });
    add("=:=", 2, [](Engine::Impl&, const Term& g, Bindings& env, uint32_t&) { return arith_compare(g, env, [](int c) { return c == 0; }); });
    add("=\\=", 2, [](Engine::Impl&, const Term& g, Bindings& env, uint32_t&) { return arith_compare(g, env, [](int c) { return c != 0; }); });
    add("<", 2, [](Engine::Impl&, const Term& g, Bindings& env, uint32_t&) { return arith_compare(g, env, [](int c) { return c < 0; }); });
    add(">", 2, [](Engine::Impl&, const Term& g, Bindings& env, uint32_t&) { return arith_compare(g, env, [](int c) { return c > 0; }); });
    add("=<", 2, [](Engine::Impl&, const Term& g, Bindings& env, uint32_t&) { return arith_compare(g, env, [](int c) { return c <= 0; }); });
    add(">=", 2, [](Engine::Impl&, const Term& g, Bindings& env, uint32_t&) { return arith_compare(g, env, [](int c) { return c >= 0; }); });
    add("var", 1, [](Engine::Impl&, const Term& g, Bindings&, uint32_t&) { return ok(g.arg(0).is_var()); });
    add("nonvar", 1, [](Engine::Impl&, const Term& g, Bindings&, uint32_t&) { return ok(!g.arg(0).is_var()); });
    add("atom", 1, [](Engine::Impl&, const Term& g, Bindings&, uint32_t&) { return ok(g.arg(0).is_atom()); });
    add("number", 1, [](Engine::Impl&, const Term& g, Bindings&, uint32_t&) { return ok(g.arg(0).is_number()); });
    add("integer", 1, [](Engine::Impl&, const Term& g, Bindings&, uint32_t&) { return ok(g.arg(0).is_int()); });
    add("atomic", 1, [](Engine::Impl&, const Term& g, Bindings&, uint32_t&) { return ok(g.arg(0).is_atomic()); });
    add("compound", 1, [](Engine::Impl&, const Term& g, Bindings&, uint32_t&) { return ok(g.arg(0).is_compound()); });
    add("callable", 1, [](Engine::Impl&, const Term& g, Bindings&, uint32_t&) { return ok(g.arg(0).is_callable()); });
    add("ground", 1, [](Engine::Impl&, const Term& g, Bindings&, uint32_t&) { return ok(g.arg(0).ground()); });
    add("is_list", 1, [](Engine::Impl&, const Term& g, Bindings&, uint32_t&) {
      std::vector<Term> items;
      return ok(list_items(g.arg(0), items));
    });
    add("functor", 3, do_functor);
    add("arg", 3, do_arg);
    add("=..", 2, do_univ);
    add("copy_term", 2, do_copy_term);
    add("length", 2, do_length);
    add("sort", 2, do_sort);
    add("msort", 2, do_msort);
    add("keysort", 2, do_keysort);
    add("flatten", 2, do_flatten);
    add("ord_subset", 2, do_ord_subset);
    add("ord_disjoint", 2, do_ord_disjoint);
    add("ord_subtract", 3, do_ord_setop<0>);
    add("ord_union", 3, do_ord_setop<1>);
    add("ord_intersection", 3, do_ord_setop<2>);
    add("ord_memberchk", 2, do_ord_memberchk);
    add("list_to_ord_set", 2, do_list_to_ord_set);
    add("sum_list", 2, do_sum_list);
    add("assert", 1, [](Engine::Impl& e, const Term& g, Bindings& env, uint32_t& nv) {
      return do_assert(e, g, env, nv, ProgramStore::Position::Back);
    });
    add("assertz", 1, [](Engine::Impl& e, const Term& g, Bindings& env, uint32_t& nv) {
      return do_assert(e, g, env, nv, ProgramStore::Position::Back);
    });
    add("asserta", 1, [](Engine::Impl& e, const Term& g, Bindings& env, uint32_t& nv) {
      return do_assert(e, g, env, nv, ProgramStore::Position::Front);
    });
    add("retract", 1, do_retract);
    add("retractall", 1, do_retractall);
    add("abolish_all_tables", 0, do_abolish_all);
    add("abolish_table_pred", 1, do_abolish_pred);
    add("abolish_table_call", 1, do_abolish_call);
    add("write", 1, do_write);
    add("print", 1, do_write);
    add("writeln", 1, do_writeln);
    add("nl", 0, do_nl);
    add("incr_assert", 1, [](Engine::Impl& e, const Term& g, Bindings&, uint32_t&) {
      e.do_incr_update(change_of(g, ChangeKind::Assert));
      return R::Success;
    });
    add("incr_retract", 1, [](Engine::Impl& e, const Term& g, Bindings&, uint32_t&) {
      e.do_incr_update(change_of(g, ChangeKind::Retract));
      return R::Success;
    });
    add("incr_assert_inval", 1, [](Engine::Impl& e, const Term& g, Bindings&, uint32_t&) {
      e.do_incr_invalidate(change_of(g, ChangeKind::Assert));
      return R::Success;
    });
    add("incr_retract_inval", 1, [](Engine::Impl& e, const Term& g, Bindings&, uint32_t&) {
      e.do_incr_invalidate(change_of(g, ChangeKind::Retract));
      return R::Success;
    });
    add("incr_table_update", 0, [](Engine::Impl& e, const Term&, Bindings&, uint32_t&) {
      e.do_incr_table_update();
      return R::Success;
    });
    return m;
  }();
  return table;
}

}  // namespace

Engine::Impl::BuiltinResult Engine::Impl::builtin(const Term& goal, Bindings& env, uint32_t& nvars) {
  const auto& hs = handlers();
  auto it = hs.find(pred_key_of(goal));
  if (it == hs.end()) return BuiltinResult::NotBuiltin;
  return it->second(*this, goal, env, nvars);
}

Term Engine::Impl::eval_arith(const Term& t, const Bindings& env) { return eval(t, env).term(); }

bool is_builtin(PredKey key) { return handlers().count(key) > 0; }

}  // namespace tlpe
