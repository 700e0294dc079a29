#include <algorithm>

#include "engine_impl.hpp"

namespace tlpe {

namespace {

bool chain_contains(const Scope* s, const Scope* target) {
  for (; s; s = s->parent.get())
    if (s == target) return true;
  return false;
}

Term with_extra_args(const Term& g, std::span<const Term> extra) {
  if (extra.empty()) return g;
  if (g.is_atom()) return Term::compound(g.symbol(), std::vector<Term>(extra.begin(), extra.end()));
  if (!g.is_compound()) throw Error(ErrorKind::Type, "callable expected: " + format_term(g));
  std::vector<Term> args(g.args().begin(), g.args().end());
  args.insert(args.end(), extra.begin(), extra.end());
  return Term::compound(g.symbol(), std::move(args));
}

}  // namespace

ScopePtr Engine::Impl::new_scope(const ScopePtr& parent) {
  auto s = std::make_shared<Scope>();
  s->serial = ++scope_counter;
  s->depth = parent ? parent->depth + 1 : 0;
  s->parent = parent;
  return s;
}

bool Engine::Impl::alive(const Node& n) {
  if (n.cut_epoch == cuts) return true;
  for (const Scope* s = n.scope.get(); s; s = s->parent.get())
    if (s->cut) return false;
  n.cut_epoch = cuts;
  return true;
}

void Engine::Impl::do_cut(Node& n, uint64_t serial) {
  Scope* target = nullptr;
  for (Scope* s = n.scope.get(); s; s = s->parent.get()) {
    if (s->serial == serial) {
      target = s;
      break;
    }
  }
  if (!target) return;
  for (const TCall* c = n.tcalls.get(); c; c = c->next.get()) {
    if (c->table->incomplete() && chain_contains(c->scope.get(), target))
      throw Error(ErrorKind::CutOverIncompleteTable,
                  "cut would discard a consumer of incomplete table " + format_term(c->table->subgoal));
  }
  std::vector<const TCall*> keep;
  for (const TCall* c = n.tcalls.get(); c; c = c->next.get())
    if (!chain_contains(c->scope.get(), target)) keep.push_back(c);
  TCalls rebuilt;
  for (auto it = keep.rbegin(); it != keep.rend(); ++it)
    rebuilt = std::make_shared<const TCall>(TCall{(*it)->table, (*it)->scope, rebuilt});
  n.tcalls = std::move(rebuilt);

  target->cut = true;
  ++cuts;
  auto fresh = std::make_shared<Scope>();
  fresh->serial = target->serial;
  fresh->depth = target->depth;
  fresh->parent = target->parent;
  n.scope = std::move(fresh);
  n.cut_epoch = cuts;
}

void Engine::Impl::exit_scope(Node& n, uint64_t serial) {
  for (const Scope* s = n.scope.get(); s; s = s->parent.get()) {
    if (s->serial == serial) {
      n.scope = s->parent;
      return;
    }
  }
}

Node Engine::Impl::renamed(const Node& base, const Bindings* env, const Term& head, Goals goals, DelayList delays) {
  Node n;
  n.owner = base.owner;
  n.scope = base.scope;
  n.cut_epoch = base.cut_epoch;
  n.tcalls = base.tcalls;
  n.k = ++counters.nodes;
  Renamer r(env);
  n.head = r(head);
  std::vector<Term> gs;
  for (const GoalCell* c = goals.get(); c; c = c->next.get()) gs.push_back(r(c->goal));
  for (auto it = gs.rbegin(); it != gs.rend(); ++it) n.goals = push_goal(std::move(*it), std::move(n.goals));
  n.delays = std::move(delays);
  n.nvars = r.count();
  return n;
}

NodePtr Engine::Impl::make_node(const Node& base, const Bindings* env, const Term& head, Goals goals,
                                DelayList delays) {
  return std::make_shared<const Node>(renamed(base, env, head, std::move(goals), std::move(delays)));
}

void Engine::Impl::ite(Node& n, const Term& cond, const Term& then, const Term& otherwise, Goals rest) {
  ScopePtr s = new_scope(n.scope);
  Node alt = n;
  alt.scope = s;
  alt.goals = push_goal(otherwise, rest);
  push_node(std::make_shared<const Node>(std::move(alt)));
  n.scope = s;
  Term mark = Term::compound(sym.ite, {Term::integer(static_cast<int64_t>(s->serial))});
  n.goals = push_goal(cond, push_goal(mark, push_goal(then, std::move(rest))));
}

void Engine::Impl::resume(Node n) {
  while (true) {
    if (!alive(n)) return;
    if (!n.goals) {
      handle_answer(n);
      return;
    }
    Term g = n.goals->goal;
    Goals rest = n.goals->next;
    if (g.is_var()) throw Error(ErrorKind::Instantiation, "unbound goal");
    if (!g.is_callable()) throw Error(ErrorKind::Type, "callable expected: " + format_term(g));
    Symbol f = g.symbol();
    size_t ar = g.arity();

    if (ar == 2 && f == sym.comma) {
      n.goals = push_goal(g.arg(0), push_goal(g.arg(1), rest));
      continue;
    }
    if (ar == 0 && (f == sym.true_ || f == sym.cut)) {
      n.goals = rest;
      continue;
    }
    if (ar == 0 && (f == sym.fail || f == sym.false_)) return;
    if (ar == 1 && (f == sym.cut_to || f == sym.exit || f == sym.ite) && g.arg(0).is_int()) {
      auto serial = static_cast<uint64_t>(g.arg(0).int_value());
      if (f != sym.exit) do_cut(n, serial);
      if (f != sym.cut_to) exit_scope(n, serial);
      n.goals = rest;
      continue;
    }
    if (ar == 2 && f == sym.semicolon) {
      const Term& a = g.arg(0);
      if (a.is_compound() && a.arity() == 2 && (a.symbol() == sym.arrow || a.symbol() == sym.soft_arrow)) {
        ite(n, a.arg(0), a.arg(1), g.arg(1), rest);
        continue;
      }
      Node alt = n;
      alt.goals = push_goal(g.arg(1), rest);
      push_node(std::make_shared<const Node>(std::move(alt)));
      n.goals = push_goal(a, rest);
      continue;
    }
    if (ar == 2 && (f == sym.arrow || f == sym.soft_arrow)) {
      ite(n, g.arg(0), g.arg(1), Term::atom(sym.fail), rest);
      continue;
    }
    if (ar == 1 && (f == sym.naf || f == sym.not_)) {
      ite(n, Term::compound(sym.call, {g.arg(0)}), Term::atom(sym.fail), Term::atom(sym.true_), rest);
      continue;
    }
    if (ar == 1 && f == sym.once) {
      ite(n, Term::compound(sym.call, {g.arg(0)}), Term::atom(sym.true_), Term::atom(sym.fail), rest);
      continue;
    }
    if (ar == 1 && f == sym.ignore) {
      ite(n, Term::compound(sym.call, {g.arg(0)}), Term::atom(sym.true_), Term::atom(sym.true_), rest);
      continue;
    }
    if (ar == 2 && f == sym.forall) {
      Term inner = Term::compound(sym.naf, {g.arg(1)});
      Term body = Term::compound(sym.comma, {g.arg(0), inner});
      n.goals = push_goal(Term::compound(sym.naf, {body}), rest);
      continue;
    }
    if (ar >= 1 && f == sym.call) {
      Term target = g.arg(0);
      if (target.is_var()) throw Error(ErrorKind::Instantiation, "call/N: unbound goal");
      target = with_extra_args(target, g.args().subspan(1));
      ScopePtr s = new_scope(n.scope);
      bool has_cut = false;
      Term body = prepare_body(target, Term::integer(static_cast<int64_t>(s->serial)), has_cut);
      if (has_cut) {
        n.scope = s;
        Term mark = Term::compound(sym.exit, {Term::integer(static_cast<int64_t>(s->serial))});
        n.goals = push_goal(body, push_goal(mark, rest));
      } else {
        n.goals = push_goal(body, rest);
      }
      continue;
    }
    if (ar == 1 && f == sym.tnot) {
      if (negative_call(n, g.arg(0), rest) == Flow::Stop) return;
      continue;
    }
    if (ar == 3 && f == sym.findall) {
      if (call_findall(n, g, rest) == Flow::Stop) return;
      continue;
    }
    if (ar == 2 && f == sym.get_residual) {
      n.goals = push_goal(residual_disjunction(g.arg(0), g.arg(1), n.nvars), rest);
      continue;
    }

    Bindings env(n.nvars);
    uint32_t nv = n.nvars;
    BuiltinResult br = builtin(g, env, nv);
    if (br == BuiltinResult::Failure) return;
    if (br == BuiltinResult::Success) {
      n = renamed(n, &env, n.head, rest, std::move(n.delays));
      continue;
    }

    PredKey key = pred_key_of(g);
    const PredicateInfo* info = program.find_info(key);
    if (info && info->tabled) {
      tabled_call(n, g, *info);
      return;
    }
    if (call_user(n, g, rest, info) == Flow::Stop) return;
  }
}

Flow Engine::Impl::call_user(Node& n, const Term& goal, Goals rest, const PredicateInfo* info) {
  PredKey key = pred_key_of(goal);
  Lookup lk = program.lookup_clauses(goal);
  if (info && info->incremental_dynamic) record_dynamic_dep(n.owner, key);
  if (lk.clauses.empty()) {
    if (!program.is_defined(key) && !(info && (info->declared || info->dynamic)))
      throw Error(ErrorKind::Existence, "unknown procedure " + key.str());
    return Flow::Stop;
  }
  bool any_cut = std::any_of(lk.clauses.begin(), lk.clauses.end(), [](const ClauseRef& c) { return c->has_cut; });
  if (lk.clauses.size() == 1 && !any_cut) {
    const Clause& c = *lk.clauses.front();
    Bindings env(n.nvars + c.nvars);
    if (!unify(goal, offset_vars(c.head, n.nvars), env, cfg.occurs_check)) return Flow::Stop;
    Goals goals = rest;
    if (!c.is_fact()) goals = push_goal(offset_vars(c.body, n.nvars), std::move(goals));
    n = renamed(n, &env, n.head, std::move(goals), std::move(n.delays));
    return Flow::Continue;
  }
  auto gen = std::make_shared<ClauseGen>();
  gen->call = goal;
  gen->clauses = std::move(lk.clauses);
  gen->scope = new_scope(n.scope);
  gen->node = std::make_shared<const Node>(std::move(n));
  push_gen(std::move(gen));
  return Flow::Stop;
}

void Engine::Impl::exec_gen(ClauseGen& g, const std::shared_ptr<ClauseGen>& self) {
  if (g.scope && g.scope->cut) return;
  const Node& n = *g.node;
  if (!alive(n)) return;
  Goals rest = n.goals->next;
  while (g.next < g.clauses.size()) {
    const Clause& c = *g.clauses[g.next++];
    Bindings env(n.nvars + c.nvars);
    if (!unify(g.call, offset_vars(c.head, n.nvars), env, cfg.occurs_check)) continue;
    if (g.next < g.clauses.size()) push_gen(self);
    if (c.has_cut) env.bind(n.nvars, Term::integer(static_cast<int64_t>(g.scope->serial)));
    Goals goals = rest;
    if (g.scope && !g.table)
      goals = push_goal(Term::compound(sym.exit, {Term::integer(static_cast<int64_t>(g.scope->serial))}), goals);
    if (!c.is_fact()) goals = push_goal(offset_vars(c.body, n.nvars), std::move(goals));
    Node base = n;
    if (g.scope) base.scope = g.scope;
    Node child = renamed(base, &env, n.head, std::move(goals), n.delays);
    if (g.table) report(StepOp::ProgramClauseResolution, g.table->subgoal, child.k);
    resume(std::move(child));
    return;
  }
}

void Engine::Impl::generate(Table* t) {
  Node root;
  root.owner = t;
  root.head = make_tuple(sym.v, t->subgoal_vars);
  root.goals = push_goal(t->subgoal, nullptr);
  root.nvars = t->subgoal_vars;
  root.k = ++counters.nodes;
  root.cut_epoch = cuts;
  auto gen = std::make_shared<ClauseGen>();
  gen->call = t->subgoal;
  gen->table = t;
  Lookup lk = program.lookup_clauses(t->subgoal);
  gen->clauses = std::move(lk.clauses);
  if (std::any_of(gen->clauses.begin(), gen->clauses.end(), [](const ClauseRef& c) { return c->has_cut; }))
    gen->scope = new_scope(nullptr);
  if (const PredicateInfo* info = program.find_info(t->pred); info && info->incremental_dynamic)
    record_dynamic_dep(t, t->pred);
  gen->node = std::make_shared<const Node>(std::move(root));
  if (!gen->clauses.empty()) push_gen(std::move(gen));
}

Table* Engine::Impl::recompute_if_invalid(Table* t) {
  if (!t || t->status != TableStatus::Invalidated) return t;
  PredKey pred = t->pred;
  abolish_tables({t});
  ++recompute_counts[pred];
  ++counters.recomputations;
  return nullptr;
}

void Engine::Impl::tabled_call(Node& n, const Term& goal, const PredicateInfo& info) {
  TablingMode mode = mode_of(info);
  Term canonical = canonicalize(lookup_term(goal, info, n.nvars));
  Table* existing = mode == TablingMode::Subsumptive ? tables.find_subsuming(canonical) : tables.find_variant(canonical);
  recompute_if_invalid(existing);
  SubgoalLookup lk = tables.check_insert_subgoal(canonical, mode);
  Table* t = lk.table;
  if (lk.is_new) {
    init_table(t, false);
    if (info.answer_subsumption) t->aspec = &*info.answer_subsumption;
  }
  Table* owner = n.owner;
  if (!owner->pseudo) {
    owner->consumed.insert(t);
    t->consumed_by.insert(owner);
  }
  add_edge(owner, t, false);

  auto c = std::make_shared<Consumer>();
  c->call = goal;
  c->table = t;
  c->node = std::make_shared<const Node>(std::move(n));
  if (t->incomplete()) t->consumers.push_back(c);
  if (lk.is_new)
    generate(t);
  else
    schedule_consumer(c);
}

void Engine::Impl::exec_consumer(const std::shared_ptr<Consumer>& c) {
  c->scheduled = false;
  if (c->dead) return;
  const Node& n = *c->node;
  if (!alive(n)) {
    c->dead = true;
    return;
  }
  Table* t = c->table;
  while (c->cursor < t->answers.size()) {
    const Answer* a = t->answers[c->cursor++].get();
    if (!a->live()) continue;
    Bindings env(n.nvars + a->atom.var_bound());
    if (!unify(c->call, offset_vars(a->atom, n.nvars), env, cfg.occurs_check)) continue;
    schedule_consumer(c);
    ++counters.positive_returns;
    if (t->incomplete() && n.owner != t) ++t->returned_to[n.owner];
    DelayList d = n.delays;
    if (a->status == AnswerStatus::Conditional) {
      d.push_back(DelayLiteral{false, t, a->id});
      normalize_delays(d);
    }
    Node base = n;
    if (t->incomplete() && n.scope)
      base.tcalls = std::make_shared<const TCall>(TCall{t, n.scope, n.tcalls});
    Node child = renamed(base, &env, n.head, n.goals->next, std::move(d));
    report(StepOp::PositiveReturn, t->subgoal, child.k);
    resume(std::move(child));
    return;
  }
}

Flow Engine::Impl::negative_call(Node& n, const Term& goal, Goals rest) {
  if (goal.is_var()) throw Error(ErrorKind::Instantiation, "tnot/1: unbound goal");
  if (!goal.ground()) throw Error(ErrorKind::Floundering, "nonground negative literal tnot(" + format_term(goal) + ")");
  if (!goal.is_callable()) throw Error(ErrorKind::Type, "callable expected: " + format_term(goal));
  const PredicateInfo* info = program.find_info(pred_key_of(goal));
  if (!info || !info->tabled) throw Error(ErrorKind::NotTabled, "tnot/1 of non-tabled " + pred_key_of(goal).str());
  Table* x = recompute_if_invalid(tables.find_variant(goal));
  bool fresh = false;
  if (!x) {
    SubgoalLookup lk = tables.check_insert_subgoal(goal, TablingMode::Variant);
    x = lk.table;
    if (lk.is_new) {
      init_table(x, false);
      if (info->answer_subsumption) x->aspec = &*info->answer_subsumption;
      fresh = true;
    }
  }
  Table* owner = n.owner;
  if (!owner->pseudo) {
    owner->consumed.insert(x);
    x->consumed_by.insert(owner);
  }
  if (x->complete()) {
    if (x->live_answers == 0) {
      n.goals = rest;
      report(StepOp::NegativeReturn, x->subgoal, n.k);
      return Flow::Continue;
    }
    if (x->has_unconditional()) return Flow::Stop;
    DelayList d = n.delays;
    d.push_back(DelayLiteral{true, x, 0});
    normalize_delays(d);
    n.delays = std::move(d);
    n.goals = rest;
    ++counters.delays;
    report(StepOp::Delaying, Term::compound(sym.tnot, {x->subgoal}), n.k);
    return Flow::Continue;
  }
  if (x->has_unconditional()) return Flow::Stop;
  add_edge(owner, x, true);
  auto w = std::make_shared<NegWaiter>();
  w->target = x;
  w->node = std::make_shared<const Node>(std::move(n));
  x->neg_waiters.push_back(std::move(w));
  if (fresh) generate(x);
  return Flow::Stop;
}

void Engine::Impl::exec_neg_return(const std::shared_ptr<NegWaiter>& w) {
  if (w->done) return;
  w->done = true;
  const Node& n = *w->node;
  if (!alive(n)) return;
  Table* x = w->target;
  if (x->has_unconditional()) return;
  DelayList d = n.delays;
  StepOp op = StepOp::NegativeReturn;
  if (x->live_answers > 0) {
    d.push_back(DelayLiteral{true, x, 0});
    normalize_delays(d);
    ++counters.delays;
    op = StepOp::Delaying;
  }
  Node child = renamed(n, nullptr, n.head, n.goals->next, std::move(d));
  report(op, op == StepOp::Delaying ? Term::compound(sym.tnot, {x->subgoal}) : x->subgoal, child.k);
  resume(std::move(child));
}

bool Engine::Impl::pre_simplify(DelayList& d) const {
  DelayList out;
  out.reserve(d.size());
  for (const auto& l : d) {
    if (l.negative) {
      if (l.table->complete() && l.table->live_answers == 0) continue;
      if (l.table->has_unconditional()) return false;
    } else {
      const Answer* a = l.table->answers[l.answer].get();
      if (!a->live()) return false;
      if (a->status == AnswerStatus::Unconditional) continue;
    }
    out.push_back(l);
  }
  d = std::move(out);
  return true;
}

void Engine::Impl::handle_answer(const Node& n) {
  Table* t = n.owner;
  DelayList d = n.delays;
  if (!pre_simplify(d)) return;
  Renamer r;
  std::vector<Term> bindings;
  bindings.reserve(n.head.arity());
  for (const auto& a : n.head.args()) bindings.push_back(r(a));
  if (t->aspec) {
    if (!d.empty())
      throw Error(ErrorKind::AnswerSubsumption, "conditional answer for " + format_term(t->subgoal) +
                                                    " under answer subsumption; negation must be stratified");
    reduce_answer(t, std::move(bindings), n.k);
    return;
  }
  Answer* a = nullptr;
  AddResult res = tables.add_answer(t, std::move(bindings), d, &a);
  switch (res) {
    case AddResult::Added:
      if (!t->pseudo) report(StepOp::Answer, a->atom, n.k);
      if (a->status == AnswerStatus::Conditional)
        register_hosts(t, a, d);
      else
        on_unconditional(t, a);
      notify_consumers(t);
      process_events();
      break;
    case AddResult::Upgraded:
      on_unconditional(t, a);
      process_events();
      break;
    case AddResult::DelayAdded:
      register_hosts(t, a, d);
      break;
    default:
      break;
  }
}

void Engine::Impl::record_dynamic_dep(Table* owner, PredKey pred) {
  if (!owner || owner->pseudo) return;
  if (owner->dynamic_deps.insert(pred).second) dyn_dependents[pred].insert(owner);
}

Flow Engine::Impl::call_findall(Node& n, const Term& goal, Goals rest) {
  std::vector<Term> results = nested_solve(goal.arg(0), goal.arg(1));
  uint32_t nv = n.nvars;
  std::vector<Term> items;
  items.reserve(results.size());
  for (const auto& r : results) {
    items.push_back(offset_vars(r, nv));
    nv += r.var_bound();
  }
  Bindings env(nv);
  if (!unify(goal.arg(2), Term::list(items), env, cfg.occurs_check)) return Flow::Stop;
  n = renamed(n, &env, n.head, std::move(rest), std::move(n.delays));
  return Flow::Continue;
}

std::vector<Term> Engine::Impl::nested_solve(const Term& templ, const Term& goal) {
  Renamer r;
  Term t2 = r(templ);
  Term g2 = r(goal);
  Table* p = tables.create_pseudo(Term::compound("$findall", {Term::var(0)}), true);
  Node root;
  root.owner = p;
  root.head = Term::compound(sym.v, {t2});
  root.goals = push_goal(g2, nullptr);
  root.nvars = r.count();
  root.k = ++counters.nodes;
  root.cut_epoch = cuts;
  size_t base = stack.size();
  size_t frames_base = frames.size();
  uint32_t saved_run = current_run;
  current_run = ++run_id;
  init_table(p, true);
  push_node(std::make_shared<const Node>(std::move(root)));
  run(base, frames_base);
  current_run = saved_run;
  std::vector<Term> out;
  out.reserve(p->answers.size());
  for (const auto& a : p->answers)
    if (a->live()) out.push_back(a->bindings.front());
  detach_hosts(p);
  tables.remove_pseudo(p);
  return out;
}

Term Engine::Impl::residual_disjunction(const Term& goal, const Term& delays, uint32_t& nvars) {
  if (goal.is_var()) throw Error(ErrorKind::Instantiation, "get_residual/2: unbound goal");
  Table* t = tables.find_variant(goal);
  if (!t) t = tables.find_subsuming(goal);
  if (!t) throw Error(ErrorKind::TableAbsent, "no table for " + format_term(goal));
  if (!t->complete()) throw Error(ErrorKind::TableIncomplete, "table incomplete: " + format_term(goal));
  auto clauses = residual_of(t, &goal);
  Term pair = Term::compound("$r", {goal, delays});
  Term out = Term::atom(sym.fail);
  for (auto it = clauses.rbegin(); it != clauses.rend(); ++it) {
    Term stored = canonicalize(Term::compound("$r", {it->head, Term::list(it->body)}));
    Term eq = Term::compound(sym.eq, {pair, offset_vars(stored, nvars)});
    nvars += stored.var_bound();
    out = out.is_atom() && out.symbol() == sym.fail ? eq : Term::compound(sym.semicolon, {eq, out});
  }
  return out;
}

}  // namespace tlpe
