#include "tlpe/engine.hpp"

#include <fstream>
#include <sstream>

#include "engine_impl.hpp"

namespace tlpe {

namespace {

constexpr std::string_view kPrelude = R"(
member(X, [X|_]).
member(X, [_|T]) :- member(X, T).
memberchk(X, L) :- member(X, L), !.
append([], L, L).
append([H|T], L, [H|R]) :- append(T, L, R).
reverse(L, R) :- '$reverse'(L, [], R).
'$reverse'([], A, A).
'$reverse'([H|T], A, R) :- '$reverse'(T, [H|A], R).
select(X, [X|T], T).
select(X, [H|T], [H|R]) :- select(X, T, R).
last([X], X).
last([_|T], X) :- last(T, X).
between(L, H, L) :- L =< H.
between(L, H, X) :- L < H, L1 is L + 1, between(L1, H, X).
nth0(I, L, E) :- '$nth'(L, 0, I, E).
nth1(I, L, E) :- '$nth'(L, 1, I, E).
'$nth'([H|_], B, B, H).
'$nth'([_|T], B, I, E) :- B1 is B + 1, '$nth'(T, B1, I, E).
)";

}  // namespace

Term make_tuple(Symbol name, uint32_t nvars) {
  if (nvars == 0) return Term::atom(name);
  std::vector<Term> vars;
  vars.reserve(nvars);
  for (uint32_t i = 0; i < nvars; ++i) vars.push_back(Term::var(i));
  return Term::compound(name, std::move(vars));
}

const char* step_op_name(StepOp op) {
  switch (op) {
    case StepOp::NewSubgoal: return "NEW_SUBGOAL";
    case StepOp::ProgramClauseResolution: return "PROGRAM_CLAUSE_RESOLUTION";
    case StepOp::PositiveReturn: return "POSITIVE_RETURN";
    case StepOp::NegativeReturn: return "NEGATIVE_RETURN";
    case StepOp::Delaying: return "DELAYING";
    case StepOp::Simplification: return "SIMPLIFICATION";
    case StepOp::Completion: return "COMPLETION";
    case StepOp::Answer: return "ANSWER";
  }
  return "?";
}

std::string StepReport::str() const {
  return std::string("OP ") + step_op_name(op) + " " + subgoal + " K=" + std::to_string(k);
}

std::string ResidualClause::str() const {
  std::string s = format_term(head);
  if (!body.empty()) {
    s += " :- ";
    for (size_t i = 0; i < body.size(); ++i) {
      if (i) s += ", ";
      s += format_term(body[i]);
    }
  }
  return s + ".";
}

std::string format_truth(Truth t) {
  switch (t) {
    case Truth::True: return "true";
    case Truth::False: return "false";
    case Truth::Undefined: return "undefined";
  }
  return "?";
}

std::string format_solution(const Solution& s) {
  std::string out;
  for (const auto& [name, value] : s.bindings) {
    if (name.empty() || name[0] == '_') continue;
    if (!out.empty()) out += ", ";
    out += name + " = " + format_term(value);
  }
  if (out.empty()) return s.truth == Truth::Undefined ? "undefined" : "yes";
  if (s.truth == Truth::Undefined) out += " undefined";
  return out;
}

// ---------------------------------------------------------------------------
// Impl

void Engine::Impl::load_prelude() { program.consult(kPrelude, true); }

void Engine::Impl::report(StepOp op, const Term& subgoal, uint64_t k) {
  if (!reporting()) return;
  StepReport r{op, format_term(subgoal), k};
  if (trace) trace(r);
  if (step_sink) step_sink->push_back(std::move(r));
}

TablingMode Engine::Impl::mode_of(const PredicateInfo& info) const {
  if (info.incremental || info.answer_subsumption) return TablingMode::Variant;
  TablingMode m = info.mode ? *info.mode : cfg.default_tabling;
  return m == TablingMode::None ? TablingMode::Variant : m;
}

Term Engine::Impl::lookup_term(const Term& goal, const PredicateInfo& info, uint32_t fresh) const {
  if (!info.answer_subsumption || !goal.is_compound()) return goal;
  uint32_t arg = info.answer_subsumption->arg;
  if (arg >= goal.arity()) return goal;
  std::vector<Term> args(goal.args().begin(), goal.args().end());
  args[arg] = Term::var(fresh);
  return Term::compound(goal.symbol(), std::move(args));
}

Table* Engine::Impl::lookup_table(const Term& goal) const {
  if (!goal.is_callable()) return nullptr;
  const PredicateInfo* info = program.find_info(pred_key_of(goal));
  if (!info || !info->tabled) return nullptr;
  Term key = canonicalize(lookup_term(goal, *info, goal.var_bound()));
  if (Table* t = tables.find_variant(key)) return t;
  if (mode_of(*info) == TablingMode::Subsumptive) return tables.find_subsuming(key);
  return nullptr;
}

void Engine::Impl::begin_query(const Term& goal, const std::vector<std::string>& names) {
  if (query_active) throw Error(ErrorKind::Permission, "a query is already active");
  interrupted.store(false);
  uint32_t nv = goal.var_bound();
  query_table = tables.create_pseudo(make_tuple(Symbol::intern("$query"), nv), false);
  query_names = names;
  query_names.resize(nv);
  query_frames_base = static_cast<uint32_t>(frames.size());
  current_run = ++run_id;
  init_table(query_table, true);
  Node root;
  root.owner = query_table;
  root.head = make_tuple(sym.v, nv);
  root.goals = push_goal(goal, nullptr);
  root.nvars = nv;
  root.k = ++counters.nodes;
  root.cut_epoch = cuts;
  push_node(std::make_shared<const Node>(std::move(root)));
  query_active = true;
}

std::vector<Solution> Engine::Impl::collect_solutions() {
  std::vector<Solution> out;
  for (const auto& a : query_table->answers) {
    if (!a->live()) continue;
    Solution s;
    s.truth = a->status == AnswerStatus::Conditional ? Truth::Undefined : Truth::True;
    for (size_t i = 0; i < query_names.size() && i < a->bindings.size(); ++i)
      s.bindings.emplace_back(query_names[i], a->bindings[i]);
    out.push_back(std::move(s));
  }
  return out;
}

void Engine::Impl::end_query() {
  if (query_table) {
    detach_hosts(query_table);
    tables.remove_pseudo(query_table);
    query_table = nullptr;
  }
  query_active = false;
  if (cfg.query_level_tabling) abolish_tables(tables.all_tables());
  tables.gc();
}

void Engine::Impl::reset_evaluation() {
  stack.clear();
  frames.clear();
  deferred.clear();
  events.clear();
  in_simplify = false;
  step_sink = nullptr;
  std::vector<Table*> stale;
  for (Table* t : incomplete)
    if (!t->pseudo) stale.push_back(t);
  incomplete.clear();
  ++sdg_version;
  scc_cache = SccCache{};
  for (Table* t : stale) {
    t->consumers.clear();
    t->neg_waiters.clear();
    t->edges.clear();
  }
  abolish_tables(stale);
  for (Table* p : tables.pseudo_tables()) {
    detach_hosts(p);
    tables.remove_pseudo(p);
  }
  query_table = nullptr;
  query_active = false;
  tables.gc();
}

Table* Engine::Impl::evaluate_table(const Term& goal) {
  if (!goal.is_callable()) throw Error(ErrorKind::Type, "callable expected: " + format_term(goal));
  const PredicateInfo* info = program.find_info(pred_key_of(goal));
  if (!info || !info->tabled) throw Error(ErrorKind::NotTabled, pred_key_of(goal).str() + " is not tabled");
  nested_solve(Term::atom("true"), goal);
  return lookup_table(goal);
}

void Engine::Impl::forget_table(Table* t) {
  for (Table* c : t->consumed) c->consumed_by.erase(t);
  for (Table* c : t->consumed_by) c->consumed.erase(t);
  t->consumed.clear();
  t->consumed_by.clear();
  for (PredKey p : t->dynamic_deps) {
    auto it = dyn_dependents.find(p);
    if (it != dyn_dependents.end()) it->second.erase(t);
  }
  t->dynamic_deps.clear();
  t->consumers.clear();
  t->neg_waiters.clear();
  t->edges.clear();
  t->returned_to.clear();
}

std::vector<Table*> Engine::Impl::abolish_tables(const std::vector<Table*>& roots) {
  auto done = tables.abolish(roots, cfg.gc_action);
  for (Table* t : done) forget_table(t);
  return done;
}

void Engine::Impl::detach_hosts(Table* t) {
  for (const auto& a : t->answers) {
    AnswerRef self{t, a->id};
    for (const auto& d : a->delays) {
      for (const auto& l : d) {
        auto& hosts = l.negative ? l.table->neg_hosts : l.table->answers[l.answer]->pos_hosts;
        hosts.erase(std::remove(hosts.begin(), hosts.end(), self), hosts.end());
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Engine

Engine::Engine(EngineConfig config) : impl_(std::make_unique<Impl>(config)) { impl_->load_prelude(); }
Engine::~Engine() = default;

EngineConfig& Engine::config() { return impl_->cfg; }
ProgramStore& Engine::program() { return impl_->program; }
TableSpace& Engine::tables() { return impl_->tables; }

void Engine::consult(std::string_view text) {
  impl_->require_idle("consult");
  impl_->abolish_tables(impl_->tables.all_tables());
  impl_->tables.gc();
  impl_->dyn_dependents.clear();
  impl_->pending_incr.clear();
  impl_->program.consult(text);
  if (impl_->program.auto_table_requested()) impl_->program.auto_table();
}

void Engine::consult_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  consult(ss.str());
}

std::vector<Solution> Engine::solve(const Term& goal, const std::vector<std::string>& var_names) {
  begin(goal, var_names);
  return finish();
}

std::vector<Solution> Engine::query(std::string_view goal_text) {
  ReadTerm rt = read_term(goal_text);
  return solve(rt.term, rt.var_names);
}

void Engine::begin(const Term& goal, const std::vector<std::string>& var_names) {
  try {
    impl_->begin_query(goal, var_names);
  } catch (...) {
    impl_->reset_evaluation();
    throw;
  }
}

std::optional<std::vector<StepReport>> Engine::step() {
  if (!impl_->query_active) return std::nullopt;
  std::vector<StepReport> reports;
  impl_->step_sink = &reports;
  bool more = false;
  try {
    more = impl_->step_once(0, impl_->query_frames_base);
  } catch (...) {
    impl_->reset_evaluation();
    throw;
  }
  impl_->step_sink = nullptr;
  if (!more) return std::nullopt;
  return reports;
}

std::vector<Solution> Engine::finish() {
  if (!impl_->query_active) return {};
  try {
    impl_->run(0, impl_->query_frames_base);
    auto sols = impl_->collect_solutions();
    impl_->end_query();
    return sols;
  } catch (...) {
    impl_->reset_evaluation();
    throw;
  }
}

Truth Engine::truth_of(const Term& goal) {
  if (goal.is_var()) throw Error(ErrorKind::Instantiation, "truth_of: unbound goal");
  if (!goal.ground()) throw Error(ErrorKind::Floundering, "truth_of needs a ground goal: " + format_term(goal));
  Truth result = Truth::False;
  for (const auto& s : solve(goal)) {
    if (s.truth == Truth::True) return Truth::True;
    result = Truth::Undefined;
  }
  return result;
}

std::vector<ResidualClause> Engine::get_residual(const Term& goal, bool evaluate) {
  Table* t = impl_->lookup_table(goal);
  if (!t && evaluate) {
    try {
      t = impl_->evaluate_table(goal);
      impl_->tables.gc();
    } catch (...) {
      impl_->reset_evaluation();
      throw;
    }
  }
  if (!t) throw Error(ErrorKind::TableAbsent, "no table for " + format_term(goal));
  if (!t->complete()) throw Error(ErrorKind::TableIncomplete, "table incomplete: " + format_term(goal));
  return impl_->residual_of(t, &goal);
}

AnswerIterator Engine::table_answers(const Term& goal) {
  Table* t = impl_->lookup_table(goal);
  if (!t || t->status == TableStatus::Invalidated) {
    try {
      t = impl_->evaluate_table(goal);
    } catch (...) {
      impl_->reset_evaluation();
      throw;
    }
  }
  if (!t) throw Error(ErrorKind::TableAbsent, "no table for " + format_term(goal));
  return impl_->tables.iterate(t);
}

Table* Engine::table_for(const Term& goal) const { return impl_->lookup_table(goal); }

void Engine::abolish_all() {
  impl_->require_idle("abolish_all_tables");
  impl_->abolish_tables(impl_->tables.all_tables());
  impl_->tables.gc();
}

void Engine::abolish_pred(PredKey pred) {
  impl_->require_idle("abolish_table_pred");
  impl_->abolish_tables(impl_->tables.tables_of(pred));
  impl_->tables.gc();
}

void Engine::abolish_call(const Term& goal) {
  Table* t = impl_->tables.find_variant(goal);
  if (!t) throw Error(ErrorKind::TableAbsent, "no table for " + format_term(goal));
  if (t->incomplete()) throw Error(ErrorKind::TableIncomplete, "cannot abolish incomplete table " + format_term(goal));
  impl_->abolish_tables({t});
  impl_->tables.gc();
}

size_t Engine::gc() { return impl_->tables.gc(); }

bool Engine::assert_fact(const Term& clause, bool front) {
  Clause c = make_clause(clause);
  bool added = impl_->program.assert_clause(c, front ? ProgramStore::Position::Front : ProgramStore::Position::Back);
  impl_->note_fact_change(pred_key_of(c.head));
  return added;
}

bool Engine::retract_fact(const Term& clause) {
  bool removed = impl_->program.retract_clause(clause);
  if (removed) {
    const Term& head = is_functor(clause, ":-", 2) ? clause.arg(0) : clause;
    impl_->note_fact_change(pred_key_of(head));
  }
  return removed;
}

std::vector<Table*> Engine::incr_update(const Change& change) {
  try {
    return impl_->do_incr_update(change);
  } catch (...) {
    impl_->reset_evaluation();
    throw;
  }
}

std::vector<Table*> Engine::incr_table_update() {
  try {
    return impl_->do_incr_table_update();
  } catch (...) {
    impl_->reset_evaluation();
    throw;
  }
}

std::vector<Table*> Engine::incr_invalidate(const Change& change) { return impl_->do_incr_invalidate(change); }

uint64_t Engine::recompute_count(PredKey pred) const {
  auto it = impl_->recompute_counts.find(pred);
  return it == impl_->recompute_counts.end() ? 0 : it->second;
}

void Engine::set_trace(std::function<void(const StepReport&)> sink) { impl_->trace = std::move(sink); }
void Engine::set_output(std::ostream* out) { impl_->out = out ? out : &std::cout; }
void Engine::interrupt() { impl_->interrupted.store(true); }
const EngineCounters& Engine::counters() const { return impl_->counters; }
void Engine::reset_counters() { impl_->counters = EngineCounters{}; }

}  // namespace tlpe
