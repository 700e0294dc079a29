#pragma once

#include <atomic>
#include <deque>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tlpe/engine.hpp"
#include "tlpe/error.hpp"
#include "tlpe/term_io.hpp"

namespace tlpe {

struct Scope {
  uint64_t serial = 0;
  uint32_t depth = 0;
  bool cut = false;
  std::shared_ptr<Scope> parent;
};
using ScopePtr = std::shared_ptr<Scope>;

// Tabled call made inside a scope; cutting that scope while the table is
// incomplete is an error.
struct TCall {
  Table* table;
  ScopePtr scope;
  std::shared_ptr<const TCall> next;
};
using TCalls = std::shared_ptr<const TCall>;

struct GoalCell {
  Term goal;
  std::shared_ptr<const GoalCell> next;
};
using Goals = std::shared_ptr<const GoalCell>;

inline Goals push_goal(Term g, Goals rest) {
  return std::make_shared<const GoalCell>(GoalCell{std::move(g), std::move(rest)});
}

// A continuation: owner table, answer template ('$v'(...) over the owner's
// subgoal variables), remaining goals and accumulated delays. Variables are
// numbered densely per node.
struct Node {
  Table* owner = nullptr;
  Term head;
  Goals goals;
  DelayList delays;
  uint32_t nvars = 0;
  ScopePtr scope;
  mutable uint64_t cut_epoch = 0;
  TCalls tcalls;
  uint64_t k = 0;
};
using NodePtr = std::shared_ptr<const Node>;

struct Consumer {
  NodePtr node;  // first goal is the tabled call
  Term call;
  Table* table = nullptr;
  size_t cursor = 0;
  bool scheduled = false;
  bool deferred = false;
  bool dead = false;
};

struct NegWaiter {
  NodePtr node;  // first goal is tnot(A)
  Table* target = nullptr;
  bool done = false;
};

struct ClauseGen {
  NodePtr node;  // first goal is the call being resolved
  Term call;
  std::vector<ClauseRef> clauses;
  size_t next = 0;
  ScopePtr scope;
  Table* table = nullptr;  // set when generating a table's program clauses
};

enum class WorkKind { Node, Consumer, Gen, NegReturn };

struct Work {
  WorkKind kind;
  NodePtr node;
  std::shared_ptr<Consumer> consumer;
  std::shared_ptr<ClauseGen> gen;
  std::shared_ptr<NegWaiter> waiter;
};

struct Frame {
  uint64_t dfn;
  uint64_t low;
  size_t h;  // ready-stack height when the leader was created
  uint32_t run;
};

struct SimpEvent {
  enum Kind { NegTrue, NegFalse, PosTrue, PosFalse } kind;
  Table* table;
  uint32_t answer;
};

// Interned symbols the resolution loop dispatches on.
struct Syms {
  Symbol comma = Symbol::intern(",");
  Symbol semicolon = Symbol::intern(";");
  Symbol arrow = Symbol::intern("->");
  Symbol soft_arrow = Symbol::intern("*->");
  Symbol true_ = Symbol::intern("true");
  Symbol fail = Symbol::intern("fail");
  Symbol false_ = Symbol::intern("false");
  Symbol cut = Symbol::intern("!");
  Symbol cut_to = Symbol::intern("$cut");
  Symbol exit = Symbol::intern("$exit");
  Symbol ite = Symbol::intern("$ite");
  Symbol naf = Symbol::intern("\\+");
  Symbol not_ = Symbol::intern("not");
  Symbol tnot = Symbol::intern("tnot");
  Symbol call = Symbol::intern("call");
  Symbol once = Symbol::intern("once");
  Symbol ignore = Symbol::intern("ignore");
  Symbol forall = Symbol::intern("forall");
  Symbol findall = Symbol::intern("findall");
  Symbol get_residual = Symbol::intern("get_residual");
  Symbol v = Symbol::intern("$v");
  Symbol eq = Symbol::intern("=");
};

enum class Flow { Continue, Stop };

struct Engine::Impl {
  explicit Impl(EngineConfig c) : cfg(c) {}

  Syms sym;
  std::ostream* out = &std::cout;
  std::atomic<bool> interrupted{false};

  EngineConfig cfg;
  ProgramStore program;
  TableSpace tables;

  // Evaluation state.
  std::vector<Work> stack;
  std::vector<Frame> frames;
  std::vector<Table*> incomplete;  // dfn order
  std::multimap<uint64_t, std::weak_ptr<Consumer>> deferred;
  uint64_t dfn_counter = 0;
  uint64_t scope_counter = 0;
  uint64_t cuts = 0;
  uint64_t sdg_version = 0;
  uint32_t run_id = 0;
  uint32_t current_run = 0;
  struct SccCache {
    uint64_t version = ~0ull;
    uint64_t root = 0;
    std::vector<std::vector<Table*>> sccs;
  } scc_cache;
  std::deque<SimpEvent> events;
  bool in_simplify = false;

  // Query in progress.
  Table* query_table = nullptr;
  std::vector<std::string> query_names;
  uint32_t query_frames_base = 0;
  bool query_active = false;
  std::vector<StepReport>* step_sink = nullptr;
  std::function<void(const StepReport&)> trace;
  EngineCounters counters;

  // Incremental maintenance.
  std::unordered_map<PredKey, std::set<Table*>, PredKeyHash> dyn_dependents;
  std::set<PredKey, bool (*)(PredKey, PredKey)> pending_incr{pred_key_less};
  std::unordered_map<PredKey, uint64_t, PredKeyHash> recompute_counts;

  // --- engine.cpp
  void load_prelude();
  void report(StepOp op, const Term& subgoal, uint64_t k);
  bool reporting() const { return trace || step_sink; }
  TablingMode mode_of(const PredicateInfo& info) const;
  void begin_query(const Term& goal, const std::vector<std::string>& names);
  std::vector<Solution> collect_solutions();
  void end_query();
  void reset_evaluation();
  Table* evaluate_table(const Term& goal);
  Term lookup_term(const Term& goal, const PredicateInfo& info, uint32_t fresh) const;
  Table* lookup_table(const Term& goal) const;
  void forget_table(Table* t);
  std::vector<Table*> abolish_tables(const std::vector<Table*>& roots);
  void detach_hosts(Table* t);

  // --- scheduler.cpp
  void run(size_t base, size_t frames_base);
  bool step_once(size_t base, size_t frames_base);
  void execute(Work w);
  void push_node(NodePtr n) { stack.push_back(Work{WorkKind::Node, std::move(n), {}, {}, {}}); }
  void push_consumer(const std::shared_ptr<Consumer>& c);
  void push_gen(std::shared_ptr<ClauseGen> g) { stack.push_back(Work{WorkKind::Gen, {}, {}, std::move(g), {}}); }
  void init_table(Table* t, bool pseudo);
  size_t frame_index_for(uint64_t dfn) const;
  void add_edge(Table* from, Table* to, bool negative);
  bool should_defer(const Consumer& c) const;
  void schedule_consumer(const std::shared_ptr<Consumer>& c);
  void notify_consumers(Table* t);
  void release_deferred(uint64_t min_dfn);
  void on_quiescent(size_t frames_base);
  const std::vector<std::vector<Table*>>& segment_sccs(uint64_t root_dfn);
  void complete_scc(const std::vector<Table*>& scc);
  void delay_waiter(const std::shared_ptr<NegWaiter>& w);

  // --- resolution.cpp
  bool alive(const Node& n);
  void resume(Node n);
  void exec_gen(ClauseGen& g, const std::shared_ptr<ClauseGen>& self);
  void exec_consumer(const std::shared_ptr<Consumer>& c);
  void exec_neg_return(const std::shared_ptr<NegWaiter>& w);
  // Copies base with head and goals renamed jointly through env.
  Node renamed(const Node& base, const Bindings* env, const Term& head, Goals goals, DelayList delays);
  NodePtr make_node(const Node& base, const Bindings* env, const Term& head, Goals goals, DelayList delays);
  void ite(Node& n, const Term& cond, const Term& then, const Term& otherwise, Goals rest);
  void generate(Table* t);
  void tabled_call(Node& n, const Term& goal, const PredicateInfo& info);
  Flow negative_call(Node& n, const Term& goal, Goals rest);
  Flow call_user(Node& n, const Term& goal, Goals rest, const PredicateInfo* info);
  Flow call_findall(Node& n, const Term& goal, Goals rest);
  Term residual_disjunction(const Term& goal, const Term& delays, uint32_t& nvars);
  Table* recompute_if_invalid(Table* t);
  void handle_answer(const Node& n);
  bool pre_simplify(DelayList& d) const;
  void record_dynamic_dep(Table* owner, PredKey pred);
  void do_cut(Node& n, uint64_t serial);
  void exit_scope(Node& n, uint64_t serial);
  ScopePtr new_scope(const ScopePtr& parent);
  // Runs goal to completion in a nested evaluation and returns the
  // instances of templ, in derivation order, each renumbered from 0.
  std::vector<Term> nested_solve(const Term& templ, const Term& goal);

  // --- builtins.cpp
  enum class BuiltinResult { NotBuiltin, Success, Failure };
  // Executes a deterministic builtin; on success env holds new bindings.
  BuiltinResult builtin(const Term& goal, Bindings& env, uint32_t& nvars);
  Term eval_arith(const Term& t, const Bindings& env);

  // --- simplify.cpp
  void register_hosts(Table* t, Answer* a, const DelayList& d);
  void on_unconditional(Table* t, Answer* a);
  void on_deleted(Table* t, Answer* a);
  void on_table_false(Table* t);
  void process_events();
  void answer_completion(const std::vector<Table*>& scc);
  std::vector<ResidualClause> residual_of(Table* t, const Term* filter);

  // --- aggregate.cpp
  void reduce_answer(Table* t, std::vector<Term> bindings, uint64_t k);
  Term apply_join(const SubsumptionSpec& s, const Term& a, const Term& b);
  bool apply_leq(const SubsumptionSpec& s, const Term& a, const Term& b);

  // --- incremental.cpp
  std::vector<Table*> affected_tables(const std::vector<PredKey>& preds);
  std::vector<Table*> recompute(const std::vector<Table*>& affected);
  void apply_change(const Change& c);
  void note_fact_change(PredKey pred);
  void require_idle(const char* what) const;
  std::vector<Table*> do_incr_update(const Change& c);
  std::vector<Table*> do_incr_table_update();
  std::vector<Table*> do_incr_invalidate(const Change& c);
};

bool is_builtin(PredKey key);
Term make_tuple(Symbol name, uint32_t nvars);

inline bool is_functor(const Term& t, std::string_view name, size_t arity) {
  return t.is_callable() && t.arity() == arity && t.symbol().name() == name;
}

}  // namespace tlpe
