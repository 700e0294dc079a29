#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tlpe/program.hpp"
#include "tlpe/table.hpp"
#include "tlpe/term.hpp"

namespace tlpe {

enum class Strategy { Local, Batched };
enum class Truth { True, False, Undefined };

struct EngineConfig {
  Strategy strategy = Strategy::Local;
  TablingMode default_tabling = TablingMode::Variant;
  bool occurs_check = false;
  bool query_level_tabling = false;
  GcAction gc_action = GcAction::AbolishDependents;
};

enum class StepOp {
  NewSubgoal,
  ProgramClauseResolution,
  PositiveReturn,
  NegativeReturn,
  Delaying,
  Simplification,
  Completion,
  Answer,
};

const char* step_op_name(StepOp op);

struct StepReport {
  StepOp op;
  std::string subgoal;
  uint64_t k = 0;
  std::string str() const;  // "OP <NAME> <subgoal> K=<n>"
};

struct Solution {
  std::vector<std::pair<std::string, Term>> bindings;  // query variables in order
  Truth truth = Truth::True;
};

struct ResidualClause {
  Term head;
  std::vector<Term> body;
  std::string str() const;  // "H :- L1, L2." or "H."
};

struct EngineCounters {
  uint64_t steps = 0;
  uint64_t nodes = 0;
  uint64_t positive_returns = 0;
  uint64_t early_returns = 0;  // returns to consumers outside the producer's SCC before completion
  uint64_t join_applications = 0;
  uint64_t delays = 0;
  uint64_t simplifications = 0;
  uint64_t completions = 0;
  uint64_t recomputations = 0;
};

enum class ChangeKind { Assert, Retract };

struct Change {
  ChangeKind kind;
  Term fact;
};

class Engine {
 public:
  explicit Engine(EngineConfig config = {});
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  EngineConfig& config();
  ProgramStore& program();
  TableSpace& tables();

  // Loads program text; abolishes existing tables.
  void consult(std::string_view text);
  void consult_file(const std::string& path);

  // Evaluates the goal to completion and returns its distinct answers.
  std::vector<Solution> solve(const Term& goal, const std::vector<std::string>& var_names = {});
  std::vector<Solution> query(std::string_view goal_text);

  // Step-wise evaluation of one query: begin, then step until it returns
  // nullopt, then collect the answers.
  void begin(const Term& goal, const std::vector<std::string>& var_names = {});
  std::optional<std::vector<StepReport>> step();
  std::vector<Solution> finish();

  Truth truth_of(const Term& goal);
  // Residual clauses of the answers matching goal; evaluates the goal first
  // when its table does not exist and `evaluate` is set.
  std::vector<ResidualClause> get_residual(const Term& goal, bool evaluate = true);
  // Evaluates goal as a tabled call and iterates the resulting table.
  AnswerIterator table_answers(const Term& goal);
  Table* table_for(const Term& goal) const;

  void abolish_all();
  void abolish_pred(PredKey pred);
  void abolish_call(const Term& goal);
  size_t gc();

  // Fact changes through the plain interface; incremental predicates record
  // them for the next incr_table_update.
  bool assert_fact(const Term& clause, bool front = false);
  bool retract_fact(const Term& clause);

  std::vector<Table*> incr_update(const Change& change);
  std::vector<Table*> incr_table_update();
  std::vector<Table*> incr_invalidate(const Change& change);
  // Number of times tables for this predicate were recomputed by
  // incremental maintenance.
  uint64_t recompute_count(PredKey pred) const;

  void set_trace(std::function<void(const StepReport&)> sink);
  // Destination of write/1 and friends; defaults to std::cout.
  void set_output(std::ostream* out);
  // Async-signal-safe: the running query stops with an Interrupted error and
  // its incomplete tables are abolished.
  void interrupt();
  const EngineCounters& counters() const;
  void reset_counters();

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

std::string format_truth(Truth t);
// "X = 1, Y = [a] undefined", "yes", or "undefined" for a ground answer.
std::string format_solution(const Solution& s);

}  // namespace tlpe
