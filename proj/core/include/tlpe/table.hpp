#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tlpe/program.hpp"
#include "tlpe/term.hpp"
#include "tlpe/trie.hpp"

namespace tlpe {

struct Table;
struct Consumer;
struct NegWaiter;

enum class TableStatus { Incomplete, Complete, Invalidated, Abolished };
enum class AnswerStatus { Unconditional, Conditional, Deleted };

// tnot(table) when negative; otherwise the specific answer table:answer.
struct DelayLiteral {
  bool negative = false;
  Table* table = nullptr;
  uint32_t answer = 0;
  friend bool operator==(const DelayLiteral&, const DelayLiteral&) = default;
};

bool operator<(const DelayLiteral& a, const DelayLiteral& b);  // by polarity, table creation, answer

using DelayList = std::vector<DelayLiteral>;  // sorted, duplicate free

void normalize_delays(DelayList& d);

struct AnswerRef {
  Table* table = nullptr;
  uint32_t answer = 0;
  friend bool operator==(const AnswerRef&, const AnswerRef&) = default;
};

struct Answer {
  uint32_t id = 0;
  std::vector<Term> bindings;  // values of the subgoal's variables, jointly canonical
  Term atom;                   // the subgoal instantiated by the bindings
  Trie::Node* leaf = nullptr;
  AnswerStatus status = AnswerStatus::Unconditional;
  std::vector<DelayList> delays;     // alternatives; empty when unconditional
  std::vector<AnswerRef> pos_hosts;  // answers whose delay lists name this one
  bool live() const { return status != AnswerStatus::Deleted; }
};

struct Table {
  uint64_t id = 0;
  Term subgoal;  // canonical
  PredKey pred;
  TablingMode mode = TablingMode::Variant;
  TableStatus status = TableStatus::Incomplete;
  bool pseudo = false;     // query or nested-evaluation table
  bool collect_all = false; // nested findall: keep duplicates, no trie
  uint32_t subgoal_vars = 0;
  const SubsumptionSpec* aspec = nullptr;

  Trie answer_trie;
  std::vector<std::unique_ptr<Answer>> answers;  // by id
  size_t live_answers = 0;
  size_t conditional_answers = 0;

  // Simplification index: answers whose delay lists contain tnot(this).
  std::vector<AnswerRef> neg_hosts;

  // Evaluation bookkeeping (engine).
  uint64_t dfn = 0;
  std::vector<std::shared_ptr<Consumer>> consumers;
  std::vector<std::shared_ptr<NegWaiter>> neg_waiters;
  std::unordered_map<Table*, uint8_t> edges;  // bit 1 positive, bit 2 negative
  bool nonstratified = false;
  std::unordered_map<Table*, uint64_t> returned_to;  // owners fed while this table was incomplete

  // Answer subsumption.
  std::unordered_map<Term, uint32_t, TermHash> lattice_index;  // plain key -> answer id
  Trie seen_contributions;

  // Dependencies for incremental maintenance and abolish.
  std::set<Table*> consumed;      // tables whose answers this one used
  std::set<Table*> consumed_by;
  std::set<PredKey, bool (*)(PredKey, PredKey)> dynamic_deps{pred_key_less};
  uint64_t recompute_count = 0;

  size_t iter_refs = 0;

  bool has_unconditional() const { return live_answers > conditional_answers; }
  bool complete() const { return status == TableStatus::Complete; }
  bool incomplete() const { return status == TableStatus::Incomplete; }
};

inline bool operator<(const DelayLiteral& a, const DelayLiteral& b) {
  if (a.negative != b.negative) return a.negative < b.negative;
  if (a.table != b.table) {
    if (a.table->id != b.table->id) return a.table->id < b.table->id;
    return std::less<Table*>()(a.table, b.table);
  }
  return a.answer < b.answer;
}

struct TableStats {
  struct PerPred {
    PredKey pred;
    size_t tables = 0;
    size_t answers = 0;
    size_t conditional = 0;
    size_t trie_nodes = 0;  // subgoal + answer trie nodes
  };
  std::vector<PerPred> preds;
  size_t tables = 0;
  size_t answers = 0;
  size_t conditional = 0;
  size_t trie_nodes = 0;
  size_t graveyard = 0;
  size_t reclaimed = 0;
};

enum class AddResult { Added, Duplicate, Rejected, Replaced, Upgraded, DelayAdded };

enum class GcAction { AbolishDependents, KeepDependents };

class TableSpace;

// Cursor over the answers of one table. Holding an iterator keeps the table
// from being reclaimed even after it is abolished.
class AnswerIterator {
 public:
  AnswerIterator() = default;
  AnswerIterator(TableSpace* space, Table* t);
  AnswerIterator(AnswerIterator&& o) noexcept;
  AnswerIterator& operator=(AnswerIterator&& o) noexcept;
  AnswerIterator(const AnswerIterator&) = delete;
  AnswerIterator& operator=(const AnswerIterator&) = delete;
  ~AnswerIterator();

  const Answer* next();
  Table* table() const { return table_; }
  // Drops the hold on the table; next() returns nullptr afterwards.
  void release();

 private:
  TableSpace* space_ = nullptr;
  Table* table_ = nullptr;
  size_t pos_ = 0;
};

struct SubgoalLookup {
  Table* table = nullptr;
  bool is_new = false;
  Table* producer = nullptr;  // subsuming producer, when different from the call
};

class TableSpace {
 public:
  TableSpace();
  ~TableSpace();

  Table* find_variant(const Term& goal) const;
  // Most specific stored subgoal subsuming goal (first in trie order on ties).
  Table* find_subsuming(const Term& goal) const;
  SubgoalLookup check_insert_subgoal(const Term& goal, TablingMode mode);
  Table* create_pseudo(const Term& subgoal, bool collect_all);

  // Stores an answer given the bindings of the subgoal's variables.
  // Without answer subsumption; delays must already be normalized.
  AddResult add_answer(Table* t, std::vector<Term> bindings, DelayList delays, Answer** out);
  // Inserts a fresh answer entry (used by answer subsumption after joins).
  Answer* insert_answer(Table* t, std::vector<Term> bindings);
  // Removes an answer from the trie and marks it deleted.
  void delete_answer(Table* t, Answer* a);
  void set_delays(Table* t, Answer* a, std::vector<DelayList> lists);

  // Moves tables to the graveyard. Returns all tables abolished, including
  // conditional dependents when the action says so.
  std::vector<Table*> abolish(const std::vector<Table*>& roots, GcAction action);
  std::vector<Table*> tables_of(PredKey pred) const;
  std::vector<Table*> all_tables() const;  // live, creation order
  void remove_pseudo(Table* t);
  std::vector<Table*> pseudo_tables() const;
  size_t gc();
  size_t table_count() const { return live_.size(); }
  size_t graveyard_size() const { return graveyard_.size(); }
  TableStats stats() const;
  size_t created_count() const { return next_id_ - 1; }

  AnswerIterator iterate(Table* t) { return AnswerIterator(this, t); }
  bool is_live(const Table* t) const;

 private:
  friend class AnswerIterator;
  struct PredTables {
    Trie subgoals;
    std::vector<Table*> order;
  };
  Table* create(const Term& canonical, PredKey key, TablingMode mode);
  void unlink(Table* t);

  std::unordered_map<PredKey, PredTables, PredKeyHash> by_pred_;
  std::unordered_map<uint64_t, std::unique_ptr<Table>> live_;
  std::vector<std::unique_ptr<Table>> graveyard_;
  std::vector<std::unique_ptr<Table>> pseudo_;
  uint64_t next_id_ = 1;
  size_t reclaimed_ = 0;
};

// Answer atom for a subgoal and its variable bindings, renumbered from 0.
Term instantiate_subgoal(const Term& subgoal, const std::vector<Term>& bindings);
// Bindings of the variables of `subgoal` (canonical) that turn it into `atom`.
std::optional<std::vector<Term>> bindings_for(const Term& subgoal, uint32_t nvars, const Term& atom);

}  // namespace tlpe
