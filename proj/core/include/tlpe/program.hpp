#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tlpe/term.hpp"
#include "tlpe/trie.hpp"

namespace tlpe {

enum class TablingMode { None, Variant, Subsumptive };

struct IndexComponent {
  bool star = false;
  uint32_t arg = 0;  // 1-based
  friend bool operator==(const IndexComponent&, const IndexComponent&) = default;
};

struct JointIndex {
  std::vector<IndexComponent> components;
  std::string str() const;  // e.g. "*(1)+2"
};

struct IndexSpec {
  bool trie = false;
  std::vector<JointIndex> joints;
  std::string str() const;
};

enum class AggregateKind { Lattice, PartialOrder, Min, Max, Sum, Count };

struct SubsumptionSpec {
  uint32_t arg = 0;  // 0-based position of the subsumed argument
  AggregateKind kind = AggregateKind::Lattice;
  PredKey relation{};                 // join/3 or leq/2 for user-defined modes
  std::optional<Term> identity;       // lattice identity, if given
  bool duplicate_filter() const { return kind == AggregateKind::Sum || kind == AggregateKind::Count; }
};

struct Clause {
  Term head;
  Term body;  // `true` for facts; cuts already rewritten to '$cut'(V)
  uint32_t nvars = 0;
  int64_t seq = 0;
  bool has_cut = false;
  bool erased = false;

  bool is_fact() const;
};

using ClauseRef = std::shared_ptr<const Clause>;

struct PredicateInfo {
  PredKey key;
  bool tabled = false;
  std::optional<TablingMode> mode;  // unset: session default
  bool incremental = false;
  bool dynamic = false;
  bool incremental_dynamic = false;
  bool library = false;  // prelude definition, replaced by the first user clause
  bool declared = false; // known even without clauses
  IndexSpec index;
  std::optional<SubsumptionSpec> answer_subsumption;
};

struct Lookup {
  std::vector<ClauseRef> clauses;
  std::string index_used;  // "trie", a joint index like "*(1)+2", or "none"
};

enum class DirectiveKind { Table, Dynamic, UseIncrementalDynamic, Index, AutoTable };

struct Directive {
  DirectiveKind kind;
  Term term;
  int line = 0;
};

struct ProgramItem {
  bool is_directive = false;
  Clause clause;
  Directive directive{DirectiveKind::AutoTable, Term(), 0};
};

using ParsedProgram = std::vector<ProgramItem>;  // source order

// Rewrites `!` in control positions to '$cut'(cut_var).
Term prepare_body(const Term& body, const Term& cut_var, bool& has_cut);
// Builds a clause from a parsed term; variables renumbered densely.
Clause make_clause(const Term& t);

ParsedProgram parse_program(std::string_view text);

class ProgramStore {
 public:
  class Pred;

  ProgramStore();
  ~ProgramStore();
  ProgramStore(const ProgramStore&) = delete;
  ProgramStore& operator=(const ProgramStore&) = delete;

  // Loads program text: directives apply in order to later clauses.
  // Returns the predicates defined by this consult.
  std::vector<PredKey> consult(std::string_view text, bool library = false);
  void apply_directive(const Directive& d);

  PredicateInfo& info(PredKey key);  // creates on demand
  const PredicateInfo* find_info(PredKey key) const;
  bool is_defined(PredKey key) const;
  std::vector<PredKey> predicates() const;  // sorted

  enum class Position { Front, Back };
  // Returns false when a trie-indexed store already holds the fact.
  bool assert_clause(const Clause& c, Position pos = Position::Back);
  bool assert_term(const Term& t, Position pos = Position::Back);
  // Static clause addition used by consult.
  void add_static(const Clause& c);
  // Removes the first clause variant to the pattern (fact or (H :- B)).
  bool retract_clause(const Term& pattern);
  bool erase_clause(const ClauseRef& c);
  // Removes all clauses of a predicate, keeping its declarations.
  void clear_clauses(PredKey key);

  Lookup lookup_clauses(const Term& goal) const;
  std::vector<ClauseRef> all_clauses(PredKey key) const;
  size_t clause_count(PredKey key) const;
  size_t trie_node_count(PredKey key) const;  // trie-indexed stores only

  void set_index(PredKey key, IndexSpec spec);
  bool auto_table_requested() const { return auto_table_; }
  std::vector<PredKey> auto_table();  // computes and marks the set

 private:
  Pred& pred(PredKey key);
  const Pred* find_pred(PredKey key) const;

  std::unordered_map<PredKey, std::unique_ptr<Pred>, PredKeyHash> preds_;
  int64_t front_seq_ = 0;
  int64_t back_seq_ = 0;
  bool auto_table_ = false;
};

// Predicate dependency graph (p -> q iff q occurs in a body of p) and the
// greedy loop-breaking selection used by auto_table.
std::vector<PredKey> body_predicates(const Term& body);
std::set<std::pair<uint32_t, uint32_t>> dependency_edges(const std::vector<PredKey>& preds,
                                                         const ProgramStore& store);
std::vector<PredKey> greedy_feedback_set(const std::vector<PredKey>& vertices,
                                         const std::set<std::pair<uint32_t, uint32_t>>& edges,
                                         const std::vector<bool>& preselected);

IndexSpec parse_index_spec(const Term& spec, uint32_t arity);
std::optional<SubsumptionSpec> parse_subsumption_spec(const Term& spec);

}  // namespace tlpe
