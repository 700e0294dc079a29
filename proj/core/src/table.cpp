#include "tlpe/table.hpp"

#include <algorithm>

#include "tlpe/error.hpp"
#include "tlpe/term_io.hpp"

namespace tlpe {

namespace {

Term substitute(const Term& t, const std::vector<Term>& bindings) {
  if (t.is_var()) return t.var_id() < bindings.size() ? bindings[t.var_id()] : t;
  if (!t.is_compound() || t.ground()) return t;
  std::vector<Term> args;
  args.reserve(t.arity());
  for (const auto& a : t.args()) args.push_back(substitute(a, bindings));
  return Term::compound(t.symbol(), std::move(args));
}

size_t nonvar_symbols(const Term& t) {
  if (t.is_var()) return 0;
  size_t n = 1;
  for (const auto& a : t.args()) n += nonvar_symbols(a);
  return n;
}

}  // namespace

void normalize_delays(DelayList& d) {
  std::sort(d.begin(), d.end());
  d.erase(std::unique(d.begin(), d.end()), d.end());
}

Term instantiate_subgoal(const Term& subgoal, const std::vector<Term>& bindings) {
  return canonicalize(substitute(subgoal, bindings));
}

std::optional<std::vector<Term>> bindings_for(const Term& subgoal, uint32_t nvars, const Term& atom) {
  std::vector<std::optional<Term>> env(nvars);
  if (!match(subgoal, atom, env)) return std::nullopt;
  Renamer r;
  std::vector<Term> out;
  out.reserve(nvars);
  for (uint32_t i = 0; i < nvars; ++i) out.push_back(r(env[i] ? *env[i] : Term::var(1u << 30)));
  return out;
}

// ---------------------------------------------------------------------------
// AnswerIterator

AnswerIterator::AnswerIterator(TableSpace* space, Table* t) : space_(space), table_(t) {
  if (table_) ++table_->iter_refs;
}

AnswerIterator::AnswerIterator(AnswerIterator&& o) noexcept : space_(o.space_), table_(o.table_), pos_(o.pos_) {
  o.table_ = nullptr;
}

AnswerIterator& AnswerIterator::operator=(AnswerIterator&& o) noexcept {
  if (this != &o) {
    release();
    space_ = o.space_;
    table_ = o.table_;
    pos_ = o.pos_;
    o.table_ = nullptr;
  }
  return *this;
}

AnswerIterator::~AnswerIterator() { release(); }

void AnswerIterator::release() {
  if (table_) --table_->iter_refs;
  table_ = nullptr;
}

const Answer* AnswerIterator::next() {
  if (!table_) return nullptr;
  while (pos_ < table_->answers.size()) {
    const Answer* a = table_->answers[pos_++].get();
    if (a->live()) return a;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// TableSpace

TableSpace::TableSpace() = default;
TableSpace::~TableSpace() = default;

Table* TableSpace::find_variant(const Term& goal) const {
  auto it = by_pred_.find(pred_key_of(goal));
  if (it == by_pred_.end()) return nullptr;
  auto* leaf = it->second.subgoals.find(canonicalize(goal));
  if (!leaf) return nullptr;
  auto t = live_.find(leaf->payload);
  return t == live_.end() ? nullptr : t->second.get();
}

Table* TableSpace::find_subsuming(const Term& goal) const {
  auto it = by_pred_.find(pred_key_of(goal));
  if (it == by_pred_.end()) return nullptr;
  Table* best = nullptr;
  size_t best_score = 0;
  for (auto* leaf : it->second.subgoals.subsuming_leaves(std::span(&goal, 1))) {
    auto t = live_.find(leaf->payload);
    if (t == live_.end()) continue;
    Table* cand = t->second.get();
    if (!subsumes(cand->subgoal, goal)) continue;
    size_t score = nonvar_symbols(cand->subgoal);
    if (!best || score > best_score) {
      best = cand;
      best_score = score;
    }
  }
  return best;
}

Table* TableSpace::create(const Term& canonical, PredKey key, TablingMode mode) {
  auto t = std::make_unique<Table>();
  t->id = next_id_++;
  t->subgoal = canonical;
  t->pred = key;
  t->mode = mode;
  t->subgoal_vars = canonical.var_bound();
  Table* raw = t.get();
  live_.emplace(raw->id, std::move(t));
  auto& pt = by_pred_[key];
  pt.subgoals.insert(canonical, raw->id);
  pt.order.push_back(raw);
  return raw;
}

SubgoalLookup TableSpace::check_insert_subgoal(const Term& goal, TablingMode mode) {
  if (!goal.is_callable()) throw Error(ErrorKind::Type, "callable expected: " + format_term(goal));
  Term canonical = canonicalize(goal);
  PredKey key = pred_key_of(goal);
  if (mode == TablingMode::Subsumptive) {
    if (Table* t = find_subsuming(canonical)) {
      bool same = variant(t->subgoal, canonical);
      return {t, false, same ? nullptr : t};
    }
  } else if (Table* t = find_variant(canonical)) {
    return {t, false, nullptr};
  }
  return {create(canonical, key, mode), true, nullptr};
}

Table* TableSpace::create_pseudo(const Term& subgoal, bool collect_all) {
  auto t = std::make_unique<Table>();
  t->id = 0;
  t->subgoal = canonicalize(subgoal);
  t->pred = pred_key_of(subgoal);
  t->pseudo = true;
  t->collect_all = collect_all;
  t->subgoal_vars = t->subgoal.var_bound();
  Table* raw = t.get();
  pseudo_.push_back(std::move(t));
  return raw;
}

void TableSpace::remove_pseudo(Table* t) {
  auto it = std::find_if(pseudo_.begin(), pseudo_.end(), [t](const auto& p) { return p.get() == t; });
  if (it != pseudo_.end()) pseudo_.erase(it);
}

Answer* TableSpace::insert_answer(Table* t, std::vector<Term> bindings) {
  auto a = std::make_unique<Answer>();
  a->id = static_cast<uint32_t>(t->answers.size());
  if (!t->collect_all) {
    auto [leaf, fresh] = t->answer_trie.insert(bindings, a->id);
    if (!fresh) leaf->payload = a->id;
    a->leaf = leaf;
  }
  a->atom = instantiate_subgoal(t->subgoal, bindings);
  a->bindings = std::move(bindings);
  a->status = AnswerStatus::Unconditional;
  ++t->live_answers;
  t->answers.push_back(std::move(a));
  return t->answers.back().get();
}

AddResult TableSpace::add_answer(Table* t, std::vector<Term> bindings, DelayList delays, Answer** out) {
  if (t->complete()) throw Error(ErrorKind::TableIncomplete, "answer added to complete table");
  if (t->collect_all) {
    *out = insert_answer(t, std::move(bindings));
    return AddResult::Added;
  }
  auto labels = encode_terms(bindings);
  auto [leaf, fresh] = t->answer_trie.insert_labels(labels, static_cast<uint32_t>(t->answers.size()));
  if (!fresh) {
    Answer* a = t->answers[leaf->payload].get();
    *out = a;
    if (a->status == AnswerStatus::Unconditional) return delays.empty() ? AddResult::Duplicate : AddResult::Rejected;
    if (a->status == AnswerStatus::Conditional) {
      if (delays.empty()) {
        a->status = AnswerStatus::Unconditional;
        a->delays.clear();
        --t->conditional_answers;
        return AddResult::Upgraded;
      }
      if (std::find(a->delays.begin(), a->delays.end(), delays) != a->delays.end()) return AddResult::Duplicate;
      a->delays.push_back(std::move(delays));
      return AddResult::DelayAdded;
    }
    // A deleted answer is derived again: give it a fresh entry so that
    // consumers see it.
    leaf->payload = t->answers.size();
  }
  auto a = std::make_unique<Answer>();
  a->id = static_cast<uint32_t>(t->answers.size());
  a->leaf = leaf;
  a->atom = instantiate_subgoal(t->subgoal, bindings);
  a->bindings = std::move(bindings);
  ++t->live_answers;
  if (delays.empty()) {
    a->status = AnswerStatus::Unconditional;
  } else {
    a->status = AnswerStatus::Conditional;
    a->delays.push_back(std::move(delays));
    ++t->conditional_answers;
  }
  t->answers.push_back(std::move(a));
  *out = t->answers.back().get();
  return AddResult::Added;
}

void TableSpace::delete_answer(Table* t, Answer* a) {
  if (!a->live()) return;
  if (a->status == AnswerStatus::Conditional) --t->conditional_answers;
  a->status = AnswerStatus::Deleted;
  a->delays.clear();
  --t->live_answers;
  if (a->leaf && a->leaf->payload == a->id) {
    t->answer_trie.erase(a->leaf);
  }
  a->leaf = nullptr;
}

void TableSpace::set_delays(Table* t, Answer* a, std::vector<DelayList> lists) {
  if (!a->live()) return;
  bool was_cond = a->status == AnswerStatus::Conditional;
  bool uncond = std::any_of(lists.begin(), lists.end(), [](const DelayList& d) { return d.empty(); });
  if (uncond) {
    a->delays.clear();
    a->status = AnswerStatus::Unconditional;
    if (was_cond) --t->conditional_answers;
    return;
  }
  a->delays = std::move(lists);
  if (!was_cond) {
    a->status = AnswerStatus::Conditional;
    ++t->conditional_answers;
  }
}

std::vector<Table*> TableSpace::pseudo_tables() const {
  std::vector<Table*> out;
  for (const auto& t : pseudo_) out.push_back(t.get());
  return out;
}

bool TableSpace::is_live(const Table* t) const {
  if (!t || t->pseudo) return false;
  auto it = live_.find(t->id);
  return it != live_.end() && it->second.get() == t;
}

void TableSpace::unlink(Table* t) {
  auto it = by_pred_.find(t->pred);
  if (it == by_pred_.end()) return;
  auto& pt = it->second;
  if (auto* leaf = pt.subgoals.find(t->subgoal); leaf && leaf->payload == t->id) pt.subgoals.erase(leaf);
  pt.order.erase(std::remove(pt.order.begin(), pt.order.end(), t), pt.order.end());
  if (pt.order.empty()) by_pred_.erase(it);
}

std::vector<Table*> TableSpace::abolish(const std::vector<Table*>& roots, GcAction action) {
  std::vector<Table*> done;
  std::vector<Table*> work(roots.begin(), roots.end());
  std::unordered_set<Table*> seen;
  while (!work.empty()) {
    Table* t = work.back();
    work.pop_back();
    if (!seen.insert(t).second || !is_live(t)) continue;
    if (action == GcAction::AbolishDependents) {
      for (const auto& h : t->neg_hosts) work.push_back(h.table);
      for (const auto& a : t->answers)
        for (const auto& h : a->pos_hosts) work.push_back(h.table);
    }
    unlink(t);
    t->status = TableStatus::Abolished;
    auto it = live_.find(t->id);
    graveyard_.push_back(std::move(it->second));
    live_.erase(it);
    done.push_back(t);
  }
  return done;
}

std::vector<Table*> TableSpace::tables_of(PredKey pred) const {
  auto it = by_pred_.find(pred);
  if (it == by_pred_.end()) return {};
  return it->second.order;
}

std::vector<Table*> TableSpace::all_tables() const {
  std::vector<Table*> out;
  out.reserve(live_.size());
  for (const auto& [id, t] : live_) out.push_back(t.get());
  std::sort(out.begin(), out.end(), [](const Table* a, const Table* b) { return a->id < b->id; });
  return out;
}

size_t TableSpace::gc() {
  std::unordered_set<const Table*> referenced;
  auto scan = [&](const Table& t) {
    for (const auto& a : t.answers)
      for (const auto& d : a->delays)
        for (const auto& l : d) referenced.insert(l.table);
  };
  for (const auto& [id, t] : live_) scan(*t);
  for (const auto& t : pseudo_) scan(*t);
  size_t freed = 0;
  std::vector<std::unique_ptr<Table>> keep;
  std::vector<std::unique_ptr<Table>> drop;
  for (auto& t : graveyard_) {
    if (t->iter_refs == 0 && !referenced.count(t.get()))
      drop.push_back(std::move(t));
    else
      keep.push_back(std::move(t));
  }
  graveyard_ = std::move(keep);
  std::unordered_set<const Table*> dropped;
  for (const auto& t : drop) dropped.insert(t.get());
  // Scrub back references held by surviving tables.
  auto scrub = [&](Table& t) {
    auto gone = [&](const AnswerRef& r) { return dropped.count(r.table) > 0; };
    t.neg_hosts.erase(std::remove_if(t.neg_hosts.begin(), t.neg_hosts.end(), gone), t.neg_hosts.end());
    for (auto& a : t.answers)
      a->pos_hosts.erase(std::remove_if(a->pos_hosts.begin(), a->pos_hosts.end(), gone), a->pos_hosts.end());
    for (auto it = t.consumed.begin(); it != t.consumed.end();)
      it = dropped.count(*it) ? t.consumed.erase(it) : std::next(it);
    for (auto it = t.consumed_by.begin(); it != t.consumed_by.end();)
      it = dropped.count(*it) ? t.consumed_by.erase(it) : std::next(it);
    for (auto it = t.edges.begin(); it != t.edges.end();)
      it = dropped.count(it->first) ? t.edges.erase(it) : std::next(it);
  };
  if (!dropped.empty()) {
    for (auto& [id, t] : live_) scrub(*t);
    for (auto& t : graveyard_) scrub(*t);
    for (auto& t : pseudo_) scrub(*t);
  }
  freed = drop.size();
  reclaimed_ += freed;
  return freed;
}

TableStats TableSpace::stats() const {
  TableStats s;
  std::map<std::string, TableStats::PerPred> per;
  for (const auto& [key, pt] : by_pred_) {
    auto& p = per[key.str()];
    p.pred = key;
    p.trie_nodes += pt.subgoals.node_count();
    for (const Table* t : pt.order) {
      ++p.tables;
      p.answers += t->live_answers;
      p.conditional += t->conditional_answers;
      p.trie_nodes += t->answer_trie.node_count();
    }
  }
  for (auto& [name, p] : per) {
    s.tables += p.tables;
    s.answers += p.answers;
    s.conditional += p.conditional;
    s.trie_nodes += p.trie_nodes;
    s.preds.push_back(p);
  }
  s.graveyard = graveyard_.size();
  s.reclaimed = reclaimed_;
  return s;
}

}  // namespace tlpe
