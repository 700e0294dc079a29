#include <algorithm>

#include "engine_impl.hpp"

namespace tlpe {

void Engine::Impl::require_idle(const char* what) const {
  for (const Table* t : incomplete)
    if (!t->pseudo) throw Error(ErrorKind::TableIncomplete, std::string(what) + " while tables are incomplete");
}

void Engine::Impl::note_fact_change(PredKey pred) {
  const PredicateInfo* info = program.find_info(pred);
  if (info && info->incremental_dynamic) pending_incr.insert(pred);
}

// Tables reverse-reachable from the changed predicates, dependencies first.
std::vector<Table*> Engine::Impl::affected_tables(const std::vector<PredKey>& preds) {
  std::vector<Table*> seeds;
  for (PredKey p : preds) {
    auto it = dyn_dependents.find(p);
    if (it == dyn_dependents.end()) continue;
    for (Table* t : it->second)
      if (tables.is_live(t)) seeds.push_back(t);
  }
  std::sort(seeds.begin(), seeds.end(), [](const Table* a, const Table* b) { return a->id < b->id; });
  std::unordered_set<Table*> affected;
  std::vector<Table*> work = seeds;
  while (!work.empty()) {
    Table* t = work.back();
    work.pop_back();
    if (!affected.insert(t).second) continue;
    for (Table* up : t->consumed_by)
      if (tables.is_live(up)) work.push_back(up);
  }
  for (Table* t : affected) {
    const PredicateInfo* info = program.find_info(t->pred);
    if (!info || !info->incremental)
      throw Error(ErrorKind::Incremental, "table " + format_term(t->subgoal) + " depends on changed facts but is not incremental");
    if (t->mode == TablingMode::Subsumptive)
      throw Error(ErrorKind::Incremental, "subsumptive table " + format_term(t->subgoal) + " cannot be maintained");
    if (t->nonstratified)
      throw Error(ErrorKind::Incremental, "table " + format_term(t->subgoal) + " depends on a negative loop");
  }
  // Post-order over `consumed` restricted to the affected set.
  std::vector<Table*> roots(affected.begin(), affected.end());
  std::sort(roots.begin(), roots.end(), [](const Table* a, const Table* b) { return a->id < b->id; });
  std::vector<Table*> order;
  std::unordered_set<Table*> visited;
  for (Table* r : roots) {
    if (visited.count(r)) continue;
    std::vector<std::pair<Table*, std::vector<Table*>>> stack;
    auto deps = [&](Table* t) {
      std::vector<Table*> d;
      for (Table* c : t->consumed)
        if (affected.count(c)) d.push_back(c);
      std::sort(d.begin(), d.end(), [](const Table* a, const Table* b) { return a->id > b->id; });
      return d;
    };
    visited.insert(r);
    stack.push_back({r, deps(r)});
    while (!stack.empty()) {
      auto& [t, pending] = stack.back();
      if (!pending.empty()) {
        Table* next = pending.back();
        pending.pop_back();
        if (visited.insert(next).second) stack.push_back({next, deps(next)});
        continue;
      }
      order.push_back(t);
      stack.pop_back();
    }
  }
  return order;
}

std::vector<Table*> Engine::Impl::recompute(const std::vector<Table*>& affected) {
  if (affected.empty()) return {};
  std::vector<Term> goals;
  goals.reserve(affected.size());
  for (Table* t : affected) goals.push_back(t->subgoal);
  abolish_tables(affected);
  std::vector<Table*> out;
  for (const Term& g : goals) {
    Table* t = tables.find_variant(g);
    if (!t) t = evaluate_table(g);
    if (!t) continue;
    ++t->recompute_count;
    ++recompute_counts[t->pred];
    ++counters.recomputations;
    out.push_back(t);
  }
  return out;
}

void Engine::Impl::apply_change(const Change& c) {
  if (!c.fact.is_callable()) throw Error(ErrorKind::Type, "fact expected: " + format_term(c.fact));
  PredKey key = pred_key_of(c.fact);
  const PredicateInfo* info = program.find_info(key);
  if (!info || !info->incremental_dynamic)
    throw Error(ErrorKind::Incremental, key.str() + " is not declared use_incremental_dynamic");
  if (c.kind == ChangeKind::Assert)
    program.assert_term(c.fact);
  else
    program.retract_clause(c.fact);
}

std::vector<Table*> Engine::Impl::do_incr_update(const Change& c) {
  require_idle("incremental update");
  apply_change(c);
  std::vector<PredKey> preds(pending_incr.begin(), pending_incr.end());
  pending_incr.clear();
  PredKey key = pred_key_of(c.fact);
  if (std::find(preds.begin(), preds.end(), key) == preds.end()) preds.push_back(key);
  return recompute(affected_tables(preds));
}

std::vector<Table*> Engine::Impl::do_incr_table_update() {
  require_idle("incremental update");
  std::vector<PredKey> preds(pending_incr.begin(), pending_incr.end());
  pending_incr.clear();
  return recompute(affected_tables(preds));
}

std::vector<Table*> Engine::Impl::do_incr_invalidate(const Change& c) {
  require_idle("incremental invalidation");
  apply_change(c);
  auto affected = affected_tables({pred_key_of(c.fact)});
  for (Table* t : affected) t->status = TableStatus::Invalidated;
  return affected;
}

}  // namespace tlpe
