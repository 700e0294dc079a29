#include <algorithm>

#include "engine_impl.hpp"

namespace tlpe {

namespace {

Answer* answer_of(const AnswerRef& r) { return r.table->answers[r.answer].get(); }

bool contains(const DelayList& d, const DelayLiteral& l) { return std::binary_search(d.begin(), d.end(), l); }

}  // namespace

void Engine::Impl::register_hosts(Table* t, Answer* a, const DelayList& d) {
  AnswerRef host{t, a->id};
  for (const auto& l : d) {
    if (l.negative)
      l.table->neg_hosts.push_back(host);
    else
      l.table->answers[l.answer]->pos_hosts.push_back(host);
  }
}

void Engine::Impl::on_unconditional(Table* t, Answer* a) {
  if (!a->pos_hosts.empty()) events.push_back({SimpEvent::PosTrue, t, a->id});
  events.push_back({SimpEvent::NegFalse, t, 0});
}

void Engine::Impl::on_deleted(Table* t, Answer* a) {
  if (!a->pos_hosts.empty()) events.push_back({SimpEvent::PosFalse, t, a->id});
  if (t->complete() && t->live_answers == 0) events.push_back({SimpEvent::NegTrue, t, 0});
}

void Engine::Impl::on_table_false(Table* t) { events.push_back({SimpEvent::NegTrue, t, 0}); }

void Engine::Impl::process_events() {
  if (in_simplify) return;
  in_simplify = true;
  struct Guard {
    bool& flag;
    ~Guard() { flag = false; }
  } guard{in_simplify};

  while (!events.empty()) {
    SimpEvent ev = events.front();
    events.pop_front();
    Table* t = ev.table;
    std::vector<AnswerRef> hosts;
    DelayLiteral lit;
    bool literal_true = false;
    switch (ev.kind) {
      case SimpEvent::NegTrue:
        hosts = std::move(t->neg_hosts);
        t->neg_hosts.clear();
        lit = DelayLiteral{true, t, 0};
        literal_true = true;
        break;
      case SimpEvent::NegFalse:
        hosts = std::move(t->neg_hosts);
        t->neg_hosts.clear();
        lit = DelayLiteral{true, t, 0};
        for (auto& w : t->neg_waiters) w->done = true;
        t->neg_waiters.clear();
        break;
      case SimpEvent::PosTrue:
      case SimpEvent::PosFalse: {
        Answer* a = t->answers[ev.answer].get();
        hosts = std::move(a->pos_hosts);
        a->pos_hosts.clear();
        lit = DelayLiteral{false, t, ev.answer};
        literal_true = ev.kind == SimpEvent::PosTrue;
        break;
      }
    }
    for (const auto& h : hosts) {
      if (!tables.is_live(h.table) && !h.table->pseudo) continue;
      Answer* a = answer_of(h);
      if (a->status != AnswerStatus::Conditional) continue;
      std::vector<DelayList> lists;
      bool touched = false;
      for (auto& d : a->delays) {
        if (!contains(d, lit)) {
          lists.push_back(d);
          continue;
        }
        touched = true;
        if (literal_true) {
          DelayList nd;
          for (const auto& l : d)
            if (!(l == lit)) nd.push_back(l);
          lists.push_back(std::move(nd));
        }
      }
      if (!touched) continue;
      ++counters.simplifications;
      if (!h.table->pseudo) report(StepOp::Simplification, a->atom, h.table->dfn);
      if (lists.empty()) {
        tables.delete_answer(h.table, a);
        on_deleted(h.table, a);
      } else {
        tables.set_delays(h.table, a, std::move(lists));
        if (a->status == AnswerStatus::Unconditional) on_unconditional(h.table, a);
      }
    }
  }
}

// Conditional answers of a completed SCC that cannot be supported through
// positive delay literals inside the SCC are unfounded and removed.
void Engine::Impl::answer_completion(const std::vector<Table*>& scc) {
  std::unordered_set<const Table*> members(scc.begin(), scc.end());
  std::unordered_set<const Answer*> supported;
  std::vector<std::pair<Table*, Answer*>> conditional;
  for (Table* t : scc)
    for (auto& a : t->answers)
      if (a->status == AnswerStatus::Conditional) conditional.push_back({t, a.get()});
  if (conditional.empty()) return;

  auto literal_ok = [&](const DelayLiteral& l) {
    if (l.negative) return true;
    const Answer* b = l.table->answers[l.answer].get();
    if (!b->live()) return false;
    if (b->status == AnswerStatus::Unconditional) return true;
    if (!members.count(l.table)) return true;
    return supported.count(b) > 0;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto& [t, a] : conditional) {
      if (supported.count(a) || a->status != AnswerStatus::Conditional) continue;
      for (const auto& d : a->delays) {
        if (std::all_of(d.begin(), d.end(), literal_ok)) {
          supported.insert(a);
          changed = true;
          break;
        }
      }
    }
  }
  for (auto& [t, a] : conditional) {
    if (a->status != AnswerStatus::Conditional || supported.count(a)) continue;
    ++counters.simplifications;
    if (!t->pseudo) report(StepOp::Simplification, a->atom, t->dfn);
    tables.delete_answer(t, a);
    on_deleted(t, a);
  }
  process_events();
}

std::vector<ResidualClause> Engine::Impl::residual_of(Table* t, const Term* filter) {
  std::vector<ResidualClause> out;
  for (const auto& a : t->answers) {
    if (!a->live()) continue;
    if (filter) {
      Bindings env;
      Term probe = offset_vars(a->atom, filter->var_bound());
      if (!unify(*filter, probe, env, true)) continue;
    }
    if (a->status == AnswerStatus::Unconditional) {
      out.push_back(ResidualClause{a->atom, {}});
      continue;
    }
    for (const auto& d : a->delays) {
      ResidualClause rc{a->atom, {}};
      for (const auto& l : d) {
        if (l.negative)
          rc.body.push_back(Term::compound(sym.tnot, {l.table->subgoal}));
        else
          rc.body.push_back(l.table->answers[l.answer]->atom);
      }
      out.push_back(std::move(rc));
    }
  }
  return out;
}

}  // namespace tlpe
