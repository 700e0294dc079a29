#include <algorithm>

#include "engine_impl.hpp"

namespace tlpe {

void Engine::Impl::run(size_t base, size_t frames_base) {
  while (step_once(base, frames_base)) {
  }
}

bool Engine::Impl::step_once(size_t base, size_t frames_base) {
  size_t h = frames.size() > frames_base ? std::max(frames.back().h, base) : base;
  if (stack.size() > h) {
    Work w = std::move(stack.back());
    stack.pop_back();
    execute(std::move(w));
    return true;
  }
  if (frames.size() > frames_base) {
    on_quiescent(frames_base);
    return true;
  }
  return false;
}

void Engine::Impl::execute(Work w) {
  if (interrupted.exchange(false)) throw Error(ErrorKind::Interrupted, "query interrupted");
  ++counters.steps;
  switch (w.kind) {
    case WorkKind::Node: resume(*w.node); break;
    case WorkKind::Consumer: exec_consumer(w.consumer); break;
    case WorkKind::Gen: exec_gen(*w.gen, w.gen); break;
    case WorkKind::NegReturn: exec_neg_return(w.waiter); break;
  }
}

void Engine::Impl::push_consumer(const std::shared_ptr<Consumer>& c) {
  stack.push_back(Work{WorkKind::Consumer, {}, c, {}, {}});
}

void Engine::Impl::init_table(Table* t, bool pseudo) {
  t->dfn = ++dfn_counter;
  t->status = TableStatus::Incomplete;
  incomplete.push_back(t);
  frames.push_back(Frame{t->dfn, t->dfn, stack.size(), current_run});
  ++sdg_version;
  if (!pseudo) report(StepOp::NewSubgoal, t->subgoal, t->dfn);
}

size_t Engine::Impl::frame_index_for(uint64_t dfn) const {
  auto it = std::upper_bound(frames.begin(), frames.end(), dfn,
                             [](uint64_t d, const Frame& f) { return d < f.dfn; });
  if (it == frames.begin()) return SIZE_MAX;
  return static_cast<size_t>(it - frames.begin()) - 1;
}

void Engine::Impl::add_edge(Table* from, Table* to, bool negative) {
  if (!to->incomplete() || !from->incomplete()) return;
  uint8_t bit = negative ? 2 : 1;
  uint8_t& e = from->edges[to];
  if (!(e & bit)) {
    e |= bit;
    ++sdg_version;
  }
  size_t g = frame_index_for(from->dfn);
  if (g != SIZE_MAX && to->dfn < frames[g].dfn) frames[g].low = std::min(frames[g].low, to->dfn);
}

// Answers of subsumptive-answer tables can still be replaced, so their
// consumers outside the SCC wait for completion under both strategies.
bool Engine::Impl::should_defer(const Consumer& c) const {
  if (!c.table->incomplete()) return false;
  if (cfg.strategy != Strategy::Local && !c.table->aspec) return false;
  size_t g = frame_index_for(c.table->dfn);
  return g != SIZE_MAX && c.node->owner->dfn < frames[g].dfn;
}

void Engine::Impl::schedule_consumer(const std::shared_ptr<Consumer>& c) {
  if (c->scheduled || c->deferred || c->dead) return;
  if (c->cursor >= c->table->answers.size()) return;
  if (should_defer(*c)) {
    c->deferred = true;
    deferred.emplace(c->node->owner->dfn, c);
    return;
  }
  c->scheduled = true;
  push_consumer(c);
}

void Engine::Impl::notify_consumers(Table* t) {
  for (const auto& c : t->consumers) schedule_consumer(c);
}

void Engine::Impl::release_deferred(uint64_t min_dfn) {
  auto it = deferred.lower_bound(min_dfn);
  std::vector<std::shared_ptr<Consumer>> ready;
  while (it != deferred.end()) {
    if (auto c = it->second.lock()) ready.push_back(std::move(c));
    it = deferred.erase(it);
  }
  for (auto& c : ready) {
    c->deferred = false;
    schedule_consumer(c);
  }
}

void Engine::Impl::on_quiescent(size_t frames_base) {
  Frame& f = frames.back();
  if (f.low < f.dfn) {
    if (frames.size() - 1 <= frames_base)
      throw Error(ErrorKind::NestedIncomplete, "nested evaluation depends on an incomplete table");
    uint64_t low = f.low;
    frames.pop_back();
    Frame& p = frames.back();
    p.low = std::min(p.low, low);
    release_deferred(p.dfn);
    return;
  }
  uint64_t root = f.dfn;
  const auto& sccs = segment_sccs(root);
  if (sccs.empty()) {
    frames.pop_back();
    return;
  }
  std::vector<Table*> scc = sccs.front();
  // A negative loop inside the SCC blocks completion. Suspensions are kept on
  // the awaited table, so any of them may be delayed, callers outside the SCC
  // included; the lowest-numbered node goes first.
  std::shared_ptr<NegWaiter> best;
  bool loop = false;
  for (Table* t : scc) {
    for (const auto& w : t->neg_waiters) {
      if (w->done) continue;
      if (std::find(scc.begin(), scc.end(), w->node->owner) != scc.end()) loop = true;
      if (!best || w->node->k < best->node->k) best = w;
    }
  }
  if (loop) {
    delay_waiter(best);
    return;
  }
  complete_scc(scc);
  auto it = std::lower_bound(incomplete.begin(), incomplete.end(), root,
                             [](const Table* t, uint64_t d) { return t->dfn < d; });
  if (it == incomplete.end() && !frames.empty() && frames.back().dfn == root) frames.pop_back();
}

// Tarjan over the incomplete tables numbered at or above root_dfn; SCCs come
// out sinks first.
const std::vector<std::vector<Table*>>& Engine::Impl::segment_sccs(uint64_t root_dfn) {
  if (scc_cache.version == sdg_version && scc_cache.root == root_dfn) return scc_cache.sccs;
  scc_cache.version = sdg_version;
  scc_cache.root = root_dfn;
  auto& out = scc_cache.sccs;
  out.clear();

  auto first = std::lower_bound(incomplete.begin(), incomplete.end(), root_dfn,
                                [](const Table* t, uint64_t d) { return t->dfn < d; });
  std::vector<Table*> verts(first, incomplete.end());
  if (verts.empty()) return out;
  std::unordered_map<Table*, uint32_t> index_of;
  index_of.reserve(verts.size());
  for (uint32_t i = 0; i < verts.size(); ++i) index_of.emplace(verts[i], i);

  std::vector<std::vector<uint32_t>> adj(verts.size());
  for (uint32_t i = 0; i < verts.size(); ++i) {
    for (const auto& [to, bits] : verts[i]->edges) {
      auto it = index_of.find(to);
      if (it != index_of.end()) adj[i].push_back(it->second);
    }
    std::sort(adj[i].begin(), adj[i].end());
  }

  constexpr uint32_t kUnvisited = UINT32_MAX;
  std::vector<uint32_t> index(verts.size(), kUnvisited), low(verts.size(), 0);
  std::vector<bool> on_stack(verts.size(), false);
  std::vector<uint32_t> tstack;
  std::vector<std::pair<uint32_t, size_t>> call;
  uint32_t counter = 0;
  for (uint32_t s = 0; s < verts.size(); ++s) {
    if (index[s] != kUnvisited) continue;
    call.push_back({s, 0});
    index[s] = low[s] = counter++;
    tstack.push_back(s);
    on_stack[s] = true;
    while (!call.empty()) {
      auto& [v, pos] = call.back();
      if (pos < adj[v].size()) {
        uint32_t w = adj[v][pos++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          tstack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      uint32_t done = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
      if (low[done] == index[done]) {
        std::vector<Table*> comp;
        uint32_t w;
        do {
          w = tstack.back();
          tstack.pop_back();
          on_stack[w] = false;
          comp.push_back(verts[w]);
        } while (w != done);
        std::sort(comp.begin(), comp.end(), [](const Table* a, const Table* b) { return a->dfn < b->dfn; });
        out.push_back(std::move(comp));
      }
    }
  }
  return out;
}

void Engine::Impl::complete_scc(const std::vector<Table*>& scc) {
  std::unordered_set<Table*> members(scc.begin(), scc.end());
  bool has_aggregate = false, negative_inside = false;
  for (Table* t : scc) {
    if (t->aspec) has_aggregate = true;
    for (const auto& [to, bits] : t->edges)
      if ((bits & 2) && members.count(to)) negative_inside = true;
  }
  if (has_aggregate && negative_inside)
    throw Error(ErrorKind::AnswerSubsumption, "answer subsumption through negation in one component");
  for (Table* t : scc) {
    for (const auto& [owner, n] : t->returned_to)
      if (!members.count(owner)) counters.early_returns += n;
    t->returned_to.clear();
  }
  for (Table* t : scc) {
    t->status = TableStatus::Complete;
    ++counters.completions;
    if (!t->pseudo) report(StepOp::Completion, t->subgoal, t->dfn);
  }
  // Members sit near the top of the incomplete stack.
  size_t found = 0;
  for (size_t i = incomplete.size(); i-- > 0 && found < members.size();) {
    if (members.count(incomplete[i])) {
      incomplete.erase(incomplete.begin() + static_cast<std::ptrdiff_t>(i));
      ++found;
    }
  }
  ++sdg_version;
  for (Table* t : scc) t->edges.clear();

  for (Table* t : scc) {
    auto consumers = std::move(t->consumers);
    t->consumers.clear();
    for (auto& c : consumers) {
      if (c->dead) continue;
      c->deferred = false;
      if (!c->scheduled && c->cursor < t->answers.size()) {
        c->scheduled = true;
        push_consumer(c);
      }
    }
    auto waiters = std::move(t->neg_waiters);
    t->neg_waiters.clear();
    for (auto& w : waiters) {
      if (!w->done) stack.push_back(Work{WorkKind::NegReturn, {}, {}, {}, w});
    }
  }
  for (Table* t : scc) {
    if (t->live_answers == 0) events.push_back({SimpEvent::NegTrue, t, 0});
  }
  process_events();
  answer_completion(scc);
  for (Table* t : scc) {
    if (t->conditional_answers > 0) t->nonstratified = true;
  }
}

void Engine::Impl::delay_waiter(const std::shared_ptr<NegWaiter>& w) {
  w->done = true;
  Table* target = w->target;
  auto& ws = target->neg_waiters;
  ws.erase(std::remove(ws.begin(), ws.end(), w), ws.end());
  ++counters.delays;
  const Node& n = *w->node;
  report(StepOp::Delaying, n.goals->goal, n.k);
  DelayList d = n.delays;
  d.push_back(DelayLiteral{true, target, 0});
  normalize_delays(d);
  push_node(make_node(n, nullptr, n.head, n.goals->next, std::move(d)));
}

}  // namespace tlpe
