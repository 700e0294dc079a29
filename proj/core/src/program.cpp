#include "tlpe/program.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include "tlpe/error.hpp"
#include "tlpe/term_io.hpp"

namespace tlpe {

namespace {

bool is_functor(const Term& t, std::string_view name, size_t arity) {
  return t.is_callable() && t.arity() == arity && t.symbol().name() == name;
}

[[noreturn]] void bad_spec(const std::string& what, const Term& t) {
  throw Error(ErrorKind::BadSpec, what + ": " + format_term(t));
}

std::optional<PredKey> pred_indicator(const Term& t) {
  if (!is_functor(t, "/", 2)) return std::nullopt;
  const Term& n = t.arg(0);
  const Term& a = t.arg(1);
  if (!n.is_atom() || !a.is_int() || a.int_value() < 0) return std::nullopt;
  return PredKey{n.symbol(), static_cast<uint32_t>(a.int_value())};
}

void flatten_conj(const Term& t, std::vector<Term>& out) {
  if (is_functor(t, ",", 2)) {
    flatten_conj(t.arg(0), out);
    flatten_conj(t.arg(1), out);
  } else {
    out.push_back(t);
  }
}

uint64_t label_hash(const TrieLabel& l) { return TrieLabelHash()(l); }

// Up to five preorder symbols of t, stopping at the first variable.
std::vector<TrieLabel> star_prefix(const Term& t) {
  std::vector<TrieLabel> out;
  std::vector<Term> stack{t};
  while (!stack.empty() && out.size() < 5) {
    Term cur = stack.back();
    stack.pop_back();
    if (cur.is_var()) break;
    out.push_back(principal_label(cur));
    for (size_t i = cur.arity(); i-- > 0;) stack.push_back(cur.arg(i));
  }
  return out;
}

bool prefixes_compatible(const std::vector<TrieLabel>& a, const std::vector<TrieLabel>& b) {
  size_t n = std::min(a.size(), b.size());
  for (size_t i = 0; i < n; ++i)
    if (!(a[i] == b[i])) return false;
  return true;
}

// Bucket key of a joint index for the given term; nullopt when some
// component position is unbound.
std::optional<uint64_t> joint_key(const JointIndex& j, const Term& head) {
  uint64_t h = 1469598103934665603ull;
  for (const auto& c : j.components) {
    if (c.arg == 0 || c.arg > head.arity()) return std::nullopt;
    const Term& a = head.arg(c.arg - 1);
    if (a.is_var()) return std::nullopt;
    h = (h ^ label_hash(principal_label(a))) * 1099511628211ull;
  }
  return h;
}

std::vector<ClauseRef> merge_by_seq(std::vector<const std::deque<ClauseRef>*> lists) {
  std::vector<ClauseRef> out;
  size_t total = 0;
  for (auto* l : lists) total += l->size();
  out.reserve(total);
  for (auto* l : lists) out.insert(out.end(), l->begin(), l->end());
  if (lists.size() > 1)
    std::stable_sort(out.begin(), out.end(), [](const ClauseRef& a, const ClauseRef& b) { return a->seq < b->seq; });
  return out;
}

void erase_from(std::deque<ClauseRef>& d, const Clause* c) {
  auto it = std::find_if(d.begin(), d.end(), [c](const ClauseRef& r) { return r.get() == c; });
  if (it != d.end()) d.erase(it);
}

}  // namespace

bool Clause::is_fact() const { return body.is_atom() && body.symbol().name() == "true"; }

std::string JointIndex::str() const {
  std::string out;
  for (size_t i = 0; i < components.size(); ++i) {
    if (i) out += '+';
    if (components[i].star)
      out += "*(" + std::to_string(components[i].arg) + ")";
    else
      out += std::to_string(components[i].arg);
  }
  return out;
}

std::string IndexSpec::str() const {
  if (trie) return "trie";
  std::string out = "[";
  for (size_t i = 0; i < joints.size(); ++i) {
    if (i) out += ',';
    out += joints[i].str();
  }
  return out + "]";
}

// ---------------------------------------------------------------------------
// Clause construction

Term prepare_body(const Term& body, const Term& cut_var, bool& has_cut) {
  if (body.is_var()) return Term::compound("call", {body});
  if (body.is_number()) throw Error(ErrorKind::Type, "callable expected, got " + format_term(body));
  if (body.is_atom() && body.symbol().name() == "!") {
    has_cut = true;
    return Term::compound("$cut", {cut_var});
  }
  if (is_functor(body, ",", 2) || is_functor(body, ";", 2) || is_functor(body, "->", 2)) {
    return Term::compound(body.symbol(), {prepare_body(body.arg(0), cut_var, has_cut),
                                          prepare_body(body.arg(1), cut_var, has_cut)});
  }
  if (is_functor(body, "tnot", 1) && is_functor(body.arg(0), "tnot", 1))
    throw Error(ErrorKind::Syntax, "nested tnot is not supported: " + format_term(body));
  return body;
}

Clause make_clause(const Term& t) {
  Term head = t;
  Term body = Term::atom("true");
  if (is_functor(t, ":-", 2)) {
    head = t.arg(0);
    body = t.arg(1);
  }
  if (!head.is_callable()) throw Error(ErrorKind::Type, "clause head must be callable: " + format_term(head));
  if (head.symbol().name() == "," || head.symbol().name() == ";" || head.symbol().name() == "->")
    throw Error(ErrorKind::Permission, "cannot define control construct " + format_term(head));
  Term cut = Term::var(std::max(head.var_bound(), body.var_bound()));
  bool has_cut = false;
  Term prepared = prepare_body(body, cut, has_cut);
  // Renaming '$c'(Cut, H, B) makes the cut variable id 0 when present.
  Renamer r;
  Term packed = r(Term::compound("$c", {has_cut ? cut : Term::atom("none"), head, prepared}));
  Clause c;
  c.head = packed.arg(1);
  c.body = packed.arg(2);
  c.nvars = r.count();
  c.has_cut = has_cut;
  return c;
}

ParsedProgram parse_program(std::string_view text) {
  ParsedProgram out;
  for (auto& rt : read_terms(text)) {
    const Term& t = rt.term;
    if (is_functor(t, ":-", 1) || is_functor(t, "?-", 1)) {
      const Term& d = t.arg(0);
      ProgramItem item;
      item.is_directive = true;
      item.directive.term = d;
      item.directive.line = rt.line;
      if (is_functor(d, "table", 1)) {
        item.directive.kind = DirectiveKind::Table;
      } else if (is_functor(d, "dynamic", 1)) {
        item.directive.kind = DirectiveKind::Dynamic;
      } else if (is_functor(d, "use_incremental_dynamic", 1)) {
        item.directive.kind = DirectiveKind::UseIncrementalDynamic;
      } else if (is_functor(d, "index", 2)) {
        item.directive.kind = DirectiveKind::Index;
      } else if (d.is_atom() && d.symbol().name() == "auto_table") {
        item.directive.kind = DirectiveKind::AutoTable;
      } else {
        throw Error(ErrorKind::UnknownDirective,
                    format_term(d, &rt.var_names) + " at line " + std::to_string(rt.line));
      }
      out.push_back(std::move(item));
    } else {
      ProgramItem item;
      item.clause = make_clause(t);
      out.push_back(std::move(item));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Declaration parsing

IndexSpec parse_index_spec(const Term& spec, uint32_t arity) {
  IndexSpec out;
  if (spec.is_atom() && spec.symbol().name() == "trie") {
    out.trie = true;
    return out;
  }
  std::vector<Term> items;
  if (spec.is_cons() || spec.is_nil()) {
    for (Term cur = spec; cur.is_cons(); cur = cur.arg(1)) items.push_back(cur.arg(0));
  } else {
    items.push_back(spec);
  }
  auto component = [&](const Term& c) {
    IndexComponent ic;
    Term n = c;
    if (is_functor(c, "*", 1)) {
      ic.star = true;
      n = c.arg(0);
    }
    if (!n.is_int() || n.int_value() < 1 || n.int_value() > arity) bad_spec("bad index argument", c);
    ic.arg = static_cast<uint32_t>(n.int_value());
    return ic;
  };
  for (const auto& item : items) {
    JointIndex j;
    std::vector<Term> parts;
    std::function<void(const Term&)> split = [&](const Term& t) {
      if (is_functor(t, "+", 2)) {
        split(t.arg(0));
        split(t.arg(1));
      } else {
        parts.push_back(t);
      }
    };
    split(item);
    if (parts.size() > 3) bad_spec("joint index longer than 3", item);
    for (const auto& p : parts) j.components.push_back(component(p));
    out.joints.push_back(std::move(j));
  }
  return out;
}

std::optional<SubsumptionSpec> parse_subsumption_spec(const Term& spec) {
  if (!spec.is_compound()) return std::nullopt;
  std::optional<SubsumptionSpec> out;
  for (size_t i = 0; i < spec.arity(); ++i) {
    const Term& a = spec.arg(i);
    if (a.is_var()) continue;
    if (out) bad_spec("only one subsumed argument is supported", spec);
    SubsumptionSpec s;
    s.arg = static_cast<uint32_t>(i);
    if (a.is_atom()) {
      auto n = a.symbol().name();
      if (n == "min") s.kind = AggregateKind::Min;
      else if (n == "max") s.kind = AggregateKind::Max;
      else if (n == "sum") s.kind = AggregateKind::Sum;
      else if (n == "count") s.kind = AggregateKind::Count;
      else bad_spec("unknown aggregate", a);
    } else if (is_functor(a, "-", 2)) {
      auto pi = pred_indicator(a.arg(0));
      if (!pi || pi->arity != 3) bad_spec("lattice join must be name/3", a);
      s.kind = AggregateKind::Lattice;
      s.relation = *pi;
      s.identity = canonicalize(a.arg(1));
    } else if (auto pi = pred_indicator(a)) {
      if (pi->arity == 3) {
        s.kind = AggregateKind::Lattice;
      } else if (pi->arity == 2) {
        s.kind = AggregateKind::PartialOrder;
      } else {
        bad_spec("expected join/3 or leq/2", a);
      }
      s.relation = *pi;
    } else {
      bad_spec("bad answer subsumption argument", a);
    }
    out = s;
  }
  if (!out) bad_spec("answer subsumption spec without a subsumed argument", spec);
  return out;
}

// ---------------------------------------------------------------------------
// Store

class ProgramStore::Pred {
 public:
  struct JointStore {
    JointIndex spec;
    std::unordered_map<uint64_t, std::deque<ClauseRef>> buckets;
    std::deque<ClauseRef> wild;
  };

  PredicateInfo info;
  std::deque<ClauseRef> clauses;    // sequence order
  std::deque<ClauseRef> unindexed;  // clauses predating the index declaration
  std::vector<JointStore> joints;
  Trie trie;
  std::unordered_map<uint64_t, ClauseRef> trie_facts;
  uint64_t next_trie_id = 1;

  void reset_index() {
    joints.clear();
    unindexed.clear();
    trie.clear();
    trie_facts.clear();
    for (const auto& j : info.index.joints) joints.push_back({j, {}, {}});
  }

  void index_clause(const ClauseRef& c, bool front) {
    for (auto& j : joints) {
      auto key = joint_key(j.spec, c->head);
      auto& list = key ? j.buckets[*key] : j.wild;
      if (front)
        list.push_front(c);
      else
        list.push_back(c);
    }
  }

  void unindex_clause(const Clause* c) {
    for (auto& j : joints) {
      auto key = joint_key(j.spec, c->head);
      if (key) {
        auto it = j.buckets.find(*key);
        if (it != j.buckets.end()) {
          erase_from(it->second, c);
          if (it->second.empty()) j.buckets.erase(it);
        }
      } else {
        erase_from(j.wild, c);
      }
    }
    erase_from(unindexed, c);
  }
};

ProgramStore::ProgramStore() = default;
ProgramStore::~ProgramStore() = default;

ProgramStore::Pred& ProgramStore::pred(PredKey key) {
  auto it = preds_.find(key);
  if (it != preds_.end()) return *it->second;
  auto p = std::make_unique<Pred>();
  p->info.key = key;
  if (key.arity > 0) p->info.index.joints.push_back(JointIndex{{IndexComponent{false, 1}}});
  p->reset_index();
  auto& ref = *p;
  preds_.emplace(key, std::move(p));
  return ref;
}

const ProgramStore::Pred* ProgramStore::find_pred(PredKey key) const {
  auto it = preds_.find(key);
  return it == preds_.end() ? nullptr : it->second.get();
}

PredicateInfo& ProgramStore::info(PredKey key) { return pred(key).info; }

const PredicateInfo* ProgramStore::find_info(PredKey key) const {
  const Pred* p = find_pred(key);
  return p ? &p->info : nullptr;
}

bool ProgramStore::is_defined(PredKey key) const {
  const Pred* p = find_pred(key);
  return p && (p->info.declared || p->info.dynamic || p->info.tabled || !p->clauses.empty() || !p->trie.empty());
}

std::vector<PredKey> ProgramStore::predicates() const {
  std::vector<PredKey> out;
  for (const auto& [k, p] : preds_)
    if (is_defined(k)) out.push_back(k);
  std::sort(out.begin(), out.end(), pred_key_less);
  return out;
}

void ProgramStore::set_index(PredKey key, IndexSpec spec) {
  Pred& p = pred(key);
  if (spec.trie) {
    for (const auto& c : p.clauses)
      if (!c->is_fact()) throw Error(ErrorKind::BadSpec, "trie index requires facts only: " + key.str());
  }
  auto existing = p.clauses;
  p.info.index = std::move(spec);
  p.reset_index();
  if (p.info.index.trie) {
    p.clauses.clear();
    for (const auto& c : existing) {
      auto id = p.next_trie_id++;
      if (p.trie.insert(c->head.args(), id).second) p.trie_facts.emplace(id, c);
    }
  } else {
    p.unindexed = existing;
  }
}

void ProgramStore::clear_clauses(PredKey key) {
  Pred& p = pred(key);
  p.clauses.clear();
  p.reset_index();
}

void ProgramStore::add_static(const Clause& c) {
  PredKey key = pred_key_of(c.head);
  Pred& p = pred(key);
  if (p.info.library) {
    p.info.library = false;
    clear_clauses(key);
  }
  auto ref = std::make_shared<Clause>(c);
  ref->seq = ++back_seq_;
  if (p.info.index.trie) {
    if (!c.is_fact()) throw Error(ErrorKind::Permission, "rule for trie-indexed predicate " + key.str());
    auto id = p.next_trie_id++;
    if (p.trie.insert(c.head.args(), id).second) p.trie_facts.emplace(id, ref);
    return;
  }
  p.clauses.push_back(ref);
  p.index_clause(ref, false);
}

bool ProgramStore::assert_clause(const Clause& c, Position pos) {
  PredKey key = pred_key_of(c.head);
  Pred& p = pred(key);
  if (!p.info.dynamic) {
    if (!p.clauses.empty() || !p.trie.empty())
      throw Error(ErrorKind::Permission, "cannot modify static predicate " + key.str());
    p.info.dynamic = true;
    p.info.library = false;
  }
  p.info.declared = true;
  auto ref = std::make_shared<Clause>(c);
  if (p.info.index.trie) {
    if (!c.is_fact()) throw Error(ErrorKind::Permission, "cannot assert a rule to trie-indexed " + key.str());
    auto id = p.next_trie_id;
    auto [leaf, fresh] = p.trie.insert(c.head.args(), id);
    if (!fresh) return false;
    ++p.next_trie_id;
    ref->seq = ++back_seq_;
    p.trie_facts.emplace(id, ref);
    return true;
  }
  bool front = pos == Position::Front;
  ref->seq = front ? --front_seq_ : ++back_seq_;
  if (front)
    p.clauses.push_front(ref);
  else
    p.clauses.push_back(ref);
  p.index_clause(ref, front);
  return true;
}

bool ProgramStore::assert_term(const Term& t, Position pos) { return assert_clause(make_clause(t), pos); }

bool ProgramStore::erase_clause(const ClauseRef& c) {
  PredKey key = pred_key_of(c->head);
  auto it = preds_.find(key);
  if (it == preds_.end()) return false;
  Pred& p = *it->second;
  if (p.info.index.trie) {
    auto* leaf = p.trie.find(c->head.args());
    if (!leaf) return false;
    p.trie_facts.erase(leaf->payload);
    p.trie.erase(leaf);
    return true;
  }
  auto ci = std::find_if(p.clauses.begin(), p.clauses.end(), [&](const ClauseRef& r) { return r.get() == c.get(); });
  if (ci == p.clauses.end()) return false;
  p.unindex_clause(c.get());
  const_cast<Clause*>(c.get())->erased = true;
  p.clauses.erase(ci);
  return true;
}

bool ProgramStore::retract_clause(const Term& pattern) {
  Clause pc = make_clause(pattern);
  PredKey key = pred_key_of(pc.head);
  auto it = preds_.find(key);
  if (it == preds_.end()) return false;
  Pred& p = *it->second;
  if (!p.info.dynamic && (!p.clauses.empty() || !p.trie.empty()))
    throw Error(ErrorKind::Permission, "cannot modify static predicate " + key.str());
  Term want = canonicalize(Term::compound(":-", {pc.head, pc.body}));
  for (const auto& c : lookup_clauses(pc.head).clauses) {
    if (variant(Term::compound(":-", {c->head, c->body}), want)) return erase_clause(c);
  }
  return false;
}

Lookup ProgramStore::lookup_clauses(const Term& goal) const {
  Lookup out;
  const Pred* p = find_pred(pred_key_of(goal));
  if (!p) {
    out.index_used = "none";
    return out;
  }
  if (p->info.index.trie) {
    out.index_used = "trie";
    for (auto* leaf : p->trie.unifiable_leaves(goal.args())) {
      auto it = p->trie_facts.find(leaf->payload);
      if (it != p->trie_facts.end()) out.clauses.push_back(it->second);
    }
    return out;
  }
  for (const auto& j : p->joints) {
    auto key = joint_key(j.spec, goal);
    if (!key) continue;
    out.index_used = j.spec.str();
    static const std::deque<ClauseRef> kEmpty;
    auto b = j.buckets.find(*key);
    std::vector<const std::deque<ClauseRef>*> lists{b == j.buckets.end() ? &kEmpty : &b->second};
    if (!j.wild.empty()) lists.push_back(&j.wild);
    if (!p->unindexed.empty()) lists.push_back(&p->unindexed);
    auto merged = merge_by_seq(lists);
    bool has_star = std::any_of(j.spec.components.begin(), j.spec.components.end(),
                                [](const IndexComponent& c) { return c.star; });
    if (!has_star) {
      out.clauses = std::move(merged);
      return out;
    }
    std::vector<std::vector<TrieLabel>> goal_prefixes;
    for (const auto& c : j.spec.components)
      goal_prefixes.push_back(c.star ? star_prefix(goal.arg(c.arg - 1)) : std::vector<TrieLabel>{});
    for (auto& c : merged) {
      bool ok = true;
      for (size_t i = 0; i < j.spec.components.size() && ok; ++i) {
        if (!j.spec.components[i].star) continue;
        ok = prefixes_compatible(goal_prefixes[i], star_prefix(c->head.arg(j.spec.components[i].arg - 1)));
      }
      if (ok) out.clauses.push_back(std::move(c));
    }
    return out;
  }
  out.index_used = "none";
  out.clauses.assign(p->clauses.begin(), p->clauses.end());
  return out;
}

std::vector<ClauseRef> ProgramStore::all_clauses(PredKey key) const {
  const Pred* p = find_pred(key);
  if (!p) return {};
  if (p->info.index.trie) {
    std::vector<ClauseRef> out;
    p->trie.for_each_leaf([&](Trie::Node* leaf) {
      auto it = p->trie_facts.find(leaf->payload);
      if (it != p->trie_facts.end()) out.push_back(it->second);
    });
    return out;
  }
  return {p->clauses.begin(), p->clauses.end()};
}

size_t ProgramStore::clause_count(PredKey key) const {
  const Pred* p = find_pred(key);
  if (!p) return 0;
  return p->info.index.trie ? p->trie.size() : p->clauses.size();
}

size_t ProgramStore::trie_node_count(PredKey key) const {
  const Pred* p = find_pred(key);
  return p ? p->trie.node_count() : 0;
}

// ---------------------------------------------------------------------------
// Directives and consult

void ProgramStore::apply_directive(const Directive& d) {
  const Term& t = d.term;
  auto for_each_spec = [](const Term& specs, const std::function<void(const Term&)>& fn) {
    std::vector<Term> items;
    flatten_conj(specs, items);
    for (const auto& s : items) {
      if (s.is_cons()) {
        for (Term cur = s; cur.is_cons(); cur = cur.arg(1)) fn(cur.arg(0));
      } else {
        fn(s);
      }
    }
  };
  switch (d.kind) {
    case DirectiveKind::AutoTable: auto_table_ = true; return;
    case DirectiveKind::Index: {
      auto pi = pred_indicator(t.arg(0));
      if (!pi) bad_spec("index expects name/arity", t.arg(0));
      set_index(*pi, parse_index_spec(t.arg(1), pi->arity));
      info(*pi).declared = true;
      return;
    }
    case DirectiveKind::Dynamic:
    case DirectiveKind::UseIncrementalDynamic: {
      Term specs = t.arg(0);
      bool incr = d.kind == DirectiveKind::UseIncrementalDynamic;
      if (is_functor(specs, "as", 2)) {
        std::vector<Term> opts;
        flatten_conj(specs.arg(1), opts);
        for (const auto& o : opts) {
          if (o.is_atom() && o.symbol().name() == "incremental")
            incr = true;
          else if (!(o.is_atom() && o.symbol().name() == "opaque"))
            bad_spec("unknown dynamic option", o);
        }
        specs = specs.arg(0);
      }
      for_each_spec(specs, [&](const Term& s) {
        auto pi = pred_indicator(s);
        if (!pi) bad_spec("expected name/arity", s);
        auto& i = info(*pi);
        i.dynamic = true;
        i.declared = true;
        i.library = false;
        if (incr) i.incremental_dynamic = true;
      });
      return;
    }
    case DirectiveKind::Table: {
      Term specs = t.arg(0);
      std::optional<TablingMode> mode;
      bool incremental = false;
      if (is_functor(specs, "as", 2)) {
        std::vector<Term> opts;
        flatten_conj(specs.arg(1), opts);
        for (const auto& o : opts) {
          std::string_view n = o.is_atom() ? o.symbol().name() : std::string_view();
          if (n == "variant") mode = TablingMode::Variant;
          else if (n == "subsumptive") mode = TablingMode::Subsumptive;
          else if (n == "incremental") incremental = true;
          else bad_spec("unknown table option", o);
        }
        specs = specs.arg(0);
      }
      if (incremental) {
        if (mode == TablingMode::Subsumptive) bad_spec("incremental tabling requires variant mode", t);
        mode = TablingMode::Variant;
      }
      for_each_spec(specs, [&](const Term& s) {
        std::optional<SubsumptionSpec> as;
        PredKey key;
        if (auto pi = pred_indicator(s)) {
          key = *pi;
        } else if (s.is_compound()) {
          as = parse_subsumption_spec(s);
          key = pred_key_of(s);
        } else {
          bad_spec("bad table spec", s);
        }
        auto& i = info(key);
        i.tabled = true;
        i.declared = true;
        if (mode) i.mode = mode;
        if (incremental) i.incremental = true;
        if (as) {
          if (i.mode == TablingMode::Subsumptive) bad_spec("answer subsumption requires variant call tabling", s);
          i.answer_subsumption = as;
          i.mode = TablingMode::Variant;
        }
      });
      return;
    }
  }
}

std::vector<PredKey> ProgramStore::consult(std::string_view text, bool library) {
  ParsedProgram prog = parse_program(text);
  std::vector<PredKey> defined;
  std::unordered_map<PredKey, bool, PredKeyHash> seen;
  for (auto& item : prog) {
    if (item.is_directive) {
      apply_directive(item.directive);
      continue;
    }
    PredKey key = pred_key_of(item.clause.head);
    if (!seen.count(key)) {
      seen[key] = true;
      defined.push_back(key);
      Pred& p = pred(key);
      if (library) {
        p.info.library = true;
      } else if (!p.info.dynamic || p.info.library) {
        // Reconsulting replaces an earlier definition.
        p.info.library = false;
        clear_clauses(key);
      }
    }
    Pred& p = pred(key);
    if (p.info.dynamic) {
      assert_clause(item.clause, Position::Back);
    } else {
      add_static(item.clause);
    }
  }
  return defined;
}

// ---------------------------------------------------------------------------
// auto_table

std::vector<PredKey> body_predicates(const Term& body) {
  std::vector<PredKey> out;
  std::vector<Term> stack{body};
  while (!stack.empty()) {
    Term g = stack.back();
    stack.pop_back();
    if (!g.is_callable()) continue;
    auto name = g.symbol().name();
    auto n = g.arity();
    if ((name == "," || name == ";" || name == "->") && n == 2) {
      stack.push_back(g.arg(1));
      stack.push_back(g.arg(0));
    } else if ((name == "\\+" || name == "tnot" || name == "call" || name == "once") && n == 1) {
      stack.push_back(g.arg(0));
    } else if ((name == "findall" || name == "bagof" || name == "setof") && n == 3) {
      stack.push_back(g.arg(1));
    } else if (name != "$cut") {
      out.push_back(pred_key_of(g));
    }
  }
  return out;
}

std::set<std::pair<uint32_t, uint32_t>> dependency_edges(const std::vector<PredKey>& preds,
                                                         const ProgramStore& store) {
  std::unordered_map<PredKey, uint32_t, PredKeyHash> idx;
  for (uint32_t i = 0; i < preds.size(); ++i) idx[preds[i]] = i;
  std::set<std::pair<uint32_t, uint32_t>> edges;
  for (uint32_t i = 0; i < preds.size(); ++i) {
    for (const auto& c : store.all_clauses(preds[i])) {
      for (const auto& q : body_predicates(c->body)) {
        auto it = idx.find(q);
        if (it != idx.end()) edges.emplace(i, it->second);
      }
    }
  }
  return edges;
}

namespace {

// Vertices lying on some cycle of the graph restricted to `alive`, and for
// each the id of its SCC.
std::vector<int> cyclic_components(size_t n, const std::vector<std::vector<uint32_t>>& adj,
                                   const std::vector<bool>& alive) {
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<bool> on_stack(n, false);
  std::vector<uint32_t> stack;
  int counter = 0, ncomp = 0;
  std::function<void(uint32_t)> dfs = [&](uint32_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (uint32_t w : adj[v]) {
      if (!alive[w]) continue;
      if (index[w] < 0) {
        dfs(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      while (true) {
        uint32_t w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = ncomp;
        if (w == v) break;
      }
      ++ncomp;
    }
  };
  for (uint32_t v = 0; v < n; ++v)
    if (alive[v] && index[v] < 0) dfs(v);
  std::vector<int> size(ncomp, 0);
  for (uint32_t v = 0; v < n; ++v)
    if (alive[v]) ++size[comp[v]];
  std::vector<int> out(n, -1);
  for (uint32_t v = 0; v < n; ++v) {
    if (!alive[v]) continue;
    bool self = std::find(adj[v].begin(), adj[v].end(), v) != adj[v].end();
    if (size[comp[v]] > 1 || self) out[v] = comp[v];
  }
  return out;
}

}  // namespace

std::vector<PredKey> greedy_feedback_set(const std::vector<PredKey>& vertices,
                                         const std::set<std::pair<uint32_t, uint32_t>>& edges,
                                         const std::vector<bool>& preselected) {
  size_t n = vertices.size();
  std::vector<std::vector<uint32_t>> adj(n);
  for (auto [a, b] : edges) adj[a].push_back(b);
  std::vector<bool> alive(n, true);
  for (size_t v = 0; v < n; ++v)
    if (v < preselected.size() && preselected[v]) alive[v] = false;
  std::vector<PredKey> chosen;
  while (true) {
    auto comp = cyclic_components(n, adj, alive);
    std::vector<uint64_t> indeg(n, 0), outdeg(n, 0);
    bool any = false;
    for (auto [a, b] : edges) {
      if (comp[a] < 0 || comp[a] != comp[b]) continue;
      ++outdeg[a];
      ++indeg[b];
      any = true;
    }
    if (!any) break;
    int best = -1;
    for (size_t v = 0; v < n; ++v) {
      if (comp[v] < 0) continue;
      if (best < 0) {
        best = static_cast<int>(v);
        continue;
      }
      uint64_t s = indeg[v] * outdeg[v], sb = indeg[best] * outdeg[best];
      if (s > sb || (s == sb && pred_key_less(vertices[v], vertices[best]))) best = static_cast<int>(v);
    }
    alive[best] = false;
    chosen.push_back(vertices[best]);
  }
  return chosen;
}

std::vector<PredKey> ProgramStore::auto_table() {
  std::vector<PredKey> verts;
  for (const auto& [k, p] : preds_)
    if (!p->info.library && (!p->clauses.empty() || !p->trie.empty())) verts.push_back(k);
  std::sort(verts.begin(), verts.end(), pred_key_less);
  auto edges = dependency_edges(verts, *this);
  std::vector<bool> pre(verts.size());
  for (size_t i = 0; i < verts.size(); ++i) pre[i] = info(verts[i]).tabled;
  auto chosen = greedy_feedback_set(verts, edges, pre);
  for (const auto& k : chosen) {
    auto& i = info(k);
    i.tabled = true;
    i.declared = true;
  }
  return chosen;
}

}  // namespace tlpe
