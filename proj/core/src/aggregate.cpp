#include <algorithm>

#include "engine_impl.hpp"

namespace tlpe {

namespace {

Term replace_arg(const Term& atom, uint32_t arg, const Term& value) {
  std::vector<Term> args(atom.args().begin(), atom.args().end());
  args[arg] = value;
  return Term::compound(atom.symbol(), std::move(args));
}

int64_t scaled(const Term& t) {
  if (t.is_int()) return t.int_value() * kDecimalScale;
  if (t.is_dec()) return t.int_value();
  throw Error(ErrorKind::AnswerSubsumption, "numeric value expected, got " + format_term(t));
}

Term add_numbers(const Term& a, const Term& b) {
  if (a.is_int() && b.is_int()) return Term::integer(a.int_value() + b.int_value());
  return Term::decimal_scaled(scaled(a) + scaled(b));
}

}  // namespace

Term Engine::Impl::apply_join(const SubsumptionSpec& s, const Term& a, const Term& b) {
  ++counters.join_applications;
  switch (s.kind) {
    case AggregateKind::Min: return scaled(b) < scaled(a) ? b : a;
    case AggregateKind::Max: return scaled(b) > scaled(a) ? b : a;
    case AggregateKind::Sum:
    case AggregateKind::Count: return add_numbers(a, b);
    case AggregateKind::Lattice: {
      Term z = Term::var(std::max(a.var_bound(), b.var_bound()));
      Term call = Term::compound(s.relation.name, {a, b, z});
      auto results = nested_solve(z, call);
      if (results.empty())
        throw Error(ErrorKind::AnswerSubsumption, "join " + s.relation.str() + " failed on " + format_term(call));
      for (size_t i = 1; i < results.size(); ++i)
        if (results[i] != results[0])
          throw Error(ErrorKind::AnswerSubsumption, "join " + s.relation.str() + " is not deterministic");
      if (!results[0].ground())
        throw Error(ErrorKind::AnswerSubsumption, "join " + s.relation.str() + " produced a nonground value");
      return results[0];
    }
    case AggregateKind::PartialOrder: break;
  }
  throw Error(ErrorKind::AnswerSubsumption, "join applied to a partial order");
}

bool Engine::Impl::apply_leq(const SubsumptionSpec& s, const Term& a, const Term& b) {
  ++counters.join_applications;
  Term call = Term::compound(s.relation.name, {a, b});
  return !nested_solve(Term::atom("true"), call).empty();
}

void Engine::Impl::reduce_answer(Table* t, std::vector<Term> bindings, uint64_t k) {
  const SubsumptionSpec& s = *t->aspec;
  Term atom = instantiate_subgoal(t->subgoal, bindings);
  if (s.arg >= atom.arity()) throw Error(ErrorKind::AnswerSubsumption, "subsumed argument out of range");
  Term value = atom.arg(s.arg);
  if (!value.ground())
    throw Error(ErrorKind::AnswerSubsumption, "nonground subsumed argument in " + format_term(atom));
  Term key = canonicalize(replace_arg(atom, s.arg, Term::atom("$as")));

  auto insert = [&](const Term& v) {
    Term stored = replace_arg(atom, s.arg, v);
    auto b = bindings_for(t->subgoal, t->subgoal_vars, stored);
    Answer* a = tables.insert_answer(t, std::move(*b));
    report(StepOp::Answer, a->atom, k);
    on_unconditional(t, a);
    notify_consumers(t);
    process_events();
    return a;
  };

  if (s.kind == AggregateKind::PartialOrder) {
    std::vector<Answer*> same;
    for (auto& a : t->answers) {
      if (!a->live()) continue;
      if (canonicalize(replace_arg(a->atom, s.arg, Term::atom("$as"))) == key) same.push_back(a.get());
    }
    for (Answer* a : same)
      if (apply_leq(s, value, a->atom.arg(s.arg))) return;
    for (Answer* a : same) {
      if (apply_leq(s, a->atom.arg(s.arg), value)) {
        tables.delete_answer(t, a);
        on_deleted(t, a);
      }
    }
    insert(value);
    return;
  }

  Term contribution = value;
  if (s.duplicate_filter()) {
    if (!t->seen_contributions.insert(atom).second) return;
    if (s.kind == AggregateKind::Count) contribution = Term::integer(1);
  }
  auto it = t->lattice_index.find(key);
  if (it == t->lattice_index.end() || !t->answers[it->second]->live()) {
    Term first = contribution;
    if (s.kind == AggregateKind::Lattice && s.identity) first = apply_join(s, *s.identity, contribution);
    t->lattice_index[key] = insert(first)->id;
    return;
  }
  Answer* old = t->answers[it->second].get();
  Term current = old->atom.arg(s.arg);
  Term joined = apply_join(s, current, contribution);
  if (compare_terms(joined, current) == 0) return;
  tables.delete_answer(t, old);
  on_deleted(t, old);
  t->lattice_index[key] = insert(joined)->id;
}

}  // namespace tlpe
