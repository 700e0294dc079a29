// Acceptance checks: one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tlpe/engine.hpp"
#include "tlpe/error.hpp"
#include "tlpe/term_io.hpp"
#include "tlpe/trie.hpp"
#include "tlpe_cli/session.hpp"

using namespace tlpe;
using Clock = std::chrono::steady_clock;

namespace {

const std::string kCorpus = TLPE_CORPUS_DIR;

Term T(std::string_view s) { return read_term(s).term; }

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::set<std::string> answer_set(Engine& e, std::string_view goal) {
  std::set<std::string> out;
  for (const auto& s : e.query(goal)) out.insert(format_solution(s));
  return out;
}

std::string edge_facts(const std::vector<oracle::Edge>& es) {
  std::string s;
  for (auto [a, b] : es) s += "edge(" + std::to_string(a) + "," + std::to_string(b) + ").\n";
  return s;
}

std::set<std::string> expected_reach(const std::vector<oracle::Edge>& es, int src, const std::string& var = "Y") {
  std::set<std::string> out;
  for (int y : oracle::bfs_reach(es, src)) out.insert(var + " = " + std::to_string(y));
  return out;
}

bool has_answer_subsumption(const std::string& text) {
  static const std::regex decl(R"(:-\s*table\s+\w+\()");
  return std::regex_search(text, decl);
}

// Answers of every corpus query, as "query -> answer" lines.
std::set<std::string> corpus_answers(const oracle::CorpusProgram& p, EngineConfig cfg) {
  Engine e(cfg);
  e.consult(p.text);
  std::set<std::string> out;
  for (const auto& q : p.queries) {
    auto sols = e.query(q);
    if (sols.empty()) out.insert(q + " -> no");
    for (const auto& s : sols) out.insert(q + " -> " + format_solution(s));
  }
  return out;
}

struct Result {
  bool ok = false;
  std::string detail;
};

using Check = std::function<Result()>;

Result c1_reach() {
  std::string lrec = ":- table reach/2.\nreach(X,Y) :- reach(X,Z), edge(Z,Y).\nreach(X,Y) :- edge(X,Y).\n";
  std::string rrec = ":- table reach/2.\nreach(X,Y) :- edge(X,Y).\nreach(X,Y) :- edge(X,Z), reach(Z,Y).\n";
  std::set<std::string> small{"Y = 2", "Y = 3"};
  std::mt19937_64 rng(1001);
  auto es = oracle::random_graph(rng, 100, 300);
  std::ostringstream d;
  bool ok = true;
  for (const auto& [name, prog] : {std::pair{"left", lrec}, std::pair{"right", rrec}}) {
    Engine e;
    e.consult(prog + "edge(1,2). edge(2,3).\n");
    bool small_ok = answer_set(e, "reach(1,Y)") == small;
    Engine g;
    g.consult(prog + edge_facts(es));
    auto start = Clock::now();
    bool graph_ok = answer_set(g, "reach(1,Y)") == expected_reach(es, 1);
    for (int src = 1; src <= 100 && graph_ok; src += 11)
      graph_ok = answer_set(g, "reach(" + std::to_string(src) + ",Y)") == expected_reach(es, src);
    double t = seconds_since(start);
    ok = ok && small_ok && graph_ok && t < 1.0;
    d << name << ": small " << (small_ok ? "ok" : "MISMATCH") << ", random " << (graph_ok ? "ok" : "MISMATCH")
      << " in " << t << " s; ";
  }
  return {ok, d.str()};
}

Result c2_pneg() {
  Engine e;
  std::map<StepOp, int> ops;
  e.set_trace([&](const StepReport& r) { ++ops[r.op]; });
  e.consult(read_file(kCorpus + "/pneg.P"));
  Truth b = e.truth_of(T("p(b)")), c = e.truth_of(T("p(c)")), a = e.truth_of(T("p(a)"));
  bool ok = b == Truth::True && c == Truth::True && a == Truth::False && ops[StepOp::Delaying] >= 1 &&
            ops[StepOp::Simplification] >= 1;
  std::ostringstream d;
  d << "p(b)=" << format_truth(b) << " p(c)=" << format_truth(c) << " p(a)=" << format_truth(a)
    << " delaying=" << ops[StepOp::Delaying] << " simplification=" << ops[StepOp::Simplification];
  return {ok, d.str()};
}

Result c3_nonstrat() {
  std::ostringstream out, err;
  tlpe::cli::Session s({}, out, err);
  s.load(kCorpus + "/pnonstrat.P");
  s.run_goal("p(X)");
  auto res = s.engine().get_residual(T("p(X)"));
  bool body_ok = res.size() == 1 && res[0].body.size() == 1 && format_term(res[0].body[0]) == "tnot(q(1))";
  bool ok = out.str() == "X = 1 undefined\n" && body_ok;
  std::string shown = out.str();
  if (!shown.empty() && shown.back() == '\n') shown.pop_back();
  return {ok, "output \"" + shown + "\", residual " + (res.empty() ? std::string("none") : res[0].str())};
}

Result c4_wfs_oracle() {
  std::mt19937_64 rng(404);
  auto start = Clock::now();
  int mismatches = 0, atoms_checked = 0;
  for (int round = 0; round < 50; ++round) {
    int atoms = 20 + (round * 180) / 49;
    int rules = std::min(600, atoms * 3);
    auto rs = oracle::random_ground_program(rng, atoms, rules);
    auto model = oracle::wfs(atoms, rs);
    Engine e;
    e.consult(oracle::program_text(atoms, rs));
    for (int a = 0; a < atoms; ++a) {
      Truth want = model[a] == oracle::TV::True ? Truth::True
                   : model[a] == oracle::TV::False ? Truth::False
                                                   : Truth::Undefined;
      if (e.truth_of(T("a(" + std::to_string(a) + ")")) != want) ++mismatches;
      ++atoms_checked;
    }
  }
  double t = seconds_since(start);
  std::ostringstream d;
  d << "50 programs, " << atoms_checked << " atoms, " << mismatches << " mismatches, " << t << " s";
  return {mismatches == 0 && t < 30.0, d.str()};
}

Result c5_petri() {
  std::string text = read_file(kCorpus + "/petri.P");
  std::vector<oracle::Transition> net;
  static const std::regex trans(R"(trans\(\[([^\]]*)\],\[([^\]]*)\],(\w+)\))");
  auto split = [](const std::string& s) {
    std::vector<std::string> v;
    std::stringstream ss(s);
    for (std::string x; std::getline(ss, x, ',');) v.push_back(x);
    std::sort(v.begin(), v.end());
    return v;
  };
  for (std::sregex_iterator it(text.begin(), text.end(), trans), end; it != end; ++it)
    net.push_back({split((*it)[1]), split((*it)[2]), (*it)[3]});
  auto configs = oracle::epn_reachable(net, {"b1", "c1", "p1"});
  std::set<std::string> expected;
  for (const auto& c : configs) {
    std::string s = "X = [";
    for (size_t i = 0; i < c.size(); ++i) s += (i ? "," : "") + c[i];
    expected.insert(s + "]");
  }
  Engine e;
  e.consult(text);
  auto start = Clock::now();
  auto got = answer_set(e, "reachable([b1,c1,p1],X)");
  double ms = seconds_since(start) * 1000;
  std::ostringstream d;
  d << got.size() << " configurations (oracle " << expected.size() << "), " << ms << " ms";
  return {got.size() == 8 && got == expected && ms < 100, d.str()};
}

Result c6_trie() {
  Trie trie;
  auto l1 = trie.insert(T("rt(a,f(a,b),a)")).first;
  auto l2 = trie.insert(canonicalize(T("rt(a,f(a,X),Y)"))).first;
  trie.insert(canonicalize(T("rt(b,V,d)")));
  auto p1 = trie.path(l1), p2 = trie.path(l2);
  size_t shared = 0;
  while (shared < p1.size() && shared < p2.size() && p1[shared] == p2[shared]) ++shared;
  // rt/3 a f/2 a {b a | X Y} plus b V d under rt/3
  size_t expected_nodes = 4 + 2 + 2 + 3;
  std::ostringstream d;
  d << "shared prefix " << shared << " nodes, total " << trie.node_count() << " (expected " << expected_nodes << ")";
  return {shared == 4 && trie.node_count() == expected_nodes, d.str()};
}

Result c7_call_subsumption() {
  int programs = 0, mismatches = 0;
  for (const auto& p : oracle::load_corpus(kCorpus)) {
    if (has_answer_subsumption(p.text) || programs == 10) continue;
    ++programs;
    if (corpus_answers(p, {}) != corpus_answers(p, EngineConfig{.default_tabling = TablingMode::Subsumptive}))
      ++mismatches;
  }
  std::string prog = ":- table p/2.\np(a,1). p(a,2). p(b,3).\n";
  auto producers = [&](TablingMode m) {
    Engine e(EngineConfig{.default_tabling = m});
    e.consult(prog);
    e.query("p(X,Y)");
    e.query("p(a,Z)");
    return e.tables().table_count();
  };
  size_t sub = producers(TablingMode::Subsumptive), var = producers(TablingMode::Variant);
  std::ostringstream d;
  d << programs << " programs, " << mismatches << " mismatches; producers subsumptive=" << sub << " variant=" << var;
  return {programs == 10 && mismatches == 0 && sub == 1 && var == 2, d.str()};
}

Result c8_answer_subsumption() {
  // Distances to vertex 0 over a random weighted DAG (edges point to lower ids).
  std::mt19937_64 rng(808);
  const int n = 50;
  std::vector<oracle::WEdge> es;
  std::set<std::pair<int, int>> seen;
  std::uniform_int_distribution<int> v(0, n - 1);
  std::uniform_int_distribution<int64_t> w(1, 20);
  while (es.size() < 150) {
    int a = v(rng), b = v(rng);
    if (a == b) continue;
    if (a < b) std::swap(a, b);
    if (!seen.insert({a, b}).second) continue;
    es.push_back({a, b, w(rng)});
  }
  std::vector<oracle::WEdge> reversed;
  for (const auto& e : es) reversed.push_back({e.to, e.from, e.w});
  auto dist = oracle::dijkstra(reversed, 0);
  std::set<std::string> expected{"d(0,0)"};
  for (auto [x, dx] : dist) expected.insert("d(" + std::to_string(x) + "," + std::to_string(dx) + ")");

  std::string rules = ":- table d(_,min).\nd(0,0).\nd(X,D) :- e(X,Y,W), d(Y,D1), D is D1+W.\n";
  auto run = [&](const std::vector<oracle::WEdge>& order, uint64_t* joins) {
    std::string text = rules;
    for (const auto& e : order)
      text += "e(" + std::to_string(e.from) + "," + std::to_string(e.to) + "," + std::to_string(e.w) + ").\n";
    Engine eng;
    eng.consult(text);
    std::set<std::string> got;
    for (int x = 0; x < n; ++x) {
      eng.reset_counters();
      for (const auto& s : eng.query("d(" + std::to_string(x) + ",D)"))
        got.insert("d(" + std::to_string(x) + "," + format_term(s.bindings.at(0).second) + ")");
      if (joins) *joins += eng.counters().join_applications;
    }
    return got;
  };
  uint64_t joins = 0;
  auto got = run(es, &joins);
  bool oracle_ok = got == expected;
  int shuffles_ok = 0;
  auto order = es;
  for (int i = 0; i < 100; ++i) {
    std::shuffle(order.begin(), order.end(), rng);
    if (run(order, nullptr) == got) ++shuffles_ok;
  }
  uint64_t bound = es.size() + n;
  std::ostringstream d;
  d << "dijkstra " << (oracle_ok ? "ok" : "MISMATCH") << ", joins " << joins << " <= " << bound << ", shuffles "
    << shuffles_ok << "/100";
  return {oracle_ok && joins <= bound && shuffles_ok == 100, d.str()};
}

Result c9_strategies() {
  int programs = 0;
  std::vector<std::string> differing;
  for (const auto& p : oracle::load_corpus(kCorpus)) {
    ++programs;
    if (corpus_answers(p, {}) != corpus_answers(p, EngineConfig{.strategy = Strategy::Batched}))
      differing.push_back(p.name);
  }
  std::string d = std::to_string(programs) + " programs, " + std::to_string(differing.size()) + " differ";
  for (const auto& n : differing) d += " " + n;
  return {differing.empty() && programs > 0, d};
}

Result c10_incremental() {
  std::string prog =
      ":- table reach/2 as incremental.\n:- use_incremental_dynamic edge/2.\n"
      "reach(X,Y) :- edge(X,Y).\nreach(X,Y) :- edge(X,Z), reach(Z,Y).\n"
      ":- table other/1 as incremental.\n:- use_incremental_dynamic w/1.\nother(X) :- w(X).\nw(1).\n";
  std::mt19937_64 rng(1010);
  const int n = 40;
  auto es = oracle::random_graph(rng, n, 60);
  std::set<oracle::Edge> current(es.begin(), es.end());
  Engine e;
  e.consult(prog + edge_facts(es));
  answer_set(e, "other(X)");
  for (int src = 1; src <= n; src += 7) answer_set(e, "reach(" + std::to_string(src) + ",Y)");
  std::uniform_int_distribution<int> v(1, n), op(0, 3);
  int agree = 0;
  for (int step = 0; step < 50; ++step) {
    int a = v(rng), b = v(rng);
    bool assert_op = op(rng) < 2 || current.empty();
    if (!assert_op) {
      auto it = current.begin();
      std::advance(it, std::uniform_int_distribution<size_t>(0, current.size() - 1)(rng));
      std::tie(a, b) = *it;
    }
    Change c{assert_op ? ChangeKind::Assert : ChangeKind::Retract,
             T("edge(" + std::to_string(a) + "," + std::to_string(b) + ")")};
    if (assert_op) current.insert({a, b}); else current.erase({a, b});
    if (step % 2) e.incr_update(c); else e.incr_invalidate(c);
    std::vector<oracle::Edge> cur(current.begin(), current.end());
    Engine scratch;
    scratch.consult(prog + edge_facts(cur));
    bool same = true;
    for (int src = 1; src <= n && same; src += 7) {
      std::string g = "reach(" + std::to_string(src) + ",Y)";
      auto got = answer_set(e, g);
      same = got == answer_set(scratch, g) && got == expected_reach(cur, src);
    }
    if (same) ++agree;
  }
  uint64_t untouched = e.recompute_count(PredKey{Symbol::intern("other"), 1});
  std::ostringstream d;
  d << agree << "/50 steps agree, unaffected recomputations " << untouched;
  return {agree == 50 && untouched == 0, d.str()};
}

Result c11_abolish() {
  std::string text = read_file(kCorpus + "/pnonstrat.P");
  auto q_survives = [&](GcAction action) {
    Engine e(EngineConfig{.gc_action = action});
    e.consult(text);
    e.query("p(X)");
    e.abolish_call(T("p(1)"));
    return e.table_for(T("p(1)")) == nullptr && e.table_for(T("q(1)")) != nullptr;
  };
  bool transitive = !q_survives(GcAction::AbolishDependents);
  bool kept = q_survives(GcAction::KeepDependents);

  Engine e;
  e.consult(read_file(kCorpus + "/rrec.P"));
  auto it = e.table_answers(T("reach(1,Y)"));
  e.abolish_all();
  e.gc();
  bool deferred = e.tables().graveyard_size() >= 1;
  size_t seen = 0;
  while (it.next()) ++seen;
  it.release();
  e.gc();
  bool reclaimed = e.tables().graveyard_size() == 0;
  std::ostringstream d;
  d << "abolish_dependents " << (transitive ? "removes" : "KEEPS") << " q(1), keep_dependents "
    << (kept ? "keeps" : "REMOVES") << " q(1), iterator read " << seen << " answers after abolish, "
    << (deferred && reclaimed ? "reclaimed after release" : "deferral FAILED");
  return {transitive && kept && deferred && reclaimed && seen > 0, d.str()};
}

Result c12_append_tables() {
  std::ostringstream d;
  bool ok = true;
  for (int n : {3, 10, 50}) {
    Engine e;
    e.consult(read_file(kCorpus + "/append.P"));
    std::string list = "[";
    for (int i = 1; i <= n; ++i) list += (i > 1 ? "," : "") + std::to_string(i);
    e.query("app(" + list + "],[x],Z)");
    size_t tables = e.tables().table_count();
    ok = ok && tables == static_cast<size_t>(n + 1);
    d << "n=" << n << ": " << tables << " tables; ";
  }
  return {ok, d.str()};
}

Result c13_scaling() {
  auto chain = [](int n) {
    std::string s = ":- table win/1.\nwin(X) :- move(X,Y), tnot(win(Y)).\n";
    for (int i = 0; i < n; ++i) s += "move(" + std::to_string(i) + "," + std::to_string(i + 1) + ").\n";
    // a two-cycle at the end makes every position undefined
    s += "move(" + std::to_string(n + 1) + "," + std::to_string(n) + ").\n";
    s += "move(" + std::to_string(n) + "," + std::to_string(n + 1) + ").\n";
    return s;
  };
  const std::vector<int> sizes{1000, 2000, 4000};
  std::vector<std::string> texts;
  for (int n : sizes) texts.push_back(chain(n));
  // Sizes are interleaved and the best of several rounds kept, so one noisy
  // interval does not land on a single size.
  std::vector<double> times(sizes.size(), 1e9);
  std::vector<uint64_t> steps(sizes.size());
  bool truths_ok = true;
  for (int round = 0; round < 15; ++round) {
    for (size_t i = 0; i < sizes.size(); ++i) {
      Engine e;
      e.consult(texts[i]);
      auto start = Clock::now();
      Truth t = e.truth_of(T("win(0)"));
      times[i] = std::min(times[i], seconds_since(start));
      steps[i] = e.counters().steps;
      truths_ok = truths_ok && t == Truth::Undefined;
    }
  }
  std::ostringstream d;
  for (size_t i = 0; i < sizes.size(); ++i)
    d << sizes[i] << ": " << times[i] * 1000 << " ms, " << steps[i] << " steps; ";
  double r1 = times[1] / times[0], r2 = times[2] / times[1];
  d << "time ratios " << r1 << ", " << r2;
  return {truths_ok && r1 <= 2.5 && r2 <= 2.5, d.str()};
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, Check>> checks = {
      {"reach left/right recursion vs BFS", c1_reach},
      {"negation with delay: truth values and trace", c2_pneg},
      {"non-stratified undefined answer and residual", c3_nonstrat},
      {"WFS oracle on random ground programs", c4_wfs_oracle},
      {"Petri net reachability vs EPN oracle", c5_petri},
      {"trie prefix sharing", c6_trie},
      {"call subsumption", c7_call_subsumption},
      {"answer subsumption shortest paths", c8_answer_subsumption},
      {"strategy independence", c9_strategies},
      {"incremental maintenance", c10_incremental},
      {"abolish semantics", c11_abolish},
      {"append table count", c12_append_tables},
      {"linear scaling of win chains", c13_scaling},
  };
  int failed = 0;
  for (size_t i = 0; i < checks.size(); ++i) {
    Result r;
    try {
      r = checks[i].second();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    if (!r.ok) ++failed;
    std::cout << (r.ok ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << checks[i].first << " (" << r.detail
              << ")" << std::endl;
  }
  std::cout << (checks.size() - failed) << "/" << checks.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
