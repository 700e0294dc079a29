#include <gtest/gtest.h>

#include <chrono>
#include <random>

#include "oracles.hpp"
#include "tlpe/engine.hpp"
#include "tlpe/error.hpp"
#include "tlpe/term_io.hpp"

using namespace tlpe;

namespace {

Term T(std::string_view s) { return read_term(s).term; }

std::vector<std::string> answers(Engine& e, std::string_view goal) {
  std::vector<std::string> out;
  for (const auto& s : e.query(goal)) out.push_back(format_solution(s));
  return out;
}

std::set<std::string> answer_set(Engine& e, std::string_view goal) {
  auto v = answers(e, goal);
  return {v.begin(), v.end()};
}

const char* kLrec = ":- table reach/2.\nreach(X,Y) :- reach(X,Z), edge(Z,Y).\nreach(X,Y) :- edge(X,Y).\n";
const char* kRrec = ":- table reach/2.\nreach(X,Y) :- edge(X,Y).\nreach(X,Y) :- edge(X,Z), reach(Z,Y).\n";

std::string edges_text(const std::vector<oracle::Edge>& es) {
  std::string s;
  for (auto [a, b] : es) s += "edge(" + std::to_string(a) + "," + std::to_string(b) + ").\n";
  return s;
}

}  // namespace

TEST(Solve, LeftAndRightRecursion) {
  for (const char* prog : {kLrec, kRrec}) {
    Engine e;
    e.consult(std::string(prog) + "edge(1,2). edge(2,3).\n");
    EXPECT_EQ(answers(e, "reach(1,Y)"), (std::vector<std::string>{"Y = 2", "Y = 3"}));
  }
}

TEST(Solve, RandomCyclicGraphsTerminateAndMatchBfs) {
  std::mt19937_64 rng(41);
  for (int round = 0; round < 6; ++round) {
    int n = round < 3 ? 60 : 200;
    auto es = oracle::random_graph(rng, n, 3 * n);
    std::set<std::string> expected;
    for (int v : oracle::bfs_reach(es, 1)) expected.insert("Y = " + std::to_string(v));
    for (const char* prog : {kLrec, kRrec}) {
      for (Strategy s : {Strategy::Local, Strategy::Batched}) {
        Engine e(EngineConfig{.strategy = s});
        e.consult(std::string(prog) + ":- dynamic edge/2.\n" + edges_text(es));
        EXPECT_EQ(answer_set(e, "reach(1,Y)"), expected);
      }
    }
  }
}

TEST(Solve, VariantCallsShareTables) {
  Engine e;
  e.consult(std::string(kRrec) + "edge(1,2). edge(2,3). edge(3,1).\n");
  e.query("reach(X,Y), reach(X,Z)");
  std::set<Term, TermLess> seen;
  for (Table* t : e.tables().all_tables()) EXPECT_TRUE(seen.insert(canonicalize(t->subgoal)).second);
}

TEST(Step, FirstOperationIsNewSubgoal) {
  Engine e;
  e.consult(std::string(kLrec) + "edge(1,2). edge(2,3).\n");
  ReadTerm rt = read_term("reach(1,Y)");
  e.begin(rt.term, rt.var_names);
  std::vector<StepReport> all;
  while (auto r = e.step()) all.insert(all.end(), r->begin(), r->end());
  auto sols = e.finish();
  ASSERT_FALSE(all.empty());
  EXPECT_EQ(all.front().op, StepOp::NewSubgoal);
  EXPECT_EQ(all.front().str().rfind("OP NEW_SUBGOAL reach(1,", 0), 0u);
  EXPECT_EQ(sols.size(), 2u);
}

TEST(Step, TraceIsDeterministic) {
  auto run = [] {
    Engine e;
    e.consult(std::string(kRrec) + "edge(1,2). edge(1,3). edge(3,1). edge(2,4).\n");
    std::vector<std::string> lines;
    e.set_trace([&](const StepReport& r) { lines.push_back(r.str()); });
    e.query("reach(1,Y)");
    return lines;
  };
  EXPECT_EQ(run(), run());
}

TEST(Scheduling, LocalCompletesCalleeSccFirst) {
  Engine e;
  e.consult(std::string(kRrec) + "edge(1,2). edge(1,3). edge(3,1).\n");
  std::vector<StepReport> trace;
  e.set_trace([&](const StepReport& r) { trace.push_back(r); });
  e.query("reach(1,Y)");
  auto pos = [&](StepOp op, const std::string& sub) {
    for (size_t i = 0; i < trace.size(); ++i)
      if (trace[i].op == op && trace[i].subgoal == sub) return static_cast<long>(i);
    return -1L;
  };
  long c2 = pos(StepOp::Completion, "reach(2,_0)");
  long c1 = pos(StepOp::Completion, "reach(1,_0)");
  long c3 = pos(StepOp::Completion, "reach(3,_0)");
  ASSERT_GE(c2, 0);
  ASSERT_GE(c1, 0);
  EXPECT_LT(c2, c1);
  EXPECT_EQ(std::abs(c1 - c3), 1);
  EXPECT_EQ(e.counters().early_returns, 0u);
}

TEST(Scheduling, LocalNeverLeaksAnswersAcrossSccs) {
  std::mt19937_64 rng(43);
  for (int round = 0; round < 5; ++round) {
    auto es = oracle::random_graph(rng, 40, 80);
    Engine local;
    local.consult(std::string(kRrec) + edges_text(es));
    local.query("reach(1,Y)");
    EXPECT_EQ(local.counters().early_returns, 0u);
  }
}

TEST(Scheduling, BatchedReturnsEarly) {
  Engine e(EngineConfig{.strategy = Strategy::Batched});
  e.consult(std::string(kRrec) + "edge(1,2). edge(2,3). edge(3,4). edge(4,2).\n");
  EXPECT_EQ(answer_set(e, "reach(1,Y)"), (std::set<std::string>{"Y = 2", "Y = 3", "Y = 4"}));
  EXPECT_GT(e.counters().early_returns, 0u);
}

TEST(Scheduling, SingleSubgoalSameOrderUnderBothStrategies) {
  std::vector<std::string> got[2];
  int i = 0;
  for (Strategy s : {Strategy::Local, Strategy::Batched}) {
    Engine e(EngineConfig{.strategy = s});
    e.consult(":- table p/1.\np(X) :- q(X).\nq(3). q(1). q(2).\n");
    got[i++] = answers(e, "p(X)");
  }
  EXPECT_EQ(got[0], got[1]);
}

TEST(Scheduling, MinJoinsBoundedOnDiamond) {
  const char* prog =
      ":- table d(_,min).\n"
      "d(X,D) :- X = t, D = 0.\n"
      "d(X,D) :- e(X,Z,W), d(Z,D1), D is W + D1.\n"
      "e(s,a,1). e(s,b,4). e(a,t,5). e(b,t,1). e(a,b,1).\n";
  uint64_t joins[2];
  int i = 0;
  for (Strategy s : {Strategy::Local, Strategy::Batched}) {
    Engine e(EngineConfig{.strategy = s});
    e.consult(prog);
    EXPECT_EQ(answers(e, "d(s,D)"), std::vector<std::string>{"D = 3"});
    joins[i++] = e.counters().join_applications;
  }
  EXPECT_LE(joins[0], 5u + 4u);
  EXPECT_LE(joins[1], 5u + 4u);
}

TEST(TabledAppend, TableCountIsLinear) {
  for (int n : {3, 10, 50}) {
    Engine e;
    e.consult(":- table app/3.\napp([],L,L).\napp([H|T],L,[H|R]) :- app(T,L,R).\n");
    std::string list = "[";
    for (int i = 1; i <= n; ++i) list += (i > 1 ? "," : "") + std::to_string(i);
    list += "]";
    auto sols = e.query("app(" + list + ",[x],Z)");
    ASSERT_EQ(sols.size(), 1u);
    EXPECT_EQ(e.tables().table_count(), static_cast<size_t>(n + 1));
  }
}

TEST(Control, CutIfThenElseAndNegation) {
  Engine e;
  e.consult(
      "max(X,Y,X) :- X >= Y, !.\nmax(_,Y,Y).\n"
      "sign(X,S) :- (X > 0 -> S = pos ; X < 0 -> S = neg ; S = zero).\n"
      "first(X) :- member(X,[a,b,c]), !.\n");
  EXPECT_EQ(answers(e, "max(3,5,M)"), std::vector<std::string>{"M = 5"});
  EXPECT_EQ(answers(e, "max(7,5,M)"), std::vector<std::string>{"M = 7"});
  EXPECT_EQ(answers(e, "sign(-2,S)"), std::vector<std::string>{"S = neg"});
  EXPECT_EQ(answers(e, "sign(0,S)"), std::vector<std::string>{"S = zero"});
  EXPECT_EQ(answers(e, "first(X)"), std::vector<std::string>{"X = a"});
  EXPECT_EQ(answers(e, "\\+ member(z,[a])"), std::vector<std::string>{"yes"});
  auto found = e.query("findall(X-Y, member(X-Y,[1-a,2-b]), L)");
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(format_term(found[0].bindings.at(2).second), "[-(1,a),-(2,b)]");
}

TEST(Control, CutOverIncompleteTableIsError) {
  Engine e;
  e.consult(":- table t/1.\nt(X) :- c(X).\nt(1).\nt(2).\nc(X) :- t(X), !.\n");
  try {
    e.query("t(X)");
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::CutOverIncompleteTable);
  }
  EXPECT_EQ(e.tables().table_count(), 0u);
}

TEST(Control, CutOverCompleteTableIsAllowed) {
  Engine e;
  e.consult(":- table t/1.\nt(1).\nt(2).\nc(X) :- t(X), !.\n");
  EXPECT_EQ(answers(e, "c(X)"), std::vector<std::string>{"X = 1"});
}

TEST(Errors, UnknownProcedureAndArithmetic) {
  Engine e;
  e.consult("p(X) :- undefined_pred(X).\n");
  try {
    e.query("p(1)");
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::Existence);
  }
  EXPECT_THROW(e.query("X is foo + 1"), Error);
  EXPECT_THROW(e.query("X is Y + 1"), Error);
}

TEST(Builtins, ListsAndArithmetic) {
  Engine e;
  EXPECT_EQ(answers(e, "X is 7 // 2 + 3 * 2 - 1"), std::vector<std::string>{"X = 8"});
  EXPECT_EQ(answers(e, "X is 0.5 + 0.25"), std::vector<std::string>{"X = 0.75"});
  EXPECT_EQ(answers(e, "sort([c,a,b,a],L)"), std::vector<std::string>{"L = [a,b,c]"});
  EXPECT_EQ(answers(e, "msort([c,a,b,a],L)"), std::vector<std::string>{"L = [a,a,b,c]"});
  EXPECT_EQ(answers(e, "flatten([a,[b,[c]],[]],L)"), std::vector<std::string>{"L = [a,b,c]"});
  EXPECT_EQ(answers(e, "ord_subtract([a,b,c],[b],L)"), std::vector<std::string>{"L = [a,c]"});
  EXPECT_EQ(answers(e, "ord_subset([a,c],[a,b,c])"), std::vector<std::string>{"yes"});
  EXPECT_TRUE(answers(e, "ord_disjoint([a],[a,b])").empty());
  EXPECT_EQ(answers(e, "length(L,2)"), std::vector<std::string>{"L = [_0,_1]"});
  EXPECT_EQ(answers(e, "between(1,3,X)"), (std::vector<std::string>{"X = 1", "X = 2", "X = 3"}));
  EXPECT_EQ(answers(e, "append(X,[c],[a,b,c])"), std::vector<std::string>{"X = [a,b]"});
  EXPECT_EQ(answers(e, "f(a,b) =.. L"), std::vector<std::string>{"L = [f,a,b]"});
  EXPECT_EQ(answers(e, "nth1(2,[a,b,c],X)"), std::vector<std::string>{"X = b"});
}

TEST(Builtins, AssertRetractLogicalView) {
  Engine e;
  e.consult(":- dynamic c/1.\nc(1).\nbump :- c(X), Y is X + 1, assertz(c(Y)), fail.\nbump.\n");
  e.query("bump");
  EXPECT_EQ(answers(e, "c(X)"), (std::vector<std::string>{"X = 1", "X = 2"}));
  EXPECT_EQ(answers(e, "retract(c(X))"), std::vector<std::string>{"X = 1"});
  EXPECT_EQ(answers(e, "c(X)"), std::vector<std::string>{"X = 2"});
}

TEST(Solve, QueryLevelTablingReclaims) {
  Engine e(EngineConfig{.query_level_tabling = true});
  e.consult(std::string(kLrec) + "edge(1,2). edge(2,3).\n");
  EXPECT_EQ(answers(e, "reach(1,Y)").size(), 2u);
  EXPECT_EQ(e.tables().table_count(), 0u);
}

TEST(Solve, InterruptAbolishesIncompleteTables) {
  Engine e;
  e.consult(std::string(kLrec) + "edge(1,2). edge(2,3).\n");
  ReadTerm rt = read_term("reach(1,Y)");
  e.begin(rt.term, rt.var_names);
  ASSERT_TRUE(e.step());
  e.interrupt();
  try {
    while (e.step()) {
    }
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::Interrupted);
  }
  EXPECT_EQ(e.tables().table_count(), 0u);
  EXPECT_EQ(answers(e, "reach(1,Y)").size(), 2u);
}

TEST(Solve, OccursCheckFlag) {
  Engine plain;
  Engine checked(EngineConfig{.occurs_check = true});
  EXPECT_TRUE(answers(checked, "X = f(X)").empty());
  EXPECT_EQ(answers(plain, "X = f(Y), Y = a"), std::vector<std::string>{"X = f(a), Y = a"});
}

TEST(Performance, LargeGraphUnderOneSecond) {
  std::mt19937_64 rng(47);
  auto es = oracle::random_graph(rng, 100, 300);
  for (const char* prog : {kLrec, kRrec}) {
    Engine e;
    e.consult(std::string(prog) + edges_text(es));
    auto t0 = std::chrono::steady_clock::now();
    e.query("reach(1,Y)");
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_LT(s, 1.0);
  }
}
