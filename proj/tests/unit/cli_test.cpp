#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "tlpe_cli/session.hpp"

using namespace tlpe;
using namespace tlpe::cli;

namespace {

const std::string kCorpus = TLPE_CORPUS_DIR;

struct Run {
  std::string out, err;
};

Run repl(const std::string& input, std::vector<std::string> files = {}, SessionConfig cfg = {}) {
  std::ostringstream out, err;
  Session s(cfg, out, err);
  for (const auto& f : files) s.load(kCorpus + "/" + f);
  std::istringstream in(input);
  s.repl(in, false);
  return {out.str(), err.str()};
}

}  // namespace

TEST(Cli, PromptedAnswers) {
  auto r = repl("reach(1,Y).\n;\n;\n", {"lrec.P"});
  EXPECT_EQ(r.out, "Y = 2\nY = 3\nno\n");
  auto stop = repl("reach(1,Y).\n\n", {"lrec.P"});
  EXPECT_EQ(stop.out, "Y = 2\n");
}

TEST(Cli, UndefinedAnswerAndResidual) {
  auto r = repl("p(X).\n;\n:residual p(X).\n", {"pnonstrat.P"});
  EXPECT_EQ(r.out, "X = 1 undefined\nno\np(1) :- tnot(q(1)).\n");
  EXPECT_EQ(r.err, "");
}

TEST(Cli, StatsAndAbolish) {
  auto r = repl("reachable([b1,c1,p1],X).\n\n:stats.\n:abolish all.\n:stats.\n", {"petri.P"});
  std::istringstream lines(r.out);
  std::vector<std::string> stats;
  for (std::string l; std::getline(lines, l);)
    if (l.rfind("tables:", 0) == 0) stats.push_back(l);
  ASSERT_EQ(stats.size(), 2u);
  EXPECT_NE(stats[0].find("answers: 8"), std::string::npos) << stats[0];
  EXPECT_EQ(stats[1].rfind("tables: 0,", 0), 0u) << stats[1];
}

TEST(Cli, UnknownCommandAndSyntaxError) {
  auto r = repl(":frobnicate.\nfoo(.\n");
  EXPECT_NE(r.err.find("error: "), std::string::npos);
  EXPECT_NE(r.err.find("frobnicate"), std::string::npos);
  EXPECT_NE(r.err.find("syntax"), std::string::npos);
}

TEST(Cli, MultiLineQueryAndQuit) {
  auto r = repl("reach(1,\n  Y).\n;\n;\n:quit.\nreach(1,Y).\n", {"lrec.P"});
  EXPECT_EQ(r.out, "Y = 2\nY = 3\nno\n");
}

TEST(Cli, TraceToggle) {
  auto r = repl(":trace on.\np(c).\n\n:trace off.\np(c).\n\n", {"pneg.P"});
  EXPECT_NE(r.out.find("OP NEW_SUBGOAL p(c)"), std::string::npos);
  EXPECT_NE(r.out.find("OP DELAYING"), std::string::npos);
  auto last_op = r.out.rfind("OP ");
  auto tail = r.out.substr(r.out.find('\n', last_op) + 1);
  EXPECT_EQ(tail, "yes\nyes\n");
}

TEST(Cli, IncrementalCommands) {
  std::ostringstream out, err;
  Session s({}, out, err);
  s.engine().consult(
      ":- table reach/2 as incremental.\n:- use_incremental_dynamic edge/2.\n"
      "reach(X,Y) :- edge(X,Y).\nreach(X,Y) :- edge(X,Z), reach(Z,Y).\nedge(1,2). edge(2,3).\n");
  std::istringstream in;
  s.run_goal("reach(1,Y)");
  s.eval_command(":incr_retract edge(2,3).", in);
  s.run_goal("reach(1,Y)");
  s.eval_command(":incr_invalidate assert(edge(2,4)).", in);
  s.run_goal("reach(1,Y)");
  EXPECT_EQ(out.str(), "Y = 2\nY = 3\nupdated 3 tables\nY = 2\ninvalidated 3 tables\nY = 2\nY = 4\n");
  EXPECT_EQ(err.str(), "");
}

TEST(Cli, BatchExitCodes) {
  std::ostringstream out, err;
  Session s({}, out, err);
  ASSERT_TRUE(s.load(kCorpus + "/pneg.P"));
  EXPECT_EQ(s.run_goal("p(c)"), ExitCode::Success);
  EXPECT_EQ(s.run_goal("p(a)"), ExitCode::NoAnswer);
  EXPECT_EQ(s.run_goal("nosuch(1)"), ExitCode::Failure);
  EXPECT_FALSE(s.load(kCorpus + "/missing.P"));
}

TEST(Cli, CorpusOutputIsDeterministic) {
  for (const auto& prog : oracle::load_corpus(kCorpus)) {
    for (Strategy st : {Strategy::Local, Strategy::Batched}) {
      std::string first;
      for (int run = 0; run < 2; ++run) {
        std::ostringstream out, err;
        SessionConfig cfg;
        cfg.engine.strategy = st;
        cfg.trace = true;
        Session s(cfg, out, err);
        s.engine().consult(prog.text);
        for (const auto& q : prog.queries) s.run_goal(q);
        if (run == 0)
          first = out.str();
        else
          EXPECT_EQ(out.str(), first) << prog.name;
      }
    }
  }
}
