#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "tlpe/engine.hpp"
#include "tlpe/error.hpp"
#include "tlpe/program.hpp"
#include "tlpe/term_io.hpp"

using namespace tlpe;

namespace {

Term T(std::string_view s) { return read_term(s).term; }
PredKey K(std::string_view name, uint32_t arity) { return PredKey{Symbol::intern(name), arity}; }

std::vector<std::string> heads(const Lookup& l) {
  std::vector<std::string> out;
  for (const auto& c : l.clauses) out.push_back(format_term(c->head));
  return out;
}

const char* kTrans =
    ":- dynamic trans/3.\n:- index(trans/3,trie).\n"
    "trans([p1],[p2],t1).          trans([b2,p2],[p1,b1],t2).\n"
    "trans([b1,c1],[b2,c2],t3).    trans([c2],[c1],t4).\n";

}  // namespace

TEST(Directives, TableModes) {
  ProgramStore ps;
  ps.consult(":- table reachable/2.\n:- table p/2 as subsumptive.\n:- table r/2 as incremental.\n");
  const auto* r = ps.find_info(K("reachable", 2));
  ASSERT_TRUE(r);
  EXPECT_TRUE(r->tabled);
  EXPECT_FALSE(r->mode.has_value() && *r->mode == TablingMode::Subsumptive);
  EXPECT_EQ(ps.find_info(K("p", 2))->mode, TablingMode::Subsumptive);
  EXPECT_TRUE(ps.find_info(K("r", 2))->incremental);
}

TEST(Directives, TrieIndex) {
  ProgramStore ps;
  ps.consult(":- index(trans/2,trie).\n");
  EXPECT_TRUE(ps.find_info(K("trans", 2))->index.trie);
}

TEST(Directives, LatticeSpec) {
  ProgramStore ps;
  ps.consult(":- table pred(_,_,qdb/3-[0,0]).\n");
  const auto* info = ps.find_info(K("pred", 3));
  ASSERT_TRUE(info && info->answer_subsumption);
  const auto& s = *info->answer_subsumption;
  EXPECT_EQ(s.arg, 2u);
  EXPECT_EQ(s.kind, AggregateKind::Lattice);
  EXPECT_EQ(s.relation, K("qdb", 3));
  ASSERT_TRUE(s.identity);
  EXPECT_EQ(format_term(*s.identity), "[0,0]");
}

TEST(Directives, Errors) {
  ProgramStore ps;
  EXPECT_THROW(ps.consult(":- frobnicate(x).\n"), Error);
  EXPECT_THROW(ps.consult(":- index(p/2,[*(3)]).\n"), Error);
  EXPECT_THROW(ps.consult(":- index(p/5,[1+2+3+4]).\n"), Error);
  EXPECT_THROW(ps.consult("p(a) :- .\n"), SyntaxError);
  EXPECT_THROW(ps.consult("p :- tnot(tnot(q)).\n"), Error);
}

TEST(Assert, TrieStoreIgnoresDuplicates) {
  ProgramStore ps;
  ps.consult(kTrans);
  size_t nodes = ps.trie_node_count(K("trans", 3));
  EXPECT_FALSE(ps.assert_term(T("trans([p1],[p2],t1)")));
  EXPECT_EQ(ps.trie_node_count(K("trans", 3)), nodes);
  EXPECT_EQ(ps.clause_count(K("trans", 3)), 4u);
  EXPECT_THROW(ps.assert_term(T("trans(a,b,c) :- true, x")), Error);
}

TEST(Assert, DefaultStoreKeepsDuplicatesInOrder) {
  ProgramStore ps;
  ps.consult(":- dynamic edge/2.\n");
  ps.assert_term(T("edge(4,5)"));
  ps.assert_term(T("edge(4,5)"));
  EXPECT_EQ(heads(ps.lookup_clauses(T("edge(4,Y)"))), (std::vector<std::string>{"edge(4,5)", "edge(4,5)"}));
}

TEST(Assert, FrontAndBack) {
  ProgramStore ps;
  ps.consult(":- dynamic edge/2.\n");
  ps.assert_term(T("edge(1,2)"), ProgramStore::Position::Back);
  ps.assert_term(T("edge(X,X)"), ProgramStore::Position::Front);
  EXPECT_EQ(heads(ps.lookup_clauses(T("edge(A,B)"))), (std::vector<std::string>{"edge(_0,_0)", "edge(1,2)"}));
}

TEST(Assert, StaticPredicateRejected) {
  ProgramStore ps;
  ps.consult("s(1).\n");
  EXPECT_THROW(ps.assert_term(T("s(2)")), Error);
  EXPECT_THROW(ps.retract_clause(T("s(1)")), Error);
}

TEST(Retract, PresentAndAbsent) {
  ProgramStore ps;
  ps.consult(":- dynamic edge/2.\nedge(1,2). edge(2,3).\n");
  EXPECT_TRUE(ps.retract_clause(T("edge(1,2)")));
  EXPECT_EQ(heads(ps.lookup_clauses(T("edge(A,B)"))), std::vector<std::string>{"edge(2,3)"});
  EXPECT_FALSE(ps.retract_clause(T("edge(9,9)")));
}

TEST(Retract, TrieStorePrunes) {
  ProgramStore ps;
  ps.consult(kTrans);
  EXPECT_TRUE(ps.retract_clause(T("trans([p1],[p2],t1)")));
  ProgramStore rebuilt;
  rebuilt.consult(
      ":- dynamic trans/3.\n:- index(trans/3,trie).\n"
      "trans([b2,p2],[p1,b1],t2).\ntrans([b1,c1],[b2,c2],t3).\ntrans([c2],[c1],t4).\n");
  EXPECT_EQ(ps.trie_node_count(K("trans", 3)), rebuilt.trie_node_count(K("trans", 3)));
}

TEST(Lookup, JointIndexSelection) {
  ProgramStore ps;
  ps.consult(":- dynamic p/5.\n:- index(p/5,[*(1)+2,*(1)]).\n");
  ps.assert_term(T("p(f(a),b,1,2,3)"));
  ps.assert_term(T("p(f(a),c,1,2,3)"));
  ps.assert_term(T("p(f(b),b,1,2,3)"));
  auto l1 = ps.lookup_clauses(T("p(f(a),b,_,_,_)"));
  EXPECT_EQ(l1.index_used, "*(1)+2");
  EXPECT_EQ(l1.clauses.size(), 1u);
  auto l2 = ps.lookup_clauses(T("p(f(a),Y,_,_,_)"));
  EXPECT_EQ(l2.index_used, "*(1)");
  EXPECT_EQ(l2.clauses.size(), 2u);
  auto l3 = ps.lookup_clauses(T("p(X,Y,_,_,_)"));
  EXPECT_EQ(l3.clauses.size(), 3u);
}

TEST(Lookup, TrieStoreMatchesFilter) {
  ProgramStore ps;
  ps.consult(kTrans);
  auto l = ps.lookup_clauses(T("trans([b1|_],_,_)"));
  EXPECT_EQ(l.index_used, "trie");
  EXPECT_EQ(heads(l), std::vector<std::string>{"trans([b1,c1],[b2,c2],t3)"});
}

TEST(LookupProperties, IndexingNeverChangesMatches) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> sym(0, 3);
  auto rand_arg = [&](bool allow_var) -> std::string {
    int k = sym(rng);
    if (allow_var && k == 0) return "_";
    static const char* vals[] = {"a", "f(a)", "f(b,c)", "g(h(a))"};
    return vals[k];
  };
  for (const char* spec : {"[1]", "[*(1)+2,*(1)]", "[2+3,*(2)]", "trie"}) {
    ProgramStore indexed, plain;
    indexed.consult(std::string(":- dynamic q/3.\n:- index(q/3,") + spec + ").\n");
    plain.consult(":- dynamic q/3.\n:- index(q/3,[]).\n");
    for (int i = 0; i < 80; ++i) {
      Term f = T("q(" + rand_arg(false) + "," + rand_arg(false) + "," + rand_arg(false) + ")");
      indexed.assert_term(f);
      plain.assert_term(f);
    }
    for (int i = 0; i < 80; ++i) {
      Term g = T("q(" + rand_arg(true) + "," + rand_arg(true) + "," + rand_arg(true) + ")");
      auto matching = [&](const Lookup& l) {
        std::multiset<std::string> out;
        for (const auto& c : l.clauses)
          if (unify(g, offset_vars(c->head, g.var_bound()))) out.insert(format_term(c->head));
        return out;
      };
      auto a = matching(indexed.lookup_clauses(g));
      auto b = matching(plain.lookup_clauses(g));
      if (std::string(spec) == "trie") {
        EXPECT_EQ(std::set<std::string>(a.begin(), a.end()), std::set<std::string>(b.begin(), b.end()));
      } else {
        EXPECT_EQ(a, b) << spec << " " << format_term(g);
      }
    }
  }
}

TEST(ParseProperties, PrintParseFixpoint) {
  std::string text =
      "p(X,Y) :- q(X,Z), tnot(r(Z)), (Y = [a,b|Z] ; Y = 'Hello'), \\+ s(X).\n"
      "r(1).\nq(f(A,-3,0.25),A).\nm(X) :- (X > 1 -> true ; fail), !.\n";
  for (const auto& rt : read_terms(text)) {
    Term c = canonicalize(rt.term);
    Term again = canonicalize(read_term(format_term(c)).term);
    EXPECT_EQ(again, c) << format_term(c);
  }
}

TEST(AutoTable, SelfRecursion) {
  ProgramStore ps;
  ps.consult(":- auto_table.\nreach(X,Y) :- reach(X,Z), edge(Z,Y).\nreach(X,Y) :- edge(X,Y).\nedge(1,2).\n");
  auto set = ps.auto_table();
  ASSERT_EQ(set.size(), 1u);
  EXPECT_EQ(set[0], K("reach", 2));
  EXPECT_TRUE(ps.find_info(K("reach", 2))->tabled);
}

TEST(AutoTable, AcyclicAddsNothing) {
  ProgramStore ps;
  ps.consult(":- auto_table.\na(X) :- b(X).\nb(X) :- c(X).\nc(1).\n");
  EXPECT_TRUE(ps.auto_table().empty());
}

TEST(AutoTable, TwoCycleTieBreakIsMinimal) {
  ProgramStore ps;
  ps.consult(":- auto_table.\np(X) :- q(X).\nq(X) :- p(X).\nq(1).\n");
  auto set = ps.auto_table();
  ASSERT_EQ(set.size(), 1u);
  EXPECT_EQ(set[0], K("p", 1));
  oracle::Graph g{{"p/1", {"q/1"}}, {"q/1", {"p/1"}}};
  auto min = oracle::minimum_fvs(g);
  EXPECT_EQ(min.front().size(), set.size());
}

TEST(AutoTableProperties, AlwaysBreaksCycles) {
  std::mt19937_64 rng(31);
  for (int round = 0; round < 40; ++round) {
    int n = 3 + round % 6;
    std::uniform_int_distribution<int> v(0, n - 1);
    std::string text = ":- auto_table.\n";
    oracle::Graph g;
    for (int i = 0; i < n; ++i) {
      g["p" + std::to_string(i) + "/0"];
      text += "p" + std::to_string(i) + ".\n";
    }
    for (int k = 0; k < n + round % 5; ++k) {
      int a = v(rng), b = v(rng);
      text += "p" + std::to_string(a) + " :- p" + std::to_string(b) + ".\n";
      g["p" + std::to_string(a) + "/0"].insert("p" + std::to_string(b) + "/0");
    }
    ProgramStore ps;
    ps.consult(text);
    std::set<std::string> chosen;
    for (PredKey k : ps.auto_table()) chosen.insert(k.str());
    EXPECT_TRUE(oracle::acyclic_without(g, chosen)) << text;
    EXPECT_GE(chosen.size(), oracle::minimum_fvs(g).front().size());
  }
}
