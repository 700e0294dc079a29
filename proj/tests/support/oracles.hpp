#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

using Edge = std::pair<int, int>;
struct WEdge {
  int from, to;
  int64_t w;
};

// Vertices reachable from src by a path of one or more edges.
std::set<int> bfs_reach(const std::vector<Edge>& edges, int src);

// Shortest distances from src over one or more edges.
std::map<int, int64_t> dijkstra(const std::vector<WEdge>& edges, int src);

// Elementary Petri net: a transition fires when all inputs are marked and no
// output is marked. Configurations reachable in one or more firings.
struct Transition {
  std::vector<std::string> in, out;
  std::string name;
};
using Config = std::vector<std::string>;  // sorted place names
std::set<Config> epn_reachable(const std::vector<Transition>& net, const Config& init);

// Ground normal programs over atoms 0..n-1.
struct Rule {
  int head;
  std::vector<int> pos, neg;
};
enum class TV { False, Undefined, True };
// Well-founded model by the alternating fixpoint of the reduct operator.
std::vector<TV> wfs(int natoms, const std::vector<Rule>& rules);

// Function-free program grounded over its own constants; atoms are keyed by
// their canonical text.
struct Ground {
  std::vector<std::string> atoms;
  std::map<std::string, int> index;
  std::vector<Rule> rules;
};
Ground ground_program(const std::string& text);
std::map<std::string, TV> wfs_of_program(const std::string& text);

// Directed graph over names.
using Graph = std::map<std::string, std::set<std::string>>;
bool acyclic_without(const Graph& g, const std::set<std::string>& removed);
// Smallest feedback vertex sets, by exhaustive search.
std::vector<std::set<std::string>> minimum_fvs(const Graph& g);

// Generators.
std::vector<Edge> random_graph(std::mt19937_64& rng, int vertices, int edges);
std::vector<WEdge> random_weighted_graph(std::mt19937_64& rng, int vertices, int edges, int64_t max_w);
std::vector<Rule> random_ground_program(std::mt19937_64& rng, int atoms, int rules);
// `:- table a/1.` text for rules over atoms a(0)..a(n-1).
std::string program_text(int atoms, const std::vector<Rule>& rules);

struct CorpusProgram {
  std::string name;
  std::string text;
  std::vector<std::string> queries;  // from `% query: G.` lines
  bool pure = false;                 // `% pure` marks programs the WFS oracle can ground
};
std::vector<CorpusProgram> load_corpus(const std::string& dir);

}  // namespace oracle
