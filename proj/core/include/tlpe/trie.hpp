#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "tlpe/term.hpp"

namespace tlpe {

enum class LabelKind : uint8_t { Functor, Atom, Int, Dec, FirstVar, VarRef };

// One trie edge symbol. Variables are stored canonically: the first
// occurrence of a variable is FirstVar, later occurrences VarRef(index).
struct TrieLabel {
  LabelKind kind = LabelKind::Atom;
  uint32_t aux = 0;   // arity for Functor, variable index for VarRef
  int64_t value = 0;  // symbol id, integer or scaled decimal

  bool is_var() const { return kind == LabelKind::FirstVar || kind == LabelKind::VarRef; }
  uint32_t arity() const { return kind == LabelKind::Functor ? aux : 0; }
  friend bool operator==(const TrieLabel&, const TrieLabel&) = default;
};

struct TrieLabelHash {
  size_t operator()(const TrieLabel& l) const {
    return std::hash<int64_t>()(l.value) * 31 + (size_t(l.kind) << 24) + l.aux;
  }
};

// Preorder symbol sequence of a group of terms, numbered jointly.
std::vector<TrieLabel> encode_terms(std::span<const Term> terms);
// Inverse of encode_terms; `count` is the number of top-level terms.
std::vector<Term> decode_terms(std::span<const TrieLabel> labels, size_t count);
TrieLabel principal_label(const Term& nonvar);

// Prefix tree over canonical term encodings. Each stored path ends at a
// leaf node carrying a payload; sibling lookup is hashed once a node has
// many children.
class Trie {
 public:
  struct Node {
    TrieLabel label;
    Node* parent = nullptr;
    bool leaf = false;
    uint64_t payload = 0;
    std::vector<std::unique_ptr<Node>> children;
    std::unique_ptr<std::unordered_map<TrieLabel, Node*, TrieLabelHash>> index;

    Node* child(const TrieLabel& l) const;
  };

  Trie();
  Trie(Trie&&) noexcept = default;
  Trie& operator=(Trie&&) noexcept = default;

  // Returns the leaf and whether it was newly created. An existing leaf
  // keeps its payload.
  std::pair<Node*, bool> insert(std::span<const Term> terms, uint64_t payload = 0);
  std::pair<Node*, bool> insert(const Term& t, uint64_t payload = 0) { return insert(std::span(&t, 1), payload); }
  std::pair<Node*, bool> insert_labels(std::span<const TrieLabel> labels, uint64_t payload);
  Node* find(std::span<const Term> terms) const;
  Node* find(const Term& t) const { return find(std::span(&t, 1)); }

  // Removes a leaf and prunes interior nodes left without children.
  void erase(Node* leaf);
  void clear();

  std::vector<TrieLabel> path(const Node* leaf) const;
  std::vector<Term> decode(const Node* leaf, size_t count) const { return decode_terms(path(leaf), count); }
  Term decode1(const Node* leaf) const { return decode(leaf, 1).front(); }

  // Leaves in trie order (depth-first, children in insertion order).
  void for_each_leaf(const std::function<void(Node*)>& fn) const;

  // Candidate leaves for stored terms that may unify with `goal`; every
  // bound goal symbol prunes the walk. Callers confirm with unify().
  std::vector<Node*> unifiable_leaves(std::span<const Term> goal) const;
  // Candidate leaves whose stored terms may subsume `goal`.
  std::vector<Node*> subsuming_leaves(std::span<const Term> goal) const;

  size_t node_count() const { return node_count_; }  // excludes the root
  size_t size() const { return leaf_count_; }
  bool empty() const { return leaf_count_ == 0; }
  const Node* root() const { return root_.get(); }

 private:
  Node* add_child(Node* parent, const TrieLabel& l);

  std::unique_ptr<Node> root_;
  size_t node_count_ = 0;
  size_t leaf_count_ = 0;
};

}  // namespace tlpe
