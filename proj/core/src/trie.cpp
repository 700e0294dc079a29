#include "tlpe/trie.hpp"

#include <algorithm>
#include <stdexcept>

namespace tlpe {

namespace {

constexpr size_t kIndexThreshold = 8;

void encode_rec(const Term& t, std::vector<TrieLabel>& out, std::vector<int64_t>& var_map, uint32_t& next) {
  switch (t.kind()) {
    case TermKind::Var: {
      auto v = t.var_id();
      if (v >= var_map.size()) var_map.resize(v + 1, -1);
      if (var_map[v] < 0) {
        var_map[v] = next++;
        out.push_back({LabelKind::FirstVar, 0, 0});
      } else {
        out.push_back({LabelKind::VarRef, static_cast<uint32_t>(var_map[v]), 0});
      }
      return;
    }
    case TermKind::Compound:
      out.push_back(principal_label(t));
      for (const auto& a : t.args()) encode_rec(a, out, var_map, next);
      return;
    default: out.push_back(principal_label(t));
  }
}

Term decode_rec(std::span<const TrieLabel> labels, size_t& pos, uint32_t& next_var) {
  if (pos >= labels.size()) throw std::logic_error("truncated trie path");
  const TrieLabel& l = labels[pos++];
  switch (l.kind) {
    case LabelKind::Atom: return Term::atom(Symbol::from_id(static_cast<uint32_t>(l.value)));
    case LabelKind::Int: return Term::integer(l.value);
    case LabelKind::Dec: return Term::decimal_scaled(l.value);
    case LabelKind::FirstVar: return Term::var(next_var++);
    case LabelKind::VarRef: return Term::var(l.aux);
    case LabelKind::Functor: {
      std::vector<Term> args;
      args.reserve(l.aux);
      for (uint32_t i = 0; i < l.aux; ++i) args.push_back(decode_rec(labels, pos, next_var));
      return Term::compound(Symbol::from_id(static_cast<uint32_t>(l.value)), std::move(args));
    }
  }
  return {};
}

using Node = Trie::Node;

// Calls fn for every node reached by consuming `need` complete terms below n.
template <typename Fn>
void skip_terms(const Node* n, size_t need, Fn&& fn) {
  for (const auto& c : n->children) {
    size_t rest = need - 1 + c->label.arity();
    if (rest == 0)
      fn(c.get());
    else
      skip_terms(c.get(), rest, fn);
  }
}

void walk_unifiable(const Node* n, std::vector<Term>& pending, std::vector<Node*>& out) {
  if (pending.empty()) {
    if (n->leaf) out.push_back(const_cast<Node*>(n));
    return;
  }
  Term g = pending.back();
  pending.pop_back();
  if (g.is_var()) {
    skip_terms(n, 1, [&](const Node* m) { walk_unifiable(m, pending, out); });
  } else {
    if (const Node* c = n->child(principal_label(g))) {
      auto args = g.args();
      for (auto it = args.rbegin(); it != args.rend(); ++it) pending.push_back(*it);
      walk_unifiable(c, pending, out);
      pending.resize(pending.size() - args.size());
    }
    for (const auto& c : n->children)
      if (c->label.is_var()) walk_unifiable(c.get(), pending, out);
  }
  pending.push_back(g);
}

void walk_subsuming(const Node* n, std::vector<Term>& pending, std::vector<Node*>& out) {
  if (pending.empty()) {
    if (n->leaf) out.push_back(const_cast<Node*>(n));
    return;
  }
  Term g = pending.back();
  pending.pop_back();
  if (!g.is_var()) {
    if (const Node* c = n->child(principal_label(g))) {
      auto args = g.args();
      for (auto it = args.rbegin(); it != args.rend(); ++it) pending.push_back(*it);
      walk_subsuming(c, pending, out);
      pending.resize(pending.size() - args.size());
    }
  }
  for (const auto& c : n->children)
    if (c->label.is_var()) walk_subsuming(c.get(), pending, out);
  pending.push_back(g);
}

}  // namespace

TrieLabel principal_label(const Term& t) {
  switch (t.kind()) {
    case TermKind::Atom: return {LabelKind::Atom, 0, t.symbol().id()};
    case TermKind::Int: return {LabelKind::Int, 0, t.int_value()};
    case TermKind::Dec: return {LabelKind::Dec, 0, t.int_value()};
    case TermKind::Compound: return {LabelKind::Functor, static_cast<uint32_t>(t.arity()), t.symbol().id()};
    case TermKind::Var: break;
  }
  throw std::logic_error("principal_label of a variable");
}

std::vector<TrieLabel> encode_terms(std::span<const Term> terms) {
  std::vector<TrieLabel> out;
  std::vector<int64_t> var_map;
  uint32_t next = 0;
  for (const auto& t : terms) encode_rec(t, out, var_map, next);
  return out;
}

std::vector<Term> decode_terms(std::span<const TrieLabel> labels, size_t count) {
  std::vector<Term> out;
  out.reserve(count);
  size_t pos = 0;
  uint32_t next_var = 0;
  for (size_t i = 0; i < count; ++i) out.push_back(decode_rec(labels, pos, next_var));
  return out;
}

Node* Trie::Node::child(const TrieLabel& l) const {
  if (index) {
    auto it = index->find(l);
    return it == index->end() ? nullptr : it->second;
  }
  for (const auto& c : children)
    if (c->label == l) return c.get();
  return nullptr;
}

Trie::Trie() : root_(std::make_unique<Node>()) {}

Node* Trie::add_child(Node* parent, const TrieLabel& l) {
  auto node = std::make_unique<Node>();
  node->label = l;
  node->parent = parent;
  Node* raw = node.get();
  parent->children.push_back(std::move(node));
  if (parent->index) {
    parent->index->emplace(l, raw);
  } else if (parent->children.size() > kIndexThreshold) {
    parent->index = std::make_unique<std::unordered_map<TrieLabel, Node*, TrieLabelHash>>();
    for (const auto& c : parent->children) parent->index->emplace(c->label, c.get());
  }
  ++node_count_;
  return raw;
}

std::pair<Node*, bool> Trie::insert(std::span<const Term> terms, uint64_t payload) {
  auto labels = encode_terms(terms);
  return insert_labels(labels, payload);
}

std::pair<Node*, bool> Trie::insert_labels(std::span<const TrieLabel> labels, uint64_t payload) {
  Node* n = root_.get();
  for (const auto& l : labels) {
    Node* c = n->child(l);
    n = c ? c : add_child(n, l);
  }
  if (n->leaf) return {n, false};
  n->leaf = true;
  n->payload = payload;
  ++leaf_count_;
  return {n, true};
}

Node* Trie::find(std::span<const Term> terms) const {
  Node* n = root_.get();
  for (const auto& l : encode_terms(terms)) {
    n = n->child(l);
    if (!n) return nullptr;
  }
  return n->leaf ? n : nullptr;
}

void Trie::erase(Node* leaf) {
  if (!leaf || !leaf->leaf) return;
  leaf->leaf = false;
  --leaf_count_;
  Node* n = leaf;
  while (n != root_.get() && !n->leaf && n->children.empty()) {
    Node* parent = n->parent;
    if (parent->index) parent->index->erase(n->label);
    auto it = std::find_if(parent->children.begin(), parent->children.end(),
                           [n](const std::unique_ptr<Node>& c) { return c.get() == n; });
    parent->children.erase(it);
    --node_count_;
    n = parent;
  }
}

void Trie::clear() {
  root_ = std::make_unique<Node>();
  node_count_ = 0;
  leaf_count_ = 0;
}

std::vector<TrieLabel> Trie::path(const Node* leaf) const {
  std::vector<TrieLabel> out;
  for (const Node* n = leaf; n && n != root_.get(); n = n->parent) out.push_back(n->label);
  std::reverse(out.begin(), out.end());
  return out;
}

void Trie::for_each_leaf(const std::function<void(Node*)>& fn) const {
  std::vector<Node*> stack{root_.get()};
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    if (n->leaf) fn(n);
    for (auto it = n->children.rbegin(); it != n->children.rend(); ++it) stack.push_back(it->get());
  }
}

std::vector<Node*> Trie::unifiable_leaves(std::span<const Term> goal) const {
  std::vector<Term> pending(goal.rbegin(), goal.rend());
  std::vector<Node*> out;
  walk_unifiable(root_.get(), pending, out);
  return out;
}

std::vector<Node*> Trie::subsuming_leaves(std::span<const Term> goal) const {
  std::vector<Term> pending(goal.rbegin(), goal.rend());
  std::vector<Node*> out;
  walk_subsuming(root_.get(), pending, out);
  return out;
}

}  // namespace tlpe
