// Dependency and constituency trees plus the path queries the feature
// extractors are built on. Both tree types are immutable once built and
// validate their structural invariants at construction time.
#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cpa/error.hpp"

namespace cpa {

// One dependency arc: head token index (-1 for the root node) and the typed
// relation label. A token that is not a node of the tree has no arc at all,
// which happens in the collapsed variant when a preposition is folded into
// its parent relation (prep + pobj becomes prep_of etc).
struct DepArc {
  int head = -1;
  std::string relation;
  bool operator==(const DepArc&) const = default;
};

enum class PathAnnotation { none, lemma, pos };

// A step along a dependency path. `from` is the node the step departs, which
// is what the lemma/pos annotated renderings attach to.
struct DepStep {
  std::string relation;
  bool up = false;
  int from = -1;
  bool operator==(const DepStep&) const = default;
};

struct DepPath {
  std::vector<DepStep> steps;

  int length() const { return static_cast<int>(steps.size()); }
  bool empty() const { return steps.empty(); }

  // Relations joined by '-', up-steps prefixed '^'. With an annotation the
  // departure node's lemma or POS follows each relation, so a single arc from
  // the verb down to its subject renders as "nsubj", "nsubj-continue" or
  // "nsubj-VBD". An empty path renders as "".
  std::string render(PathAnnotation ann = PathAnnotation::none,
                     std::span<const std::string> lemmas = {},
                     std::span<const std::string> pos = {}) const {
    std::string out;
    for (const DepStep& s : steps) {
      if (!out.empty()) out += '-';
      if (s.up) out += '^';
      out += s.relation;
      if (ann == PathAnnotation::lemma) {
        out += '-';
        out += lemmas[static_cast<size_t>(s.from)];
      } else if (ann == PathAnnotation::pos) {
        out += '-';
        out += pos[static_cast<size_t>(s.from)];
      }
    }
    return out;
  }

  bool operator==(const DepPath&) const = default;
};

// Rooted dependency tree over token indices 0..size-1. Slot i holds the arc
// of token i, or nullopt when the token is not a node (collapsed variant
// only; the basic tree always covers every token).
class DepTree {
 public:
  DepTree() = default;

  static DepTree build(std::vector<std::optional<DepArc>> arcs) {
    DepTree t;
    t.arcs_ = std::move(arcs);
    const int n = static_cast<int>(t.arcs_.size());
    t.children_.assign(static_cast<size_t>(n), {});
    int roots = 0;
    for (int i = 0; i < n; ++i) {
      if (!t.arcs_[static_cast<size_t>(i)]) continue;
      const DepArc& a = *t.arcs_[static_cast<size_t>(i)];
      if (a.head == -1) {
        t.root_ = i;
        ++roots;
        continue;
      }
      if (a.head < 0 || a.head >= n || !t.arcs_[static_cast<size_t>(a.head)])
        throw InvariantError("dependency head of token " + std::to_string(i) +
                             " is not a node of the tree");
      t.children_[static_cast<size_t>(a.head)].push_back(i);
    }
    int nodes = 0;
    for (const auto& a : t.arcs_) nodes += a.has_value();
    if (nodes > 0 && roots != 1)
      throw InvariantError("dependency tree must have exactly one root, got " +
                           std::to_string(roots));
    // Cycle check: every node has to reach the root in at most `nodes` hops.
    for (int i = 0; i < n; ++i) {
      if (!t.arcs_[static_cast<size_t>(i)]) continue;
      int cur = i, hops = 0;
      while (t.arcs_[static_cast<size_t>(cur)]->head != -1) {
        cur = t.arcs_[static_cast<size_t>(cur)]->head;
        if (++hops > nodes)
          throw InvariantError("dependency tree contains a cycle through token " +
                               std::to_string(i));
      }
    }
    return t;
  }

  int size() const { return static_cast<int>(arcs_.size()); }

  bool has_node(int i) const {
    return i >= 0 && i < size() && arcs_[static_cast<size_t>(i)].has_value();
  }

  // Index of the root node; -1 for an empty tree.
  int root() const { return root_; }

  std::optional<int> parent(int i) const {
    if (!has_node(i)) return std::nullopt;
    int h = arcs_[static_cast<size_t>(i)]->head;
    if (h == -1) return std::nullopt;
    return h;
  }

  // Relation on the arc entering i; nullptr if i is absent. The root's
  // pseudo-relation (usually "root") is returned as-is.
  const std::string* relation(int i) const {
    if (!has_node(i)) return nullptr;
    return &arcs_[static_cast<size_t>(i)]->relation;
  }

  const std::vector<int>& children(int i) const {
    check_node(i);
    return children_[static_cast<size_t>(i)];
  }

  std::vector<int> children_with_relation(int i, std::string_view rel) const {
    std::vector<int> out;
    for (int c : children(i))
      if (*relation(c) == rel) out.push_back(c);
    return out;
  }

  bool has_child_with_relation(int i, std::string_view rel) const {
    for (int c : children(i))
      if (*relation(c) == rel) return true;
    return false;
  }

  // Number of non-root arcs in the whole tree labeled rel.
  int relation_count(std::string_view rel) const {
    int n = 0;
    for (const auto& a : arcs_)
      if (a && a->head != -1 && a->relation == rel) ++n;
    return n;
  }

  // Edges from the root; nullopt for absent tokens.
  std::optional<int> depth(int i) const {
    if (!has_node(i)) return std::nullopt;
    int d = 0;
    for (auto p = parent(i); p; p = parent(*p)) ++d;
    return d;
  }

  const std::vector<std::optional<DepArc>>& arcs() const { return arcs_; }

  bool operator==(const DepTree& o) const { return arcs_ == o.arcs_; }

 private:
  void check_node(int i) const {
    if (!has_node(i))
      throw InvariantError("token " + std::to_string(i) +
                           " is not a node of the dependency tree");
  }

  std::vector<std::optional<DepArc>> arcs_;
  std::vector<std::vector<int>> children_;
  int root_ = -1;
};

// Path following arc directions from `from` down to `to`. Exists iff `from`
// is an ancestor of `to`; empty when from == to. Returns nullopt when either
// index is not a node or no such path exists.
inline std::optional<DepPath> directed_dep_path(const DepTree& t, int from, int to) {
  if (!t.has_node(from) || !t.has_node(to)) return std::nullopt;
  DepPath p;
  if (from == to) return p;
  int cur = to;
  while (true) {
    auto par = t.parent(cur);
    if (!par) return std::nullopt;  // hit the root without meeting `from`
    p.steps.push_back({*t.relation(cur), false, *par});
    if (*par == from) break;
    cur = *par;
  }
  std::reverse(p.steps.begin(), p.steps.end());
  return p;
}

// Path through the lowest common ancestor, up-steps first. Both endpoints
// must be nodes; a validated tree is connected, so the path then always
// exists. Querying an absent token is treated as corrupt input.
inline DepPath undirected_dep_path(const DepTree& t, int from, int to) {
  if (!t.has_node(from) || !t.has_node(to))
    throw InvariantError("undirected path endpoint is not a node of the tree");
  DepPath p;
  if (from == to) return p;

  auto chain = [&](int i) {
    std::vector<int> c{i};
    for (auto par = t.parent(i); par; par = t.parent(*par)) c.push_back(*par);
    return c;
  };
  std::vector<int> cf = chain(from), ct = chain(to);
  std::unordered_map<int, size_t> pos_in_ct;
  for (size_t j = 0; j < ct.size(); ++j) pos_in_ct.emplace(ct[j], j);

  size_t lca_in_ct = 0;
  for (int node : cf) {
    auto it = pos_in_ct.find(node);
    if (it != pos_in_ct.end()) {
      lca_in_ct = it->second;
      break;
    }
    p.steps.push_back({*t.relation(node), true, node});
  }
  for (size_t j = lca_in_ct; j > 0; --j)
    p.steps.push_back({*t.relation(ct[j - 1]), false, *t.parent(ct[j - 1])});
  return p;
}

// Nearest strict ancestor of `token` whose POS tag starts with 'V'.
inline std::optional<int> first_verbal_ancestor(const DepTree& t, int token,
                                                std::span<const std::string> pos) {
  if (!t.has_node(token)) return std::nullopt;
  for (auto p = t.parent(token); p; p = t.parent(*p)) {
    if (pos[static_cast<size_t>(*p)].starts_with('V')) return p;
  }
  return std::nullopt;
}

// Constituency tree parsed from single-line bracketed notation such as
// "(ROOT (S (NP (NNS Universities)) (VP (VBD continued) ...)))". Leaves map
// positionally onto sentence tokens.
class ConstTree {
 public:
  ConstTree() = default;

  static ConstTree parse(std::string_view s) {
    ConstTree t;
    size_t i = 0;
    skip_ws(s, i);
    if (i >= s.size() || s[i] != '(')
      throw ParseError("constituency parse must start with '('");
    t.parse_node(s, i, -1);
    skip_ws(s, i);
    if (i != s.size())
      throw ParseError("trailing text after constituency parse");
    if (t.token_node_.empty())
      throw ParseError("constituency parse has no leaves");
    return t;
  }

  int leaf_count() const { return static_cast<int>(token_node_.size()); }

  const std::string& preterminal(int token) const {
    return nodes_[node_of(token)].label;
  }

  const std::string& word(int token) const {
    return nodes_[node_of(token)].word;
  }

  // Label of the preterminal's parent; absent when the preterminal is the
  // root of the tree.
  std::optional<std::string> phrase_type(int token) const {
    int par = nodes_[node_of(token)].parent;
    if (par == -1) return std::nullopt;
    return nodes_[static_cast<size_t>(par)].label;
  }

  // Parent label plus its child labels, e.g. "NP->NNS" or "VP->VBD-S".
  std::optional<std::string> phrase_structure(int token) const {
    int par = nodes_[node_of(token)].parent;
    if (par == -1) return std::nullopt;
    const Node& p = nodes_[static_cast<size_t>(par)];
    std::string out = p.label + "->";
    for (size_t k = 0; k < p.children.size(); ++k) {
      if (k) out += '-';
      out += nodes_[static_cast<size_t>(p.children[k])].label;
    }
    return out;
  }

  // Node labels from one preterminal to the other through their lowest
  // common ancestor, '^' while climbing and 'v' while descending:
  // "VBD^VP^SvNPvNNS". Identical endpoints render as the bare preterminal.
  std::string path(int from, int to) const {
    if (from == to) return nodes_[node_of(from)].label;
    std::vector<int> up, down;
    int lca = find_lca(node_of(from), node_of(to), up, down);
    up.push_back(lca);
    std::string out = nodes_[static_cast<size_t>(up.front())].label;
    for (size_t k = 1; k < up.size(); ++k) {
      out += '^';
      out += nodes_[static_cast<size_t>(up[k])].label;
    }
    for (int node : down) {
      out += 'v';
      out += nodes_[static_cast<size_t>(node)].label;
    }
    return out;
  }

  // Edge count of the path above; 0 for identical endpoints.
  int path_length(int from, int to) const {
    if (from == to) return 0;
    std::vector<int> up, down;
    find_lca(node_of(from), node_of(to), up, down);
    return static_cast<int>(up.size() + down.size());
  }

  // Edges from the root to the token's preterminal.
  int depth(int token) const {
    int d = 0;
    for (int n = nodes_[node_of(token)].parent; n != -1;
         n = nodes_[static_cast<size_t>(n)].parent)
      ++d;
    return d;
  }

  std::string to_bracketed() const { return render(0); }

  bool operator==(const ConstTree& o) const {
    if (nodes_.empty() || o.nodes_.empty()) return nodes_.empty() == o.nodes_.empty();
    return to_bracketed() == o.to_bracketed();
  }

 private:
  struct Node {
    std::string label;
    int parent = -1;
    std::vector<int> children;
    std::string word;  // non-empty iff preterminal
  };

  size_t node_of(int token) const {
    if (token < 0 || token >= leaf_count())
      throw InvariantError("token " + std::to_string(token) +
                           " out of range for constituency tree");
    return static_cast<size_t>(token_node_[static_cast<size_t>(token)]);
  }

  static void skip_ws(std::string_view s, size_t& i) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\n' || s[i] == '\r'))
      ++i;
  }

  static std::string read_atom(std::string_view s, size_t& i) {
    size_t start = i;
    while (i < s.size() && s[i] != '(' && s[i] != ')' && s[i] != ' ' &&
           s[i] != '\t' && s[i] != '\n' && s[i] != '\r')
      ++i;
    if (start == i) throw ParseError("expected a label in constituency parse");
    return std::string(s.substr(start, i - start));
  }

  int parse_node(std::string_view s, size_t& i, int parent) {
    ++i;  // consume '('
    skip_ws(s, i);
    int idx = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    nodes_[static_cast<size_t>(idx)].label = read_atom(s, i);
    nodes_[static_cast<size_t>(idx)].parent = parent;
    int words = 0;
    while (true) {
      skip_ws(s, i);
      if (i >= s.size()) throw ParseError("unbalanced '(' in constituency parse");
      if (s[i] == ')') {
        ++i;
        break;
      }
      if (s[i] == '(') {
        int child = parse_node(s, i, idx);
        nodes_[static_cast<size_t>(idx)].children.push_back(child);
      } else {
        nodes_[static_cast<size_t>(idx)].word = read_atom(s, i);
        ++words;
      }
    }
    const Node& n = nodes_[static_cast<size_t>(idx)];
    if (words > 1 || (words == 1 && !n.children.empty()))
      throw ParseError("constituent '" + n.label + "' mixes words and phrases");
    if (words == 0 && n.children.empty())
      throw ParseError("constituent '" + n.label + "' is empty");
    if (words == 1) token_node_.push_back(idx);
    return idx;
  }

  // Fills `up` with nodes from `a` (inclusive) up to just below the LCA and
  // `down` with nodes from just below the LCA down to `b` (inclusive);
  // returns the LCA node index.
  int find_lca(size_t a, size_t b, std::vector<int>& up, std::vector<int>& down) const {
    std::vector<int> cb;
    for (int n = static_cast<int>(b); n != -1; n = nodes_[static_cast<size_t>(n)].parent)
      cb.push_back(n);
    std::unordered_map<int, size_t> where;
    for (size_t j = 0; j < cb.size(); ++j) where.emplace(cb[j], j);
    size_t lca_j = 0;
    for (int n = static_cast<int>(a);; n = nodes_[static_cast<size_t>(n)].parent) {
      auto it = where.find(n);
      if (it != where.end()) {
        lca_j = it->second;
        break;
      }
      up.push_back(n);
      if (nodes_[static_cast<size_t>(n)].parent == -1)
        throw InvariantError("constituency tree nodes are disconnected");
    }
    for (size_t j = lca_j; j > 0; --j) down.push_back(cb[j - 1]);
    return cb[lca_j];
  }

  std::string render(size_t idx) const {
    const Node& n = nodes_[idx];
    std::string out = "(" + n.label;
    if (!n.word.empty()) {
      out += ' ';
      out += n.word;
    }
    for (int c : n.children) {
      out += ' ';
      out += render(static_cast<size_t>(c));
    }
    out += ')';
    return out;
  }

  std::vector<Node> nodes_;
  std::vector<int> token_node_;
};

}  // namespace cpa
