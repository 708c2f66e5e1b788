// Shared test helpers: fixture paths, a sentence builder, random trees with
// a breadth-first-search path oracle, and the synthetic separable corpus.
#pragma once

#include <atomic>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cpa/cpa.hpp"

namespace ts {

inline std::filesystem::path data_dir() { return std::filesystem::path(CPA_DATA_DIR); }

inline std::filesystem::path fixture(const std::string& name) {
  return data_dir() / "fixtures" / name;
}

inline cpa::Dataset load_fixture(const std::string& name) {
  return cpa::read_corpus(fixture(name));
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("cpa-test-" + std::to_string(counter++) + "-" +
             std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// One row of a sentence under construction. An empty syn means untagged, "v"
// marks the target verb, anything else is a syntactic tag paired with sem.
// coll_head -1 with an empty coll_rel means the token is absent from the
// collapsed tree.
struct TokenSpec {
  std::string word;
  std::string lemma;
  std::string pos;
  int basic_head = -1;
  std::string basic_rel;
  int coll_head = -1;
  std::string coll_rel;
  std::string syn;
  std::string sem;
};

inline cpa::Sentence make_sentence(const std::string& id, const std::string& verb,
                                   const std::string& parse,
                                   const std::vector<TokenSpec>& specs) {
  cpa::Sentence s;
  s.id = id;
  s.verb = verb;
  std::vector<std::optional<cpa::DepArc>> basic, coll;
  for (size_t i = 0; i < specs.size(); ++i) {
    const TokenSpec& sp = specs[i];
    cpa::Token t;
    t.index = static_cast<int>(i);
    t.word = sp.word;
    t.lemma = sp.lemma;
    t.pos = sp.pos;
    if (sp.syn == "v") {
      t.is_target_verb = true;
    } else if (!sp.syn.empty()) {
      auto tag = cpa::syn_tag_from(sp.syn);
      if (!tag) throw std::runtime_error("bad syn tag in spec: " + sp.syn);
      t.gold_syn = *tag;
      t.gold_sem = sp.sem;
    }
    s.tokens.push_back(std::move(t));
    basic.push_back(cpa::DepArc{sp.basic_head, sp.basic_rel});
    if (sp.coll_head == -1 && sp.coll_rel.empty())
      coll.push_back(std::nullopt);
    else
      coll.push_back(cpa::DepArc{sp.coll_head, sp.coll_rel});
  }
  s.basic = cpa::DepTree::build(basic);
  s.collapsed = cpa::DepTree::build(coll);
  s.constituents = cpa::ConstTree::parse(parse);
  s.finalize();
  return s;
}

// ---------------------------------------------------------------------------
// Random dependency trees and a BFS oracle for path queries.

struct RandomDepTree {
  std::vector<std::optional<cpa::DepArc>> arcs;
  std::vector<std::string> lemmas;
  std::vector<std::string> pos;
  std::vector<int> nodes;  // indices present in the tree
};

inline RandomDepTree random_dep_tree(std::mt19937_64& gen, int max_tokens = 12) {
  static const char* kRels[] = {"nsubj", "dobj", "det", "amod", "prep_of", "advmod"};
  static const char* kPos[] = {"NN", "VBD", "JJ", "IN", "DT", "VB"};
  int n = 1 + static_cast<int>(gen() % static_cast<std::uint64_t>(max_tokens));
  std::vector<int> idx(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<size_t>(i)] = i;
  for (size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[gen() % i]);
  int k = 1 + static_cast<int>(gen() % static_cast<std::uint64_t>(n));
  std::vector<int> picked(idx.begin(), idx.begin() + k);

  RandomDepTree t;
  t.arcs.assign(static_cast<size_t>(n), std::nullopt);
  t.nodes = picked;
  std::sort(t.nodes.begin(), t.nodes.end());
  t.arcs[static_cast<size_t>(picked[0])] = cpa::DepArc{-1, "root"};
  for (int i = 1; i < k; ++i) {
    int parent = picked[gen() % static_cast<std::uint64_t>(i)];
    t.arcs[static_cast<size_t>(picked[static_cast<size_t>(i)])] =
        cpa::DepArc{parent, kRels[gen() % 6]};
  }
  for (int i = 0; i < n; ++i) {
    t.lemmas.push_back("l" + std::to_string(i));
    t.pos.push_back(kPos[gen() % 6]);
  }
  return t;
}

// Shortest path between two tokens over the arc set, following edges only
// downward (head to child) when directed. Tree paths are unique, so BFS and
// the implementation must agree exactly.
inline std::optional<std::vector<cpa::DepStep>> bfs_dep_path(
    const std::vector<std::optional<cpa::DepArc>>& arcs, int from, int to, bool directed) {
  const int n = static_cast<int>(arcs.size());
  if (from < 0 || from >= n || to < 0 || to >= n) return std::nullopt;
  if (!arcs[static_cast<size_t>(from)] || !arcs[static_cast<size_t>(to)])
    return std::nullopt;
  if (from == to) return std::vector<cpa::DepStep>{};

  std::vector<std::vector<std::pair<int, cpa::DepStep>>> adj(static_cast<size_t>(n));
  for (int c = 0; c < n; ++c) {
    const auto& arc = arcs[static_cast<size_t>(c)];
    if (!arc || arc->head < 0) continue;
    int h = arc->head;
    adj[static_cast<size_t>(h)].push_back({c, cpa::DepStep{arc->relation, false, h}});
    if (!directed)
      adj[static_cast<size_t>(c)].push_back({h, cpa::DepStep{arc->relation, true, c}});
  }

  std::vector<int> prev(static_cast<size_t>(n), -2);
  std::vector<cpa::DepStep> via(static_cast<size_t>(n));
  std::deque<int> q{from};
  prev[static_cast<size_t>(from)] = -1;
  while (!q.empty()) {
    int u = q.front();
    q.pop_front();
    for (const auto& [v, st] : adj[static_cast<size_t>(u)]) {
      if (prev[static_cast<size_t>(v)] != -2) continue;
      prev[static_cast<size_t>(v)] = u;
      via[static_cast<size_t>(v)] = st;
      q.push_back(v);
    }
  }
  if (prev[static_cast<size_t>(to)] == -2) return std::nullopt;
  std::vector<cpa::DepStep> path;
  for (int v = to; v != from; v = prev[static_cast<size_t>(v)])
    path.push_back(via[static_cast<size_t>(v)]);
  std::reverse(path.begin(), path.end());
  return path;
}

// ---------------------------------------------------------------------------
// Random constituency trees built from a known node table, so path
// expectations can be computed independently of ConstTree.

struct ConstNode {
  std::string label;
  int parent = -1;
  bool leaf = false;
};

struct RandomConstTree {
  std::vector<ConstNode> nodes;
  std::vector<int> leaves;  // node ids in left-to-right order
  std::string bracketed;
};

namespace detail {

// A phrase node is only opened with room for itself plus one leaf child, so
// the finished tree never exceeds max_nodes nodes.
inline void gen_const_node(RandomConstTree& t, int parent, int depth, int max_nodes,
                           std::mt19937_64& gen, std::string& out) {
  static const char* kPhrase[] = {"S", "NP", "VP", "PP"};
  static const char* kPre[] = {"NN", "VBD", "DT", "IN", "JJ"};
  int id = static_cast<int>(t.nodes.size());
  bool leaf = depth >= 4 || id + 2 > max_nodes || gen() % 3 == 0;
  if (leaf) {
    t.nodes.push_back({kPre[gen() % 5], parent, true});
    out += "(" + t.nodes.back().label + " w" + std::to_string(t.leaves.size()) + ")";
    t.leaves.push_back(id);
    return;
  }
  t.nodes.push_back({kPhrase[gen() % 4], parent, false});
  out += "(" + t.nodes[static_cast<size_t>(id)].label;
  int kids = 1 + static_cast<int>(gen() % 3);
  for (int i = 0; i < kids; ++i) {
    if (i > 0 && static_cast<int>(t.nodes.size()) >= max_nodes) break;
    out += " ";
    gen_const_node(t, id, depth + 1, max_nodes, gen, out);
  }
  out += ")";
}

}  // namespace detail

inline RandomConstTree random_const_tree(std::mt19937_64& gen, int max_nodes = 12) {
  RandomConstTree t;
  int budget = 2 + static_cast<int>(gen() % static_cast<std::uint64_t>(max_nodes - 1));
  std::string out;
  int id = static_cast<int>(t.nodes.size());
  t.nodes.push_back({"ROOT", -1, false});
  out += "(ROOT";
  int kids = 1 + static_cast<int>(gen() % 2);
  for (int i = 0; i < kids; ++i) {
    if (i > 0 && static_cast<int>(t.nodes.size()) >= budget) break;
    out += " ";
    detail::gen_const_node(t, id, 1, budget, gen, out);
  }
  out += ")";
  t.bracketed = out;
  return t;
}

inline std::vector<int> const_chain_to_root(const RandomConstTree& t, int node) {
  std::vector<int> chain;
  for (int v = node; v != -1; v = t.nodes[static_cast<size_t>(v)].parent)
    chain.push_back(v);
  return chain;
}

// Expected rendering of the leaf-to-leaf path: up labels joined by '^'
// through the lowest common ancestor, then each down label prefixed by 'v'.
inline std::pair<std::string, int> const_path_oracle(const RandomConstTree& t, int li,
                                                     int lj) {
  int a = t.leaves[static_cast<size_t>(li)];
  int b = t.leaves[static_cast<size_t>(lj)];
  if (a == b) return {t.nodes[static_cast<size_t>(a)].label, 0};
  std::vector<int> ca = const_chain_to_root(t, a);
  std::vector<int> cb = const_chain_to_root(t, b);
  size_t ia = ca.size(), ib = cb.size();
  while (ia > 0 && ib > 0 && ca[ia - 1] == cb[ib - 1]) {
    --ia;
    --ib;
  }
  // ca[0..ia] ends at the LCA; cb[0..ib-1] is the downward branch reversed.
  std::string out;
  for (size_t i = 0; i <= ia; ++i) {
    if (i) out += '^';
    out += t.nodes[static_cast<size_t>(ca[i])].label;
  }
  for (size_t i = ib; i-- > 0;) out += "v" + t.nodes[static_cast<size_t>(cb[i])].label;
  return {out, static_cast<int>(ia + ib)};
}

// ---------------------------------------------------------------------------
// Synthetic separable corpus: four tokens per sentence, lemma alone decides
// every stage, so a TokenLemma model can reach a perfect score.

inline cpa::Dataset demo_corpus(int n, const std::string& prefix = "demo") {
  static const char* kSubj[] = {"alpha", "delta"};
  static const char* kObj[] = {"beta", "epsilon"};
  static const char* kFill[] = {"zeta", "eta"};
  static const char* kVerbs[] = {"act", "move"};
  cpa::Dataset ds;
  for (int i = 0; i < n; ++i) {
    std::string v = kVerbs[i % 2];
    std::string su = kSubj[(i / 2) % 2];
    std::string ob = kObj[(i / 4) % 2];
    std::string fi = kFill[(i / 8) % 2];
    char id[64];
    std::snprintf(id, sizeof id, "%s-%04d", prefix.c_str(), i);
    std::string parse = "(ROOT (S (NP (NN " + su + ")) (VP (VBZ " + v + ") (NP (NN " + ob +
                        ")) (ADVP (RB " + fi + ")))))";
    ds.sentences.push_back(make_sentence(
        id, v, parse,
        {{su, su, "NN", 1, "nsubj", 1, "nsubj", "subj", "Human"},
         {v, v, "VBZ", -1, "root", -1, "root", "v", "_"},
         {ob, ob, "NN", 1, "dobj", 1, "dobj", "obj", "Institution"},
         {fi, fi, "RB", 1, "advmod", 1, "advmod", "", ""}}));
  }
  return ds;
}

}  // namespace ts
