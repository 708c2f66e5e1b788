// Enriched corpus I/O. One sentence per block, blocks separated by a blank
// line. Each block is three header lines followed by one row per token:
//
//   #id <unique sentence id>
//   #verb <target verb lemma>
//   #parse <single-line bracketed constituency parse>
//   index<TAB>word<TAB>lemma<TAB>pos<TAB>basic_head<TAB>basic_rel<TAB>
//                coll_head<TAB>coll_rel<TAB>syn<TAB>sem
//
// Heads are 0-based token indices, -1 for the root. A token collapsed out of
// the collapsed dependency variant has coll_head -1 and an empty coll_rel.
// The target verb row carries syn "v" and sem "_"; argument rows carry one of
// the six syntactic tags plus a semantic class; all other rows leave both
// columns empty.
#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cpa/error.hpp"
#include "cpa/trees.hpp"

namespace cpa {

// The six syntactic argument tags. The verb's own "v" marker is not a tag a
// classifier can assign; it is written mechanically.
enum class SynTag { subj, obj, iobj, advprep, acomp, scomp };

inline constexpr const char* kSynTagNames[] = {"subj", "obj",   "iobj",
                                               "advprep", "acomp", "scomp"};

inline std::string_view to_string(SynTag t) {
  return kSynTagNames[static_cast<int>(t)];
}

inline std::optional<SynTag> syn_tag_from(std::string_view s) {
  for (int i = 0; i < 6; ++i)
    if (s == kSynTagNames[i]) return static_cast<SynTag>(i);
  return std::nullopt;
}

struct Token {
  int index = 0;
  std::string word;
  std::string lemma;
  std::string pos;
  bool is_target_verb = false;
  std::optional<SynTag> gold_syn;
  std::optional<std::string> gold_sem;  // present iff gold_syn is
  bool operator==(const Token&) const = default;
};

class Sentence {
 public:
  std::string id;
  std::string verb;  // target verb lemma, matches the marked token's lemma
  std::vector<Token> tokens;
  DepTree basic;
  DepTree collapsed;
  ConstTree constituents;

  // Validates the sentence invariants and builds the lemma/POS caches the
  // path renderers take as spans. Must be called after filling the fields;
  // read_corpus does it for every sentence it returns.
  void finalize() {
    auto fail = [&](const std::string& what) {
      throw InvariantError("sentence '" + id + "': " + what);
    };
    if (tokens.empty()) fail("no tokens");
    const int n = static_cast<int>(tokens.size());
    verb_index_ = -1;
    lemmas_.clear();
    pos_.clear();
    for (int i = 0; i < n; ++i) {
      const Token& t = tokens[static_cast<size_t>(i)];
      if (t.index != i) fail("token indices must be 0..n-1 in order");
      if (t.word.empty() || t.lemma.empty() || t.pos.empty())
        fail("token " + std::to_string(i) + " has an empty word/lemma/pos");
      if (t.is_target_verb) {
        if (verb_index_ != -1) fail("more than one target verb");
        verb_index_ = i;
        if (t.gold_syn || t.gold_sem)
          fail("target verb must not carry argument tags");
      }
      if (t.gold_syn.has_value() != t.gold_sem.has_value())
        fail("token " + std::to_string(i) +
             " must carry both layer tags or neither");
      lemmas_.push_back(t.lemma);
      pos_.push_back(t.pos);
    }
    if (verb_index_ == -1) fail("no target verb");
    if (verb.empty()) fail("missing verb lemma");
    if (tokens[static_cast<size_t>(verb_index_)].lemma != verb)
      fail("target verb token lemma does not match the header lemma '" + verb + "'");
    if (basic.size() != n) fail("basic dependency tree size mismatch");
    if (collapsed.size() != n) fail("collapsed dependency tree size mismatch");
    for (int i = 0; i < n; ++i)
      if (!basic.has_node(i))
        fail("token " + std::to_string(i) + " missing from the basic tree");
    if (constituents.leaf_count() != n)
      fail("constituency parse has " + std::to_string(constituents.leaf_count()) +
           " leaves for " + std::to_string(n) + " tokens");
    for (int i = 0; i < n; ++i)
      if (constituents.word(i) != tokens[static_cast<size_t>(i)].word)
        fail("constituency leaf " + std::to_string(i) +
             " does not match the token word");
  }

  int verb_index() const { return verb_index_; }
  std::span<const std::string> lemmas() const { return lemmas_; }
  std::span<const std::string> pos() const { return pos_; }

 private:
  int verb_index_ = -1;
  std::vector<std::string> lemmas_;
  std::vector<std::string> pos_;
};

struct Dataset {
  std::vector<Sentence> sentences;
};

// Predicted (or gold) tags for the argument tokens of one sentence, keyed by
// token index. The verb row is implicit and never appears here.
struct TagPair {
  SynTag syn = SynTag::subj;
  std::string sem;
  bool operator==(const TagPair&) const = default;
};

struct SentencePrediction {
  std::map<int, TagPair> tags;
  bool operator==(const SentencePrediction&) const = default;
};

using Predictions = std::map<std::string, SentencePrediction>;  // sentence id ->

namespace detail {

inline int parse_int(std::string_view s, int line, const char* what) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ParseError(std::string("bad ") + what + " '" + std::string(s) + "'", line);
  return v;
}

inline std::vector<std::string_view> split_tabs(std::string_view s) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    size_t tab = s.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, tab - start));
    start = tab + 1;
  }
}

inline void check_no_space(std::string_view v, int line, const char* what) {
  if (v.find(' ') != std::string_view::npos)
    throw ParseError(std::string(what) + " must not contain spaces", line);
}

}  // namespace detail

// Reads a whole corpus. Format errors raise ParseError with the line number;
// sentence-level invariant breaks raise InvariantError naming the sentence.
inline Dataset read_corpus_stream(std::istream& in) {
  Dataset ds;
  std::set<std::string> seen_ids;
  std::string line;
  int lineno = 0;

  // Per-sentence accumulation
  std::string id, verb, parse;
  int parse_line = 0;
  struct Row {
    Token tok;
    std::optional<DepArc> basic, coll;
  };
  std::vector<Row> rows;
  bool in_sentence = false;

  auto flush = [&]() {
    if (!in_sentence) return;
    if (parse.empty()) throw ParseError("sentence '" + id + "' has no #parse header");
    if (rows.empty()) throw ParseError("sentence '" + id + "' has no token rows");
    Sentence s;
    s.id = id;
    s.verb = verb;
    std::vector<std::optional<DepArc>> basic_arcs, coll_arcs;
    for (Row& r : rows) {
      s.tokens.push_back(std::move(r.tok));
      basic_arcs.push_back(std::move(r.basic));
      coll_arcs.push_back(std::move(r.coll));
    }
    try {
      s.basic = DepTree::build(std::move(basic_arcs));
      s.collapsed = DepTree::build(std::move(coll_arcs));
    } catch (const InvariantError& e) {
      throw InvariantError("sentence '" + id + "': " + e.what());
    }
    try {
      s.constituents = ConstTree::parse(parse);
    } catch (const ParseError& e) {
      throw ParseError("sentence '" + id + "': " + e.what(), parse_line);
    }
    s.finalize();
    if (!seen_ids.insert(s.id).second)
      throw InvariantError("duplicate sentence id '" + s.id + "'");
    ds.sentences.push_back(std::move(s));
    id.clear();
    verb.clear();
    parse.clear();
    rows.clear();
    in_sentence = false;
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line.starts_with("#id ")) {
      if (in_sentence) throw ParseError("unexpected #id inside a sentence", lineno);
      id = line.substr(4);
      if (id.empty()) throw ParseError("empty sentence id", lineno);
      in_sentence = true;
      continue;
    }
    if (!in_sentence)
      throw ParseError("expected '#id' to open a sentence", lineno);
    if (line.starts_with("#verb ")) {
      if (!verb.empty() || !rows.empty())
        throw ParseError("misplaced #verb header", lineno);
      verb = line.substr(6);
      continue;
    }
    if (line.starts_with("#parse ")) {
      if (verb.empty() || !parse.empty() || !rows.empty())
        throw ParseError("misplaced #parse header", lineno);
      parse = line.substr(7);
      parse_line = lineno;
      continue;
    }
    if (line.starts_with("#"))
      throw ParseError("unknown header '" + line + "'", lineno);

    if (verb.empty() || parse.empty())
      throw ParseError("token row before #verb/#parse headers", lineno);
    auto f = detail::split_tabs(line);
    if (f.size() != 10)
      throw ParseError("expected 10 tab-separated columns, got " +
                           std::to_string(f.size()), lineno);
    Row r;
    r.tok.index = detail::parse_int(f[0], lineno, "token index");
    if (r.tok.index != static_cast<int>(rows.size()))
      throw ParseError("token index out of order", lineno);
    r.tok.word = std::string(f[1]);
    r.tok.lemma = std::string(f[2]);
    r.tok.pos = std::string(f[3]);
    for (int c = 1; c <= 3; ++c) {
      if (f[static_cast<size_t>(c)].empty())
        throw ParseError("empty word/lemma/pos column", lineno);
      detail::check_no_space(f[static_cast<size_t>(c)], lineno, "word/lemma/pos");
    }
    int bh = detail::parse_int(f[4], lineno, "basic head");
    if (f[5].empty())
      throw ParseError("basic relation must not be empty", lineno);
    r.basic = DepArc{bh, std::string(f[5])};
    int ch = detail::parse_int(f[6], lineno, "collapsed head");
    if (f[7].empty()) {
      if (ch != -1)
        throw ParseError("empty collapsed relation with a head present", lineno);
      r.coll = std::nullopt;  // token absent from the collapsed tree
    } else {
      r.coll = DepArc{ch, std::string(f[7])};
    }
    std::string_view syn = f[8], sem = f[9];
    if (syn == "v") {
      if (sem != "_")
        throw ParseError("target verb row must carry sem '_'", lineno);
      r.tok.is_target_verb = true;
    } else if (syn.empty()) {
      if (!sem.empty())
        throw ParseError("semantic tag without a syntactic tag", lineno);
    } else {
      auto tag = syn_tag_from(syn);
      if (!tag)
        throw ParseError("unknown syntactic tag '" + std::string(syn) + "'", lineno);
      if (sem.empty() || sem == "_")
        throw ParseError("argument row needs a semantic class", lineno);
      detail::check_no_space(sem, lineno, "semantic class");
      r.tok.gold_syn = *tag;
      r.tok.gold_sem = std::string(sem);
    }
    rows.push_back(std::move(r));
  }
  flush();
  return ds;
}

inline Dataset read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file " + path.string());
  return read_corpus_stream(in);
}

// Gold tags of a dataset in prediction form (verb rows excluded).
inline Predictions gold_predictions(const Dataset& ds) {
  Predictions out;
  for (const Sentence& s : ds.sentences) {
    SentencePrediction p;
    for (const Token& t : s.tokens)
      if (t.gold_syn) p.tags[t.index] = {*t.gold_syn, *t.gold_sem};
    out[s.id] = std::move(p);
  }
  return out;
}

namespace detail {

inline void write_sentence(std::ostream& out, const Sentence& s,
                           const SentencePrediction* pred) {
  out << "#id " << s.id << '\n';
  out << "#verb " << s.verb << '\n';
  out << "#parse " << s.constituents.to_bracketed() << '\n';
  const int n = static_cast<int>(s.tokens.size());
  if (pred) {
    for (const auto& [idx, tag] : pred->tags) {
      if (idx < 0 || idx >= n)
        throw InvariantError("sentence '" + s.id + "': predicted token index " +
                             std::to_string(idx) + " out of range");
      if (idx == s.verb_index())
        throw InvariantError("sentence '" + s.id +
                             "': prediction collides with the target verb row");
      if (tag.sem.empty() || tag.sem == "_")
        throw InvariantError("sentence '" + s.id +
                             "': predicted semantic class is empty");
    }
  }
  for (int i = 0; i < n; ++i) {
    const Token& t = s.tokens[static_cast<size_t>(i)];
    const auto& basic = s.basic.arcs()[static_cast<size_t>(i)];
    const auto& coll = s.collapsed.arcs()[static_cast<size_t>(i)];
    out << i << '\t' << t.word << '\t' << t.lemma << '\t' << t.pos << '\t'
        << basic->head << '\t' << basic->relation << '\t';
    if (coll)
      out << coll->head << '\t' << coll->relation << '\t';
    else
      out << -1 << '\t' << '\t';
    if (t.is_target_verb) {
      out << "v\t_";
    } else if (pred) {
      auto it = pred->tags.find(i);
      if (it != pred->tags.end())
        out << to_string(it->second.syn) << '\t' << it->second.sem;
      else
        out << '\t';
    } else {
      out << '\t';
    }
    out << '\n';
  }
}

}  // namespace detail

// Writes tags from `pred`; sentences missing from it get blank tag columns
// (the verb row is always written). Pass gold_predictions(ds) to round-trip.
inline void write_predictions(const Dataset& ds, const Predictions& pred,
                              std::ostream& out) {
  bool first = true;
  for (const Sentence& s : ds.sentences) {
    if (!first) out << '\n';
    first = false;
    auto it = pred.find(s.id);
    detail::write_sentence(out, s, it == pred.end() ? nullptr : &it->second);
  }
}

inline void write_predictions(const Dataset& ds, const Predictions& pred,
                              const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_predictions(ds, pred, out);
  if (!out) throw IoError("failed while writing " + path.string());
}

// Writes the dataset with its gold tags.
inline void write_corpus(const Dataset& ds, std::ostream& out) {
  write_predictions(ds, gold_predictions(ds), out);
}

inline void write_corpus(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_corpus(ds, out);
  if (!out) throw IoError("failed while writing " + path.string());
}

// Splits by target verb lemma: sentences whose verb is in dev_verbs go to the
// second dataset. Dev verbs that never occur are reported through `warnings`.
inline std::pair<Dataset, Dataset> split_by_verbs(
    const Dataset& ds, const std::set<std::string>& dev_verbs,
    std::vector<std::string>* warnings = nullptr) {
  Dataset train, dev;
  std::set<std::string> seen;
  for (const Sentence& s : ds.sentences) {
    if (dev_verbs.count(s.verb)) {
      seen.insert(s.verb);
      dev.sentences.push_back(s);
    } else {
      train.sentences.push_back(s);
    }
  }
  if (warnings)
    for (const std::string& v : dev_verbs)
      if (!seen.count(v))
        warnings->push_back("held-out verb '" + v + "' has no sentences");
  return {std::move(train), std::move(dev)};
}

}  // namespace cpa
