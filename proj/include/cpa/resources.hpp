// External lexical resources the semantic features draw on: word embeddings
// in word2vec text format, a lemma -> hypernym-chain lexicon, the verb+prep
// probability table, and plain word lists.
#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cpa/error.hpp"

namespace cpa {

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

namespace detail {

inline double parse_double(std::string_view s, const std::string& where) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ParseError("bad number '" + std::string(s) + "' in " + where);
  return v;
}

inline std::vector<std::string> split_tabs_copy(const std::string& s) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t tab = s.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, tab - start));
    start = tab + 1;
  }
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    size_t start = i;
    while (i < s.size() && s[i] != ' ') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace detail

// Case-insensitive embedding store. Keys are lowercased at load and queries
// are lowercased before lookup; a vocabulary that collides after lowercasing
// is rejected as corrupt.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  explicit EmbeddingStore(int dimension) : dim_(dimension) {}

  static EmbeddingStore load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open embeddings file " + path.string());
    std::string line;
    if (!std::getline(in, line))
      throw ParseError("empty embeddings file " + path.string());
    auto header = detail::split_ws(line);
    if (header.size() != 2)
      throw ParseError("embeddings header must be '<count> <dimension>'");
    long count = static_cast<long>(detail::parse_double(header[0], "header"));
    int dim = static_cast<int>(detail::parse_double(header[1], "header"));
    if (count < 0 || dim <= 0) throw ParseError("bad embeddings header");
    EmbeddingStore store(dim);
    long rows = 0;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      auto f = detail::split_ws(line);
      if (static_cast<int>(f.size()) != dim + 1)
        throw ParseError("embedding row for '" + std::string(f.empty() ? "" : f[0]) +
                         "' has " + std::to_string(f.size() ? f.size() - 1 : 0) +
                         " values, expected " + std::to_string(dim));
      std::vector<double> v(static_cast<size_t>(dim));
      for (int d = 0; d < dim; ++d)
        v[static_cast<size_t>(d)] =
            detail::parse_double(f[static_cast<size_t>(d) + 1], "embeddings");
      store.add(std::string(f[0]), std::move(v));
      ++rows;
    }
    if (rows != count)
      throw ParseError("embeddings header promises " + std::to_string(count) +
                       " rows but the file has " + std::to_string(rows));
    return store;
  }

  void add(std::string word, std::vector<double> vec) {
    if (static_cast<int>(vec.size()) != dim_)
      throw ParseError("embedding for '" + word + "' has dimension " +
                       std::to_string(vec.size()) + ", store expects " +
                       std::to_string(dim_));
    std::string key = to_lower(word);
    if (index_.count(key))
      throw ParseError("duplicate embedding entry '" + key + "'");
    index_.emplace(key, words_.size());
    words_.push_back(key);
    norms_.push_back(std::sqrt(detail::dot(vec, vec)));
    vectors_.push_back(std::move(vec));
  }

  int dimension() const { return dim_; }
  int size() const { return static_cast<int>(words_.size()); }

  const std::vector<double>* vector_of(std::string_view word) const {
    auto it = index_.find(to_lower(word));
    if (it == index_.end()) return nullptr;
    return &vectors_[it->second];
  }

  // Cosine of an arbitrary vector against a stored word (0 when either side
  // has zero norm).
  double cosine_to(std::span<const double> v, size_t row) const {
    double nv = std::sqrt(detail::dot(v, v));
    if (nv == 0.0 || norms_[row] == 0.0) return 0.0;
    return detail::dot(v, vectors_[row]) / (nv * norms_[row]);
  }

  // The k vocabulary words most cosine-similar to `word`, excluding the word
  // itself. Ties break toward the lexicographically smaller word. Unknown
  // words yield an empty list.
  std::vector<std::pair<std::string, double>> top_similar(std::string_view word,
                                                          int k) const {
    std::vector<std::pair<std::string, double>> out;
    std::string key = to_lower(word);
    auto it = index_.find(key);
    if (it == index_.end() || k <= 0) return out;
    const std::vector<double>& q = vectors_[it->second];
    for (size_t row = 0; row < words_.size(); ++row) {
      if (row == it->second) continue;
      out.emplace_back(words_[row], cosine_to(q, row));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    if (static_cast<int>(out.size()) > k) out.resize(static_cast<size_t>(k));
    return out;
  }

  const std::vector<std::string>& words() const { return words_; }

 private:
  int dim_ = 0;
  std::unordered_map<std::string, size_t> index_;
  std::vector<std::string> words_;
  std::vector<std::vector<double>> vectors_;
  std::vector<double> norms_;
};

// Splits a semantic class name into lowercase parts: whitespace, underscores,
// hyphens and CamelCase boundaries all separate ("LexicalItem" -> lexical,
// item; "State Of Affairs" -> state, of, affairs).
inline std::vector<std::string> split_class_name(std::string_view name) {
  std::vector<std::string> parts;
  std::string cur;
  char prev = '\0';
  for (char c : name) {
    if (c == ' ' || c == '_' || c == '-' || c == '\t') {
      if (!cur.empty()) parts.push_back(cur);
      cur.clear();
    } else {
      if (std::isupper(static_cast<unsigned char>(c)) &&
          std::islower(static_cast<unsigned char>(prev)) && !cur.empty()) {
        parts.push_back(cur);
        cur.clear();
      }
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    prev = c;
  }
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

// Mean of the embedding vectors of the class name's parts, skipping parts
// missing from the vocabulary. Absent when no part is known.
inline std::optional<std::vector<double>> class_vector(const EmbeddingStore& store,
                                                       std::string_view name) {
  std::vector<double> sum(static_cast<size_t>(store.dimension()), 0.0);
  int hits = 0;
  for (const std::string& part : split_class_name(name)) {
    const std::vector<double>* v = store.vector_of(part);
    if (!v) continue;
    for (size_t d = 0; d < sum.size(); ++d) sum[d] += (*v)[d];
    ++hits;
  }
  if (hits == 0) return std::nullopt;
  for (double& x : sum) x /= hits;
  return sum;
}

// Precomputed class vectors in inventory order, skipping classes with no
// in-vocabulary part.
struct ClassVectors {
  std::vector<std::pair<std::string, std::vector<double>>> entries;
};

inline ClassVectors build_class_vectors(const EmbeddingStore& store,
                                        std::span<const std::string> classes) {
  ClassVectors cv;
  for (const std::string& c : classes)
    if (auto v = class_vector(store, c)) cv.entries.emplace_back(c, std::move(*v));
  return cv;
}

// Class names ranked by cosine similarity to `v`, best first, ties toward the
// lexicographically smaller name, truncated to k.
inline std::vector<std::string> rank_classes(std::span<const double> v,
                                             const ClassVectors& cv, int k) {
  std::vector<std::pair<double, const std::string*>> scored;
  double nv = std::sqrt(detail::dot(v, v));
  for (const auto& [name, cvec] : cv.entries) {
    double nc = std::sqrt(detail::dot(cvec, cvec));
    double cos = (nv == 0.0 || nc == 0.0) ? 0.0 : detail::dot(v, cvec) / (nv * nc);
    scored.emplace_back(cos, &name);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return *a.second < *b.second;
  });
  std::vector<std::string> out;
  for (const auto& [cos, name] : scored) {
    if (static_cast<int>(out.size()) >= k) break;
    out.push_back(*name);
  }
  return out;
}

// The k semantic classes whose name vectors lie closest to the lemma's
// embedding. Unknown lemmas yield an empty list.
inline std::vector<std::string> most_similar_labels(const EmbeddingStore& store,
                                                    std::string_view lemma,
                                                    std::span<const std::string> classes,
                                                    int k = 10) {
  const std::vector<double>* v = store.vector_of(lemma);
  if (!v) return {};
  return rank_classes(*v, build_class_vectors(store, classes), k);
}

// Maps a Penn treebank tag to the lexicon's POS class letter (n/v/a/r);
// empty when the tag has no mapped class.
inline std::string wordnet_pos_class(std::string_view penn) {
  if (penn.starts_with('N')) return "n";
  if (penn.starts_with('V')) return "v";
  if (penn.starts_with('J')) return "a";
  if (penn.starts_with('R')) return "r";
  return "";
}

// Lemma -> hypernym chain, most specific concept first, truncated before the
// ontology root ("entity" never appears). File format, one entry per line:
//   lemma<TAB>pos_class<TAB>hyper1,hyper2,...
class HypernymLexicon {
 public:
  static HypernymLexicon load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open hypernym lexicon " + path.string());
    HypernymLexicon lex;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      size_t t1 = line.find('\t');
      size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
      if (t2 == std::string::npos)
        throw ParseError("hypernym entry needs 3 tab-separated fields", lineno);
      std::string lemma = line.substr(0, t1);
      std::string pos = line.substr(t1 + 1, t2 - t1 - 1);
      std::vector<std::string> chain;
      std::string rest = line.substr(t2 + 1);
      size_t start = 0;
      while (start <= rest.size()) {
        size_t comma = rest.find(',', start);
        std::string part = rest.substr(
            start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!part.empty()) chain.push_back(part);
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      try {
        lex.add(lemma, pos, std::move(chain));
      } catch (const Error& e) {
        throw ParseError(std::string(e.what()), lineno);
      }
    }
    return lex;
  }

  void add(std::string_view lemma, std::string_view pos_class,
           std::vector<std::string> chain) {
    if (chain.empty())
      throw ResourceError("empty hypernym chain for '" + std::string(lemma) + "'");
    for (const std::string& h : chain)
      if (h == "entity")
        throw ResourceError("hypernym chain for '" + std::string(lemma) +
                            "' contains the ontology root");
    entries_[key(lemma, pos_class)] = std::move(chain);
  }

  // Chain for (lemma, Penn POS tag); empty when unknown.
  const std::vector<std::string>& chain(std::string_view lemma,
                                        std::string_view penn_pos) const {
    static const std::vector<std::string> kEmpty;
    std::string pc = wordnet_pos_class(penn_pos);
    if (pc.empty()) return kEmpty;
    auto it = entries_.find(key(lemma, pc));
    return it == entries_.end() ? kEmpty : it->second;
  }

  size_t size() const { return entries_.size(); }

 private:
  static std::string key(std::string_view lemma, std::string_view pos_class) {
    return to_lower(lemma) + "\t" + std::string(pos_class);
  }

  std::unordered_map<std::string, std::vector<std::string>> entries_;
};

// P(verb followed directly by preposition) estimated from a raw corpus:
// count(verb,prep) / count(verb). Built tables hold an entry for every
// (seen verb, listed prep) pair, zeros included.
class VerbPrepTable {
 public:
  static VerbPrepTable load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open verb+prep table " + path.string());
    VerbPrepTable t;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      auto f = detail::split_tabs_copy(line);
      if (f.size() != 3)
        throw ParseError("verb+prep row needs 3 tab-separated fields", lineno);
      double p = detail::parse_double(f[2], "verb+prep table");
      if (p < 0.0 || p > 1.0)
        throw ParseError("verb+prep probability out of [0,1]", lineno);
      if (!t.probs_[f[0]].emplace(f[1], p).second)
        throw ParseError("duplicate verb+prep entry", lineno);
    }
    return t;
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    save(out);
    if (!out) throw IoError("failed while writing " + path.string());
  }

  void save(std::ostream& out) const {
    out.precision(17);
    for (const auto& [verb, preps] : probs_)
      for (const auto& [prep, p] : preps)
        out << verb << '\t' << prep << '\t' << p << '\n';
  }

  void set(std::string verb, std::string prep, double p) {
    probs_[std::move(verb)][std::move(prep)] = p;
  }

  double probability(std::string_view verb, std::string_view prep) const {
    auto it = probs_.find(std::string(verb));
    if (it == probs_.end()) return 0.0;
    auto jt = it->second.find(std::string(prep));
    return jt == it->second.end() ? 0.0 : jt->second;
  }

  bool has_verb(std::string_view verb) const {
    return probs_.count(std::string(verb)) > 0;
  }

  const std::map<std::string, std::map<std::string, double>>& entries() const {
    return probs_;
  }

  bool operator==(const VerbPrepTable&) const = default;

 private:
  std::map<std::string, std::map<std::string, double>> probs_;
};

// Streaming accumulator behind build_verb_prep_table. Feed sentences as
// (surface word, lemma) pairs; occurrences are counted per lemma and a
// verb+prep pair is counted when the next surface word is a listed
// preposition. Counting is per occurrence, so merging shards adds up.
class VerbPrepCounter {
 public:
  VerbPrepCounter(std::set<std::string> preps, std::set<std::string> verbs = {})
      : preps_(std::move(preps)), verbs_(std::move(verbs)) {}

  void add_sentence(std::span<const std::pair<std::string, std::string>> tokens) {
    for (size_t i = 0; i < tokens.size(); ++i) {
      const std::string& lemma = tokens[i].second;
      if (!verbs_.empty() && !verbs_.count(lemma)) continue;
      ++occurrences_[lemma];
      if (i + 1 < tokens.size()) {
        std::string next = to_lower(tokens[i + 1].first);
        if (preps_.count(next)) ++pairs_[lemma][next];
      }
    }
  }

  VerbPrepTable finish() const {
    VerbPrepTable t;
    for (const auto& [verb, total] : occurrences_) {
      auto pit = pairs_.find(verb);
      for (const std::string& prep : preps_) {
        long c = 0;
        if (pit != pairs_.end()) {
          auto cit = pit->second.find(prep);
          if (cit != pit->second.end()) c = cit->second;
        }
        t.set(verb, prep, static_cast<double>(c) / static_cast<double>(total));
      }
    }
    return t;
  }

  const std::map<std::string, long>& occurrences() const { return occurrences_; }

 private:
  std::set<std::string> preps_;
  std::set<std::string> verbs_;
  std::map<std::string, long> occurrences_;
  std::map<std::string, std::map<std::string, long>> pairs_;
};

inline VerbPrepTable build_verb_prep_table(
    const std::vector<std::vector<std::pair<std::string, std::string>>>& sentences,
    const std::set<std::string>& preps, const std::set<std::string>& verbs = {}) {
  VerbPrepCounter counter(preps, verbs);
  for (const auto& s : sentences) counter.add_sentence(s);
  return counter.finish();
}

// One entry per non-empty line.
inline std::set<std::string> load_word_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open word list " + path.string());
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.insert(line);
  }
  return out;
}

// Ordered class inventory, one name per line (names may contain spaces).
inline std::vector<std::string> load_class_inventory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open class inventory " + path.string());
  std::vector<std::string> out;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!seen.insert(line).second)
      throw ParseError("duplicate class '" + line + "'", lineno);
    out.push_back(line);
  }
  return out;
}

struct WordLists {
  std::set<std::string> advprep_words;       // words that can head an advprep
  std::set<std::string> prepositional_verbs; // verbs that take prep complements
};

}  // namespace cpa
