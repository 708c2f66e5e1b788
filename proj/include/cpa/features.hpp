// The feature catalogue and extractor. Every feature has a catalogue name
// (used in subset files and for selection) and renders into string-keyed
// indicator or real-valued entries. All dependency features read the
// collapsed tree except TokenIsPrepositionOfVerb, which needs the basic tree
// because collapsing removes the preposition nodes it looks for.
#pragma once

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cpa/corpus.hpp"
#include "cpa/error.hpp"
#include "cpa/resources.hpp"
#include "cpa/trees.hpp"

namespace cpa {

enum class Stage { argid, syn, sem };

inline constexpr const char* kStageNames[] = {"argid", "syn", "sem"};

inline std::string_view to_string(Stage s) {
  return kStageNames[static_cast<int>(s)];
}

inline std::optional<Stage> stage_from(std::string_view s) {
  for (int i = 0; i < 3; ++i)
    if (s == kStageNames[i]) return static_cast<Stage>(i);
  return std::nullopt;
}

// Catalogue order follows the overview table in the docs; the list is fixed
// and the registry self-check counts on it.
enum class FeatureName {
  TokenLemma,
  TokenWord,
  TokenPos,
  LemmasAroundToken,
  WordsAroundToken,
  PosAroundToken,
  TokenIsVerb,
  TokenIsPrepositionOfVerb,
  TokenPhraseType,
  TokenPhraseStructure,
  TokenIsSubjOrObj,
  TokenIsVerbChild,
  TokenIsCapitalized,
  TokenContainsDigit,
  TokenIsUppercase,
  TokenRelFromVerb,
  TokenIsUniqueSubjOrObj,
  VerbLemma,
  VerbPos,
  LemmasAroundVerb,
  PosAroundVerb,
  VerbVoice,
  VerbPosition,
  IsVerbPrepositional,
  VerbBy,
  VerbPhraseStructure,
  VerbIsRoot,
  VerbHasNsubj,
  VerbHasNsubjpass,
  VerbHasDobj,
  VerbHasIobj,
  VerbHasCcomp,
  VerbHasAcomp,
  VerbHasXcomp,
  VerbParentLemma,
  VerbParentPos,
  VerbFirstVpParentLemma,
  RelVerbParentToVerb,
  TokenDirDpathFromVerb,
  TokenDirDpathFromVerbWithLemma,
  TokenDirDpathFromVerbWithPos,
  TokenUndDpathFromVerb,
  TokenUndDpathFromVerbWithLemma,
  TokenUndDpathFromVerbWithPos,
  DirDpathVerbVpParentToVerb,
  DirDpathVerbVpParentToVerbWithLemma,
  DirDpathVerbVpParentToVerbWithPos,
  TokenDirDpathFromVerbVpParent,
  TokenDirDpathFromVerbVpParentWithLemma,
  TokenDirDpathFromVerbVpParentWithPos,
  TokenParentDirDpathFromVerb,
  TokenParentDirDpathFromVerbWithLemma,
  TokenParentDirDpathFromVerbWithPos,
  TokenDirDpathFromVerbParent,
  TokenDirDpathFromVerbParentWithLemma,
  TokenDirDpathFromVerbParentWithPos,
  TokenCpathFromVerb,
  TokenCpathFromVerbParent,
  VerbHypernymsMcs,
  HypernymsMcs,
  TokenSimilarWords,
  VerbSimilarWords,
  TokenMostSimilarLabels,
  VerbPreps,
  VerbDistance,
  DepDepthDifference,
  ConDepthDifference,
  DepPathToVerbLength,
  ConPathToVerbLength,
};

inline constexpr int kFeatureCount = 69;

inline constexpr const char* kFeatureNames[kFeatureCount] = {
    "TokenLemma",
    "TokenWord",
    "TokenPos",
    "LemmasAroundToken",
    "WordsAroundToken",
    "PosAroundToken",
    "TokenIsVerb",
    "TokenIsPrepositionOfVerb",
    "TokenPhraseType",
    "TokenPhraseStructure",
    "TokenIsSubjOrObj",
    "TokenIsVerbChild",
    "TokenIsCapitalized",
    "TokenContainsDigit",
    "TokenIsUppercase",
    "TokenRelFromVerb",
    "TokenIsUniqueSubjOrObj",
    "VerbLemma",
    "VerbPos",
    "LemmasAroundVerb",
    "PosAroundVerb",
    "VerbVoice",
    "VerbPosition",
    "IsVerbPrepositional",
    "VerbBy",
    "VerbPhraseStructure",
    "VerbIsRoot",
    "VerbHasNsubj",
    "VerbHasNsubjpass",
    "VerbHasDobj",
    "VerbHasIobj",
    "VerbHasCcomp",
    "VerbHasAcomp",
    "VerbHasXcomp",
    "VerbParentLemma",
    "VerbParentPos",
    "VerbFirstVpParentLemma",
    "RelVerbParentToVerb",
    "TokenDirDpathFromVerb",
    "TokenDirDpathFromVerbWithLemma",
    "TokenDirDpathFromVerbWithPos",
    "TokenUndDpathFromVerb",
    "TokenUndDpathFromVerbWithLemma",
    "TokenUndDpathFromVerbWithPos",
    "DirDpathVerbVpParentToVerb",
    "DirDpathVerbVpParentToVerbWithLemma",
    "DirDpathVerbVpParentToVerbWithPos",
    "TokenDirDpathFromVerbVpParent",
    "TokenDirDpathFromVerbVpParentWithLemma",
    "TokenDirDpathFromVerbVpParentWithPos",
    "TokenParentDirDpathFromVerb",
    "TokenParentDirDpathFromVerbWithLemma",
    "TokenParentDirDpathFromVerbWithPos",
    "TokenDirDpathFromVerbParent",
    "TokenDirDpathFromVerbParentWithLemma",
    "TokenDirDpathFromVerbParentWithPos",
    "TokenCpathFromVerb",
    "TokenCpathFromVerbParent",
    "VerbHypernymsMcs",
    "HypernymsMcs",
    "TokenSimilarWords",
    "VerbSimilarWords",
    "TokenMostSimilarLabels",
    "VerbPreps",
    "VerbDistance",
    "DepDepthDifference",
    "ConDepthDifference",
    "DepPathToVerbLength",
    "ConPathToVerbLength",
};

inline std::string_view feature_name_string(FeatureName f) {
  return kFeatureNames[static_cast<int>(f)];
}

inline std::optional<FeatureName> feature_name_from(std::string_view s) {
  for (int i = 0; i < kFeatureCount; ++i)
    if (s == kFeatureNames[i]) return static_cast<FeatureName>(i);
  return std::nullopt;
}

inline std::span<const char* const> all_feature_names() {
  return {kFeatureNames, kFeatureCount};
}

using FeatureSet = std::set<FeatureName>;

inline FeatureSet all_features() {
  FeatureSet s;
  for (int i = 0; i < kFeatureCount; ++i) s.insert(static_cast<FeatureName>(i));
  return s;
}

// Rendered features of one token: indicators are full "name=value" strings,
// reals map a name to its value. Values are sanitized so no rendered entry
// contains whitespace.
struct FeatureVector {
  std::set<std::string> indicators;
  std::map<std::string, double> reals;

  static std::string sanitize(std::string_view s) {
    std::string out(s);
    for (char& c : out)
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') c = '_';
    return out;
  }

  void add(std::string_view name, std::string_view value) {
    indicators.insert(std::string(name) + "=" + sanitize(value));
  }

  void add_flag(std::string_view name, bool v) {
    add(name, v ? "true" : "false");
  }

  void add_real(std::string_view name, double v) {
    reals[sanitize(name)] = v;
  }

  bool operator==(const FeatureVector&) const = default;
};

// Per-stage feature subsets, as stored in a subsets file:
//   [argid] / [syn] / [sem] section headers, one catalogue name per line.
struct StageSubsets {
  FeatureSet argid, syn, sem;

  FeatureSet& for_stage(Stage s) {
    switch (s) {
      case Stage::argid: return argid;
      case Stage::syn: return syn;
      default: return sem;
    }
  }
  const FeatureSet& for_stage(Stage s) const {
    return const_cast<StageSubsets*>(this)->for_stage(s);
  }

  bool operator==(const StageSubsets&) const = default;
};

inline StageSubsets read_subsets_stream(std::istream& in) {
  StageSubsets out;
  FeatureSet* cur = nullptr;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line == "[argid]") {
      cur = &out.argid;
    } else if (line == "[syn]") {
      cur = &out.syn;
    } else if (line == "[sem]") {
      cur = &out.sem;
    } else if (line[0] == '[') {
      throw ParseError("unknown subsets section '" + line + "'", lineno);
    } else {
      if (!cur)
        throw ParseError("feature name before any [section] header", lineno);
      auto f = feature_name_from(line);
      if (!f) throw ParseError("unknown feature name '" + line + "'", lineno);
      cur->insert(*f);
    }
  }
  return out;
}

inline StageSubsets read_subsets(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open subsets file " + path.string());
  return read_subsets_stream(in);
}

inline void write_subsets(const StageSubsets& s, std::ostream& out) {
  auto section = [&](const char* name, const FeatureSet& set) {
    out << '[' << name << "]\n";
    for (FeatureName f : set) out << feature_name_string(f) << '\n';
  };
  section("argid", s.argid);
  out << '\n';
  section("syn", s.syn);
  out << '\n';
  section("sem", s.sem);
}

inline void write_subsets(const StageSubsets& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_subsets(s, out);
  if (!out) throw IoError("failed while writing " + path.string());
}

// Everything the extractors may need beyond the sentence itself. Each field
// is optional; asking for a feature whose resource is missing raises
// ResourceError. Call finalize() after filling the fields.
struct Resources {
  std::optional<EmbeddingStore> embeddings;
  std::optional<HypernymLexicon> hypernyms;
  std::optional<VerbPrepTable> verb_preps;
  std::optional<WordLists> word_lists;
  std::vector<std::string> semantic_classes;
  ClassVectors class_vectors;  // derived, built by finalize()

  void finalize() {
    class_vectors.entries.clear();
    if (embeddings && !semantic_classes.empty())
      class_vectors = build_class_vectors(*embeddings, semantic_classes);
  }
};

inline constexpr int kSimilarWordsTop = 50;
inline constexpr int kSimilarLabelsTop = 10;

namespace detail {

class Extractor {
 public:
  Extractor(int token, const Sentence& s, const Resources& r, FeatureVector& fv)
      : t_(token),
        s_(s),
        r_(r),
        fv_(fv),
        v_(s.verb_index()),
        dep_(s.collapsed),
        n_(static_cast<int>(s.tokens.size())) {
    if (token < 0 || token >= n_)
      throw InvariantError("feature extraction on token index out of range");
  }

  void extract(FeatureName f) {
    switch (f) {
      case FeatureName::TokenLemma:
        fv_.add("token_lemma", tok(t_).lemma);
        break;
      case FeatureName::TokenWord:
        fv_.add("token_word", tok(t_).word);
        break;
      case FeatureName::TokenPos:
        fv_.add("token_pos", tok(t_).pos);
        break;
      case FeatureName::LemmasAroundToken:
        around("lemmas_around_token", t_, &Token::lemma);
        break;
      case FeatureName::WordsAroundToken:
        around("words_around_token", t_, &Token::word);
        break;
      case FeatureName::PosAroundToken:
        around("pos_around_token", t_, &Token::pos);
        break;
      case FeatureName::TokenIsVerb:
        fv_.add_flag("token_is_verb", tok(t_).pos.starts_with('V'));
        break;
      case FeatureName::TokenIsPrepositionOfVerb: {
        // Basic tree on purpose: collapsed parses fold prep nodes away.
        bool hit = false;
        for (int c : s_.basic.children(v_))
          if (c == t_ && *s_.basic.relation(c) == "prep") hit = true;
        fv_.add_flag("token_is_preposition_of_verb", hit);
        break;
      }
      case FeatureName::TokenPhraseType:
        if (auto p = s_.constituents.phrase_type(t_))
          fv_.add("token_phrase_type", *p);
        break;
      case FeatureName::TokenPhraseStructure:
        // The rendered name keeps its historical spelling; subset files use
        // the catalogue name, so only model weight keys ever show it.
        if (auto p = s_.constituents.phrase_structure(t_))
          fv_.add("token_phrase_strcture", *p);
        break;
      case FeatureName::TokenIsSubjOrObj:
        fv_.add_flag("token_is_subj_or_obj", is_rel(t_, "nsubj") ||
                                                 is_rel(t_, "nsubjpass") ||
                                                 is_rel(t_, "dobj"));
        break;
      case FeatureName::TokenIsVerbChild:
        fv_.add_flag("token_is_verb_child",
                     dep_.has_node(t_) && dep_.parent(t_) == std::optional<int>(v_));
        break;
      case FeatureName::TokenIsCapitalized: {
        unsigned char c0 = static_cast<unsigned char>(tok(t_).word[0]);
        fv_.add_flag("token_is_capitalized", std::isupper(c0) != 0);
        break;
      }
      case FeatureName::TokenContainsDigit: {
        bool dig = false;
        for (unsigned char c : tok(t_).word)
          if (std::isdigit(c)) dig = true;
        fv_.add_flag("token_contains_digit", dig);
        break;
      }
      case FeatureName::TokenIsUppercase: {
        bool upper = false, lower = false;
        for (unsigned char c : tok(t_).word) {
          if (std::isupper(c)) upper = true;
          if (std::islower(c)) lower = true;
        }
        fv_.add_flag("token_is_uppercase", upper && !lower);
        break;
      }
      case FeatureName::TokenRelFromVerb:
        if (dep_.has_node(t_) && dep_.parent(t_) == std::optional<int>(v_))
          fv_.add("token_rel_from_verb", *dep_.relation(t_));
        break;
      case FeatureName::TokenIsUniqueSubjOrObj:
        for (const char* rel : {"nsubj", "nsubjpass", "dobj"})
          if (is_rel(t_, rel))
            fv_.add_flag(std::string("is_unique_") + rel,
                         dep_.relation_count(rel) == 1);
        break;
      case FeatureName::VerbLemma:
        fv_.add("verb_lemma", tok(v_).lemma);
        break;
      case FeatureName::VerbPos:
        fv_.add("verb_pos", tok(v_).pos);
        break;
      case FeatureName::LemmasAroundVerb:
        around("lemmas_around_verb", v_, &Token::lemma);
        break;
      case FeatureName::PosAroundVerb:
        around("pos_around_verb", v_, &Token::pos);
        break;
      case FeatureName::VerbVoice: {
        bool passive = false;
        for (const char* rel : {"nsubjpass", "csubjpass", "auxpass", "agent"})
          if (dep_.has_child_with_relation(v_, rel)) passive = true;
        fv_.add("verb_voice", passive ? "passive" : "active");
        break;
      }
      case FeatureName::VerbPosition:
        if (t_ != v_) fv_.add("verb_position", t_ < v_ ? "before" : "after");
        break;
      case FeatureName::IsVerbPrepositional:
        fv_.add_flag("is_verb_prepositional",
                     word_lists().prepositional_verbs.count(tok(v_).lemma) > 0);
        break;
      case FeatureName::VerbBy:
        fv_.add_flag("verb_by", dep_.has_child_with_relation(v_, "prep_by"));
        break;
      case FeatureName::VerbPhraseStructure:
        if (auto p = s_.constituents.phrase_structure(v_))
          fv_.add("verb_phrase_structure", *p);
        break;
      case FeatureName::VerbIsRoot:
        fv_.add_flag("verb_is_root", !dep_.parent(v_).has_value());
        break;
      case FeatureName::VerbHasNsubj:
        verb_has("nsubj");
        break;
      case FeatureName::VerbHasNsubjpass:
        verb_has("nsubjpass");
        break;
      case FeatureName::VerbHasDobj:
        verb_has("dobj");
        break;
      case FeatureName::VerbHasIobj:
        verb_has("iobj");
        break;
      case FeatureName::VerbHasCcomp:
        verb_has("ccomp");
        break;
      case FeatureName::VerbHasAcomp:
        verb_has("acomp");
        break;
      case FeatureName::VerbHasXcomp:
        verb_has("xcomp");
        break;
      case FeatureName::VerbParentLemma:
        if (auto p = dep_.parent(v_)) fv_.add("verb_parent_lemma", tok(*p).lemma);
        break;
      case FeatureName::VerbParentPos:
        if (auto p = dep_.parent(v_)) fv_.add("verb_parent_pos", tok(*p).pos);
        break;
      case FeatureName::VerbFirstVpParentLemma:
        if (auto a = first_verbal_ancestor(dep_, v_, s_.pos()))
          fv_.add("verb_first_vp_parent_lemma", tok(*a).lemma);
        break;
      case FeatureName::RelVerbParentToVerb:
        if (dep_.parent(v_)) fv_.add("rel_verb_parent_to_verb", *dep_.relation(v_));
        break;
      case FeatureName::TokenDirDpathFromVerb:
        dir_path("token_dir_dpath_from_verb", v_, t_, PathAnnotation::none);
        break;
      case FeatureName::TokenDirDpathFromVerbWithLemma:
        dir_path("token_dir_dpath_from_verb_with_lemma", v_, t_, PathAnnotation::lemma);
        break;
      case FeatureName::TokenDirDpathFromVerbWithPos:
        dir_path("token_dir_dpath_from_verb_with_pos", v_, t_, PathAnnotation::pos);
        break;
      case FeatureName::TokenUndDpathFromVerb:
        und_path("token_und_dpath_from_verb", PathAnnotation::none);
        break;
      case FeatureName::TokenUndDpathFromVerbWithLemma:
        und_path("token_und_dpath_from_verb_with_lemma", PathAnnotation::lemma);
        break;
      case FeatureName::TokenUndDpathFromVerbWithPos:
        und_path("token_und_dpath_from_verb_with_pos", PathAnnotation::pos);
        break;
      case FeatureName::DirDpathVerbVpParentToVerb:
        if (auto a = fva())
          dir_path("dir_dpath_verb_vp_parent_to_verb", *a, v_, PathAnnotation::none);
        break;
      case FeatureName::DirDpathVerbVpParentToVerbWithLemma:
        if (auto a = fva())
          dir_path("dir_dpath_verb_vp_parent_to_verb_with_lemma", *a, v_,
                   PathAnnotation::lemma);
        break;
      case FeatureName::DirDpathVerbVpParentToVerbWithPos:
        if (auto a = fva())
          dir_path("dir_dpath_verb_vp_parent_to_verb_with_pos", *a, v_,
                   PathAnnotation::pos);
        break;
      case FeatureName::TokenDirDpathFromVerbVpParent:
        if (auto a = fva())
          dir_path("token_dir_dpath_from_verb_vp_parent", *a, t_, PathAnnotation::none);
        break;
      case FeatureName::TokenDirDpathFromVerbVpParentWithLemma:
        if (auto a = fva())
          dir_path("token_dir_dpath_from_verb_vp_parent_with_lemma", *a, t_,
                   PathAnnotation::lemma);
        break;
      case FeatureName::TokenDirDpathFromVerbVpParentWithPos:
        if (auto a = fva())
          dir_path("token_dir_dpath_from_verb_vp_parent_with_pos", *a, t_,
                   PathAnnotation::pos);
        break;
      case FeatureName::TokenParentDirDpathFromVerb:
        if (auto p = dep_.parent(t_))
          dir_path("token_parent_dir_dpath_from_verb", v_, *p, PathAnnotation::none);
        break;
      case FeatureName::TokenParentDirDpathFromVerbWithLemma:
        if (auto p = dep_.parent(t_))
          dir_path("token_parent_dir_dpath_from_verb_with_lemma", v_, *p,
                   PathAnnotation::lemma);
        break;
      case FeatureName::TokenParentDirDpathFromVerbWithPos:
        if (auto p = dep_.parent(t_))
          dir_path("token_parent_dir_dpath_from_verb_with_pos", v_, *p,
                   PathAnnotation::pos);
        break;
      case FeatureName::TokenDirDpathFromVerbParent:
        if (auto p = dep_.parent(v_))
          dir_path("token_dir_dpath_from_verb_parent", *p, t_, PathAnnotation::none);
        break;
      case FeatureName::TokenDirDpathFromVerbParentWithLemma:
        if (auto p = dep_.parent(v_))
          dir_path("token_dir_dpath_from_verb_parent_with_lemma", *p, t_,
                   PathAnnotation::lemma);
        break;
      case FeatureName::TokenDirDpathFromVerbParentWithPos:
        if (auto p = dep_.parent(v_))
          dir_path("token_dir_dpath_from_verb_parent_with_pos", *p, t_,
                   PathAnnotation::pos);
        break;
      case FeatureName::TokenCpathFromVerb:
        fv_.add("token_cpath_from_verb", s_.constituents.path(v_, t_));
        break;
      case FeatureName::TokenCpathFromVerbParent:
        if (auto p = dep_.parent(v_))
          fv_.add("token_cpath_from_verb_parent", s_.constituents.path(*p, t_));
        break;
      case FeatureName::VerbHypernymsMcs:
        for (const std::string& h :
             hypernyms().chain(tok(v_).lemma, tok(v_).pos))
          fv_.add("verb_hypernyms_mcs", h);
        break;
      case FeatureName::HypernymsMcs:
        for (const std::string& h :
             hypernyms().chain(tok(t_).lemma, tok(t_).pos))
          fv_.add("hypernyms_mcs", h);
        break;
      case FeatureName::TokenSimilarWords:
        for (const auto& [w, cos] :
             embeddings().top_similar(tok(t_).lemma, kSimilarWordsTop))
          fv_.add("token_similar_words", w);
        break;
      case FeatureName::VerbSimilarWords:
        for (const auto& [w, cos] :
             embeddings().top_similar(tok(v_).lemma, kSimilarWordsTop))
          fv_.add("verb_similar_words", w);
        break;
      case FeatureName::TokenMostSimilarLabels: {
        if (r_.class_vectors.entries.empty())
          throw ResourceError(
              "TokenMostSimilarLabels needs embeddings and a class inventory");
        const std::vector<double>* vec = embeddings().vector_of(tok(t_).lemma);
        if (!vec) break;
        for (const std::string& c :
             rank_classes(*vec, r_.class_vectors, kSimilarLabelsTop))
          fv_.add("token_most_similar_labels", c);
        break;
      }
      case FeatureName::VerbPreps: {
        const VerbPrepTable& table = verb_preps();
        auto it = table.entries().find(tok(v_).lemma);
        if (it == table.entries().end()) break;
        for (const auto& [prep, p] : it->second)
          if (p != 0.0) fv_.add_real("verb_prep_" + prep, p);
        break;
      }
      case FeatureName::VerbDistance:
        fv_.add_real("verb_distance", std::abs(t_ - v_));
        break;
      case FeatureName::DepDepthDifference: {
        auto dt = dep_.depth(t_), dv = dep_.depth(v_);
        if (dt && dv) fv_.add_real("dep_depth_difference", *dt - *dv);
        break;
      }
      case FeatureName::ConDepthDifference:
        fv_.add_real("con_depth_difference",
                     s_.constituents.depth(t_) - s_.constituents.depth(v_));
        break;
      case FeatureName::DepPathToVerbLength:
        if (auto p = directed_dep_path(dep_, v_, t_))
          fv_.add_real("dep_path_to_verb_length", p->length());
        break;
      case FeatureName::ConPathToVerbLength:
        fv_.add_real("con_path_to_verb_length",
                     s_.constituents.path_length(v_, t_));
        break;
    }
  }

 private:
  const Token& tok(int i) const { return s_.tokens[static_cast<size_t>(i)]; }

  bool is_rel(int i, std::string_view rel) const {
    return dep_.has_node(i) && dep_.parent(i).has_value() &&
           *dep_.relation(i) == rel;
  }

  void verb_has(const char* rel) {
    fv_.add_flag(std::string("verb_has_") + rel,
                 dep_.has_child_with_relation(v_, rel));
  }

  void around(std::string_view name, int center, std::string Token::*field) {
    std::string prev = center > 0 ? tok(center - 1).*field : std::string("<s>");
    std::string next =
        center + 1 < n_ ? tok(center + 1).*field : std::string("</s>");
    fv_.add(std::string(name) + "_prev", prev);
    fv_.add(std::string(name) + "_next", next);
  }

  void dir_path(std::string_view name, int from, int to, PathAnnotation ann) {
    auto p = directed_dep_path(dep_, from, to);
    if (p) fv_.add(name, p->render(ann, s_.lemmas(), s_.pos()));
  }

  void und_path(std::string_view name, PathAnnotation ann) {
    if (!dep_.has_node(t_) || !dep_.has_node(v_)) return;
    DepPath p = undirected_dep_path(dep_, v_, t_);
    fv_.add(name, p.render(ann, s_.lemmas(), s_.pos()));
  }

  std::optional<int> fva() const {
    return first_verbal_ancestor(dep_, v_, s_.pos());
  }

  const WordLists& word_lists() const {
    if (!r_.word_lists)
      throw ResourceError("IsVerbPrepositional needs the word lists resource");
    return *r_.word_lists;
  }

  const HypernymLexicon& hypernyms() const {
    if (!r_.hypernyms)
      throw ResourceError("hypernym features need the hypernym lexicon");
    return *r_.hypernyms;
  }

  const EmbeddingStore& embeddings() const {
    if (!r_.embeddings)
      throw ResourceError("similarity features need the embeddings resource");
    return *r_.embeddings;
  }

  const VerbPrepTable& verb_preps() const {
    if (!r_.verb_preps)
      throw ResourceError("VerbPreps needs the verb+prep table resource");
    return *r_.verb_preps;
  }

  int t_;
  const Sentence& s_;
  const Resources& r_;
  FeatureVector& fv_;
  int v_;
  const DepTree& dep_;
  int n_;
};

}  // namespace detail

// Renders the requested subset of features for one token of a finalized
// sentence. Deterministic: equal inputs give equal vectors, and a larger
// subset only ever adds entries.
inline FeatureVector extract(int token, const Sentence& s, const Resources& r,
                             const FeatureSet& subset) {
  FeatureVector fv;
  detail::Extractor ex(token, s, r, fv);
  for (FeatureName f : subset) ex.extract(f);
  return fv;
}

}  // namespace cpa
