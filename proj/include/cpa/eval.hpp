// Scoring. Tags are counted per verb and per layer; a tag is correct only
// when it sits on the exact gold token and matches its label. Precision is
// correct/retrieved, recall is correct/reference, 0/0 counts as 0. Each
// verb's avg layer averages the syntactic and semantic P and R arithmetically
// and takes their harmonic mean as F. The overall score is the mean of the
// per-verb avg F values.
#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cpa/corpus.hpp"
#include "cpa/error.hpp"

namespace cpa {

struct LayerStats {
  long correct = 0;
  long retrieved = 0;
  long reference = 0;

  double precision() const {
    return retrieved == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(retrieved);
  }
  double recall() const {
    return reference == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(reference);
  }
  double f1() const {
    double p = precision(), r = recall();
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }

  LayerStats& operator+=(const LayerStats& o) {
    correct += o.correct;
    retrieved += o.retrieved;
    reference += o.reference;
    return *this;
  }
  bool operator==(const LayerStats&) const = default;
};

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct VerbScores {
  LayerStats syn;
  LayerStats sem;

  Prf avg() const {
    Prf a;
    a.precision = (syn.precision() + sem.precision()) / 2.0;
    a.recall = (syn.recall() + sem.recall()) / 2.0;
    a.f1 = a.precision + a.recall == 0.0
               ? 0.0
               : 2.0 * a.precision * a.recall / (a.precision + a.recall);
    return a;
  }
};

struct EvalReport {
  std::map<std::string, VerbScores> verbs;
  // The AVERAGE row: arithmetic column means of the per-verb table.
  Prf syn_average, sem_average, avg_average;
  // Mean of the per-verb avg F values; identical to avg_average.f1.
  double overall = 0.0;
};

// Derives the report from raw per-verb counts. Separated from score() so the
// aggregation arithmetic can be exercised on contrived counts directly.
inline EvalReport aggregate(const std::map<std::string, VerbScores>& per_verb) {
  EvalReport report;
  report.verbs = per_verb;
  if (per_verb.empty()) return report;
  const double n = static_cast<double>(per_verb.size());
  for (const auto& [verb, vs] : per_verb) {
    Prf a = vs.avg();
    report.syn_average.precision += vs.syn.precision();
    report.syn_average.recall += vs.syn.recall();
    report.syn_average.f1 += vs.syn.f1();
    report.sem_average.precision += vs.sem.precision();
    report.sem_average.recall += vs.sem.recall();
    report.sem_average.f1 += vs.sem.f1();
    report.avg_average.precision += a.precision;
    report.avg_average.recall += a.recall;
    report.avg_average.f1 += a.f1;
  }
  for (Prf* p : {&report.syn_average, &report.sem_average, &report.avg_average}) {
    p->precision /= n;
    p->recall /= n;
    p->f1 /= n;
  }
  report.overall = report.avg_average.f1;
  return report;
}

struct ScoreOptions {
  // Also count the mechanical verb row (v, _) in every layer, the way some
  // comparisons do. Off by default: the row is trivially correct and only
  // inflates scores.
  bool count_verb_row = false;
};

inline EvalReport score(const Dataset& gold, const Predictions& pred,
                        const ScoreOptions& opts = {}) {
  std::set<std::string> known;
  for (const Sentence& s : gold.sentences) known.insert(s.id);
  for (const auto& [id, p] : pred)
    if (!known.count(id))
      throw InvariantError("predictions mention unknown sentence '" + id + "'");

  std::map<std::string, VerbScores> per_verb;
  static const SentencePrediction kEmpty;
  for (const Sentence& s : gold.sentences) {
    auto it = pred.find(s.id);
    const SentencePrediction& p = it == pred.end() ? kEmpty : it->second;
    VerbScores& vs = per_verb[s.verb];

    for (const Token& t : s.tokens) {
      if (!t.gold_syn) continue;
      ++vs.syn.reference;
      ++vs.sem.reference;
      auto jt = p.tags.find(t.index);
      if (jt == p.tags.end()) continue;
      if (jt->second.syn == *t.gold_syn) ++vs.syn.correct;
      if (jt->second.sem == *t.gold_sem) ++vs.sem.correct;
    }
    vs.syn.retrieved += static_cast<long>(p.tags.size());
    vs.sem.retrieved += static_cast<long>(p.tags.size());
    if (opts.count_verb_row) {
      // The verb row is always present in gold and always emitted on output,
      // so it scores as one correct retrieval per layer.
      for (LayerStats* l : {&vs.syn, &vs.sem}) {
        ++l->reference;
        ++l->retrieved;
        ++l->correct;
      }
    }
  }
  return aggregate(per_verb);
}

// Argument identification alone: a predicted token counts when the gold
// sentence has any tag on that position, labels ignored.
inline LayerStats identification_stats(const Dataset& gold, const Predictions& pred) {
  LayerStats out;
  for (const Sentence& s : gold.sentences) {
    auto it = pred.find(s.id);
    for (const Token& t : s.tokens) {
      bool is_gold = t.gold_syn.has_value();
      bool is_pred = it != pred.end() && it->second.tags.count(t.index) > 0;
      out.reference += is_gold;
      out.retrieved += is_pred;
      out.correct += is_gold && is_pred;
    }
  }
  return out;
}

// Counts per class label, syntactic tag names and semantic class names in
// one map (the two name spaces do not overlap). Verb rows excluded.
inline std::map<std::string, LayerStats> per_class_breakdown(const Dataset& gold,
                                                             const Predictions& pred) {
  std::map<std::string, LayerStats> out;
  for (const Sentence& s : gold.sentences) {
    auto it = pred.find(s.id);
    static const SentencePrediction kEmpty;
    const SentencePrediction& p = it == pred.end() ? kEmpty : it->second;
    for (const Token& t : s.tokens) {
      if (t.gold_syn) {
        ++out[std::string(to_string(*t.gold_syn))].reference;
        ++out[*t.gold_sem].reference;
      }
      auto jt = p.tags.find(t.index);
      if (jt != p.tags.end()) {
        ++out[std::string(to_string(jt->second.syn))].retrieved;
        ++out[jt->second.sem].retrieved;
        if (t.gold_syn && *t.gold_syn == jt->second.syn)
          ++out[std::string(to_string(jt->second.syn))].correct;
        if (t.gold_syn && *t.gold_sem == jt->second.sem)
          ++out[jt->second.sem].correct;
      }
    }
  }
  return out;
}

// Occurrences of each gold class in a dataset (both layers, verb rows
// excluded); feeds the frequency column of the plot data.
inline std::map<std::string, long> class_frequencies(const Dataset& ds) {
  std::map<std::string, long> out;
  for (const Sentence& s : ds.sentences)
    for (const Token& t : s.tokens)
      if (t.gold_syn) {
        ++out[std::string(to_string(*t.gold_syn))];
        ++out[*t.gold_sem];
      }
  return out;
}

namespace detail {

inline std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%6.3f", v);
  return buf;
}

}  // namespace detail

// Per-verb text table, one row per verb plus the AVERAGE row and the final
// overall score line. All cells print with three decimals.
inline std::string render_report(const EvalReport& r) {
  std::string out;
  char head[160];
  std::snprintf(head, sizeof head, "%-16s %6s %6s %6s %6s %6s %6s %6s %6s %6s\n",
                "verb", "synP", "synR", "synF", "semP", "semR", "semF", "avgP",
                "avgR", "avgF");
  out += head;
  if (r.verbs.empty()) return out;
  auto row = [&](const std::string& name, const Prf& syn, const Prf& sem,
                 const Prf& avg) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%-16s", name.c_str());
    out += buf;
    for (const Prf* p : {&syn, &sem, &avg}) {
      out += ' ';
      out += detail::fmt3(p->precision);
      out += ' ';
      out += detail::fmt3(p->recall);
      out += ' ';
      out += detail::fmt3(p->f1);
    }
    out += '\n';
  };
  for (const auto& [verb, vs] : r.verbs)
    row(verb, {vs.syn.precision(), vs.syn.recall(), vs.syn.f1()},
        {vs.sem.precision(), vs.sem.recall(), vs.sem.f1()}, vs.avg());
  row("AVERAGE", r.syn_average, r.sem_average, r.avg_average);
  char score[48];
  std::snprintf(score, sizeof score, "Score: %.3f\n", r.overall);
  out += score;
  return out;
}

// TSV rows "class<TAB>frequency<TAB>f1" for every class with a nonzero
// reference count, the raw data behind the frequency/F-score plot.
inline std::string render_plot_data(const std::map<std::string, LayerStats>& breakdown,
                                    const std::map<std::string, long>& train_freq) {
  std::string out = "class\tfrequency\tf1\n";
  for (const auto& [cls, stats] : breakdown) {
    if (stats.reference == 0) continue;
    auto it = train_freq.find(cls);
    long freq = it == train_freq.end() ? 0 : it->second;
    char buf[48];
    std::snprintf(buf, sizeof buf, "%ld\t%.6f\n", freq, stats.f1());
    out += cls;
    out += '\t';
    out += buf;
  }
  return out;
}

}  // namespace cpa
