// Greedy forward feature selection. Candidates are drawn without replacement
// in an order fixed by the seed; a candidate joins the subset exactly when it
// strictly improves the best score seen so far. The best score starts at 0,
// so the first candidate whose subset scores above zero is always accepted;
// eval_initial instead starts from the score of the initial subset.
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cpa/corpus.hpp"
#include "cpa/error.hpp"
#include "cpa/eval.hpp"
#include "cpa/features.hpp"
#include "cpa/maxent.hpp"
#include "cpa/pipeline.hpp"
#include "cpa/resources.hpp"

namespace cpa {

struct SelectionStep {
  FeatureName feature = FeatureName::TokenLemma;
  double fscore = 0.0;
  bool accepted = false;
  bool operator==(const SelectionStep&) const = default;
};

struct SelectionOptions {
  std::uint64_t seed = 0;
  bool eval_initial = false;  // score the initial subset first and start there
  double initial_best = 0.0;  // starting best score (resume), unless eval_initial
  std::function<void(const SelectionStep&)> on_step;  // fired after every candidate
};

struct SelectionRun {
  Stage stage = Stage::argid;
  FeatureSet initial;
  std::vector<FeatureName> order;  // candidate order actually used
  std::vector<SelectionStep> trace;
  FeatureSet selected;
  double best_fscore = 0.0;
};

using SubsetEvaluator = std::function<double(const FeatureSet&)>;

namespace detail {

// Deterministic shuffle: mt19937_64 output is pinned by the standard, while
// std::shuffle's use of it is not, so the swap sequence is spelled out here.
inline std::vector<FeatureName> shuffled_pool(const FeatureSet& pool,
                                              std::uint64_t seed) {
  std::vector<FeatureName> v(pool.begin(), pool.end());
  std::mt19937_64 gen(seed);
  for (size_t i = v.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(gen() % i);
    std::swap(v[i - 1], v[j]);
  }
  return v;
}

}  // namespace detail

inline SelectionRun select_features(Stage stage, const FeatureSet& initial,
                                    const FeatureSet& pool,
                                    const SubsetEvaluator& evaluate,
                                    const SelectionOptions& opts = {}) {
  for (FeatureName f : pool)
    if (initial.count(f))
      throw InvariantError(std::string("candidate pool overlaps the initial subset at ") +
                           std::string(feature_name_string(f)));
  SelectionRun run;
  run.stage = stage;
  run.initial = initial;
  run.selected = initial;
  run.order = detail::shuffled_pool(pool, opts.seed);
  run.best_fscore = opts.eval_initial ? evaluate(initial) : opts.initial_best;

  for (FeatureName f : run.order) {
    FeatureSet candidate = run.selected;
    candidate.insert(f);
    SelectionStep step;
    step.feature = f;
    step.fscore = evaluate(candidate);
    step.accepted = step.fscore > run.best_fscore;
    if (step.accepted) {
      run.selected = std::move(candidate);
      run.best_fscore = step.fscore;
    }
    run.trace.push_back(step);
    if (opts.on_step) opts.on_step(step);
  }
  return run;
}

inline constexpr const char* kTraceHeader = "step\tfeature\tfscore\taccepted";

inline std::string trace_line(int step_no, const SelectionStep& s) {
  return std::to_string(step_no) + "\t" +
         std::string(feature_name_string(s.feature)) + "\t" +
         detail::fmt_double(s.fscore) + "\t" + (s.accepted ? "1" : "0");
}

inline void write_trace(const std::vector<SelectionStep>& steps,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write trace file " + path.string());
  out << kTraceHeader << '\n';
  for (size_t i = 0; i < steps.size(); ++i)
    out << trace_line(static_cast<int>(i) + 1, steps[i]) << '\n';
  if (!out) throw IoError("failed while writing " + path.string());
}

inline std::vector<SelectionStep> read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace file " + path.string());
  std::vector<SelectionStep> steps;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1) {
      if (line != kTraceHeader)
        throw ParseError("bad trace header", lineno);
      continue;
    }
    auto f = detail::split_tabs_copy(line);
    if (f.size() != 4) throw ParseError("trace row needs 4 columns", lineno);
    if (f[0] != std::to_string(steps.size() + 1))
      throw ParseError("trace steps out of order", lineno);
    SelectionStep s;
    auto name = feature_name_from(f[1]);
    if (!name) throw ParseError("unknown feature '" + f[1] + "' in trace", lineno);
    s.feature = *name;
    s.fscore = detail::parse_double(f[2], "trace");
    if (f[3] != "0" && f[3] != "1")
      throw ParseError("trace accepted flag must be 0 or 1", lineno);
    s.accepted = f[3] == "1";
    steps.push_back(s);
  }
  return steps;
}

// Dev-set evaluators for the three stages: argid scores the F1 of the
// argument class, syn and sem score accuracy over gold-tagged tokens. Each
// stage trains and scores on its own, mirroring the independent optimization
// of the pipeline steps.
inline SubsetEvaluator make_stage_evaluator(Stage stage, const Dataset& train,
                                            const Dataset& dev, const Resources& res,
                                            const TrainOptions& opts = {}) {
  return [stage, &train, &dev, &res, opts](const FeatureSet& subset) {
    MaxentModel model = train_maxent(build_stage_data(train, stage, subset, res), opts);
    if (stage == Stage::argid) {
      LayerStats stats;
      for (const Sentence& s : dev.sentences)
        for (const Token& t : s.tokens) {
          if (t.is_target_verb) continue;
          bool is_gold = t.gold_syn.has_value();
          bool is_pred =
              model.predict(extract(t.index, s, res, subset)) == kArgumentLabel;
          stats.reference += is_gold;
          stats.retrieved += is_pred;
          stats.correct += is_gold && is_pred;
        }
      return stats.f1();
    }
    long correct = 0, total = 0;
    for (const Sentence& s : dev.sentences)
      for (const Token& t : s.tokens) {
        if (!t.gold_syn) continue;
        ++total;
        std::string want = stage == Stage::syn ? std::string(to_string(*t.gold_syn))
                                               : *t.gold_sem;
        if (model.predict(extract(t.index, s, res, subset)) == want) ++correct;
      }
    return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
  };
}

}  // namespace cpa
