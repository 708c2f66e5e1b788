// The three-stage pipeline: argument identification (binary), syntactic
// classification over the six tags, semantic classification over the class
// inventory seen in training. Later stages only ever see tokens the argid
// stage accepted, so semantic tags are always paired with syntactic ones.
#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "cpa/corpus.hpp"
#include "cpa/error.hpp"
#include "cpa/features.hpp"
#include "cpa/maxent.hpp"

namespace cpa {

inline constexpr const char* kArgumentLabel = "argument";
inline constexpr const char* kNoneLabel = "none";

// Labeled examples for one stage. argid uses every non-verb token; syn and
// sem use only gold-tagged tokens. Sentences with no tagged tokens therefore
// contribute all-none argid examples and nothing to syn/sem.
inline std::vector<LabeledExample> build_stage_data(const Dataset& ds, Stage stage,
                                                    const FeatureSet& subset,
                                                    const Resources& res) {
  std::vector<LabeledExample> out;
  for (const Sentence& s : ds.sentences) {
    for (const Token& t : s.tokens) {
      if (t.is_target_verb) continue;
      if (stage == Stage::argid) {
        out.push_back({extract(t.index, s, res, subset),
                       t.gold_syn ? kArgumentLabel : kNoneLabel});
      } else if (t.gold_syn) {
        out.push_back({extract(t.index, s, res, subset),
                       stage == Stage::syn ? std::string(to_string(*t.gold_syn))
                                           : *t.gold_sem});
      }
    }
  }
  return out;
}

struct PipelineModel {
  MaxentModel argid;
  MaxentModel syn;
  MaxentModel sem;
  StageSubsets subsets;

  const MaxentModel& stage_model(Stage s) const {
    switch (s) {
      case Stage::argid: return argid;
      case Stage::syn: return syn;
      default: return sem;
    }
  }

  void save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    {
      std::ofstream mf(dir / "manifest");
      if (!mf) throw IoError("cannot write " + (dir / "manifest").string());
      mf << "cpa-pipeline 1\n";
    }
    argid.save(dir / "argid.model");
    syn.save(dir / "syn.model");
    sem.save(dir / "sem.model");
    write_subsets(subsets, dir / "subsets.conf");
  }

  static PipelineModel load(const std::filesystem::path& dir) {
    std::ifstream mf(dir / "manifest");
    std::string magic;
    if (!mf || !std::getline(mf, magic) || magic != "cpa-pipeline 1")
      throw ParseError("not a pipeline model directory: " + dir.string());
    PipelineModel m;
    m.argid = MaxentModel::load(dir / "argid.model");
    m.syn = MaxentModel::load(dir / "syn.model");
    m.sem = MaxentModel::load(dir / "sem.model");
    m.subsets = read_subsets(dir / "subsets.conf");
    for (const std::string& c : m.syn.classes)
      if (!syn_tag_from(c))
        throw ParseError("syntactic model predicts unknown tag '" + c + "'");
    return m;
  }
};

inline PipelineModel train_pipeline(const Dataset& train, const StageSubsets& subsets,
                                    const Resources& res,
                                    const TrainOptions& opts = {}) {
  PipelineModel m;
  m.subsets = subsets;
  m.argid = train_maxent(build_stage_data(train, Stage::argid, subsets.argid, res), opts);
  m.syn = train_maxent(build_stage_data(train, Stage::syn, subsets.syn, res), opts);
  m.sem = train_maxent(build_stage_data(train, Stage::sem, subsets.sem, res), opts);
  return m;
}

// Runs the pipeline over one sentence. Only tokens the argid model accepts
// reach the classifiers, and each accepted token always gets both tags.
inline SentencePrediction annotate(const PipelineModel& m, const Sentence& s,
                                   const Resources& res) {
  SentencePrediction pred;
  for (const Token& t : s.tokens) {
    if (t.is_target_verb) continue;
    FeatureVector argid_fv = extract(t.index, s, res, m.subsets.argid);
    if (m.argid.predict(argid_fv) != kArgumentLabel) continue;
    std::string syn_label =
        m.syn.predict(extract(t.index, s, res, m.subsets.syn));
    auto tag = syn_tag_from(syn_label);
    if (!tag)
      throw InvariantError("syntactic model produced unknown tag '" + syn_label + "'");
    std::string sem_label =
        m.sem.predict(extract(t.index, s, res, m.subsets.sem));
    pred.tags[t.index] = {*tag, sem_label};
  }
  return pred;
}

// Annotates every sentence. With jobs > 1 sentences are distributed over a
// small worker pool; results are merged in corpus order so the output does
// not depend on scheduling.
inline Predictions annotate_all(const PipelineModel& m, const Dataset& ds,
                                const Resources& res, int jobs = 1) {
  const size_t n = ds.sentences.size();
  std::vector<SentencePrediction> results(n);
  if (jobs <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i)
      results[i] = annotate(m, ds.sentences[i], res);
  } else {
    std::atomic<size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&]() {
      while (true) {
        size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          results[i] = annotate(m, ds.sentences[i], res);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mu);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    int n_workers = std::min<int>(jobs, static_cast<int>(n));
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }
  Predictions out;
  for (size_t i = 0; i < n; ++i) out[ds.sentences[i].id] = std::move(results[i]);
  return out;
}

}  // namespace cpa
