// Command line front end for the CPA parsing toolkit.
//
// Subcommands: validate, build-prep-table, train, select, predict, score,
// report. Exit codes: 0 success, 1 usage error, 2 data error, 3 internal.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "cpa/cpa.hpp"

namespace fs = std::filesystem;

namespace {

// Writes through a temp file and renames so readers never see a partial file.
void atomic_write(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw cpa::IoError("cannot write " + tmp.string());
    body(out);
    out.flush();
    if (!out) throw cpa::IoError("failed while writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

// Model directories hold several files; stage them in a sibling temp dir and
// move the pieces into place.
void save_model_atomic(const cpa::PipelineModel& m, const fs::path& dir) {
  fs::path tmp = dir;
  tmp += ".tmp";
  fs::remove_all(tmp);
  m.save(tmp);
  if (!fs::exists(dir)) {
    fs::rename(tmp, dir);
    return;
  }
  for (const auto& entry : fs::directory_iterator(tmp))
    fs::rename(entry.path(), dir / entry.path().filename());
  fs::remove_all(tmp);
}

struct ResourcePaths {
  std::string embeddings;
  std::string hypernyms;
  std::string prep_table;
  std::string advprep_words;
  std::string prep_verbs;
  std::string classes;
};

void add_resource_flags(CLI::App* cmd, ResourcePaths& rp) {
  cmd->add_option("--embeddings", rp.embeddings, "word2vec text format embeddings")
      ->check(CLI::ExistingFile);
  cmd->add_option("--hypernyms", rp.hypernyms, "hypernym chain lexicon (TSV)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--prep-table", rp.prep_table, "verb+preposition probability table (TSV)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--advprep-words", rp.advprep_words, "adverbial preposition word list")
      ->check(CLI::ExistingFile);
  cmd->add_option("--prep-verbs", rp.prep_verbs, "prepositional verb word list")
      ->check(CLI::ExistingFile);
  cmd->add_option("--classes", rp.classes, "semantic class inventory, one per line")
      ->check(CLI::ExistingFile);
}

cpa::Resources load_resources(const ResourcePaths& rp) {
  cpa::Resources res;
  if (!rp.embeddings.empty()) res.embeddings = cpa::EmbeddingStore::load(rp.embeddings);
  if (!rp.hypernyms.empty()) res.hypernyms = cpa::HypernymLexicon::load(rp.hypernyms);
  if (!rp.prep_table.empty()) res.verb_preps = cpa::VerbPrepTable::load(rp.prep_table);
  if (!rp.advprep_words.empty() || !rp.prep_verbs.empty()) {
    cpa::WordLists wl;
    if (!rp.advprep_words.empty()) wl.advprep_words = cpa::load_word_list(rp.advprep_words);
    if (!rp.prep_verbs.empty()) wl.prepositional_verbs = cpa::load_word_list(rp.prep_verbs);
    res.word_lists = std::move(wl);
  }
  if (!rp.classes.empty()) res.semantic_classes = cpa::load_class_inventory(rp.classes);
  res.finalize();
  return res;
}

struct MaxentFlags {
  double sigma = 1.0;
  int max_iter = 500;
  double tolerance = 1e-6;
};

void add_maxent_flags(CLI::App* cmd, MaxentFlags& mf) {
  cmd->add_option("--sigma", mf.sigma, "gaussian prior width, inf to disable")
      ->default_val(1.0);
  cmd->add_option("--max-iter", mf.max_iter, "optimizer iteration cap")->default_val(500);
  cmd->add_option("--tolerance", mf.tolerance, "gradient norm stopping tolerance")
      ->default_val(1e-6);
}

cpa::TrainOptions train_options(const MaxentFlags& mf) {
  cpa::TrainOptions opts;
  opts.sigma = mf.sigma;
  opts.max_iterations = mf.max_iter;
  opts.tolerance = mf.tolerance;
  return opts;
}

// Raw text corpus for preposition statistics: one word<TAB>lemma pair per
// line, blank line between sentences.
cpa::VerbPrepTable count_prep_corpus(const fs::path& path, std::set<std::string> preps,
                                     std::set<std::string> verbs) {
  std::ifstream in(path);
  if (!in) throw cpa::IoError("cannot open " + path.string());
  cpa::VerbPrepCounter counter(std::move(preps), std::move(verbs));
  std::vector<std::pair<std::string, std::string>> sent;
  auto flush = [&] {
    if (!sent.empty()) counter.add_sentence(sent);
    sent.clear();
  };
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    size_t tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
      throw cpa::ParseError("expected word<TAB>lemma", lineno);
    std::string word = line.substr(0, tab);
    std::string lemma = line.substr(tab + 1);
    if (word.empty() || lemma.empty())
      throw cpa::ParseError("empty word or lemma", lineno);
    sent.emplace_back(std::move(word), std::move(lemma));
  }
  flush();
  return counter.finish();
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  atomic_write(out_path, [&](std::ostream& o) { o << text; });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Corpus pattern analysis parsing toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read defaults from a key = value file");
  app.set_version_flag("--version", "cpa 1.0.0");

  // validate
  std::vector<std::string> val_inputs;
  auto* cmd_validate = app.add_subcommand("validate", "check corpus files for format errors");
  cmd_validate->add_option("input", val_inputs, "corpus files")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_validate->callback([&] {
    for (const std::string& p : val_inputs) {
      cpa::Dataset ds = cpa::read_corpus(p);
      std::cout << p << ": " << ds.sentences.size() << " sentences OK\n";
    }
  });

  // build-prep-table
  std::string bpt_corpus, bpt_preps, bpt_out, bpt_verbs;
  auto* cmd_bpt =
      app.add_subcommand("build-prep-table", "count verb+preposition adjacency probabilities");
  cmd_bpt->add_option("corpus", bpt_corpus, "raw corpus, word<TAB>lemma per line")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_bpt->add_option("preps", bpt_preps, "preposition word list")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_bpt->add_option("-o,--output", bpt_out, "output table path")->required();
  cmd_bpt->add_option("--verbs", bpt_verbs, "restrict counting to these lemmas")
      ->check(CLI::ExistingFile);
  cmd_bpt->callback([&] {
    std::set<std::string> verbs;
    if (!bpt_verbs.empty()) verbs = cpa::load_word_list(bpt_verbs);
    cpa::VerbPrepTable table =
        count_prep_corpus(bpt_corpus, cpa::load_word_list(bpt_preps), std::move(verbs));
    atomic_write(bpt_out, [&](std::ostream& o) { table.save(o); });
    size_t rows = 0;
    for (const auto& [verb, preps] : table.entries()) rows += preps.size();
    std::cout << "wrote " << rows << " rows to " << bpt_out << "\n";
  });

  // train
  std::string tr_train, tr_subsets, tr_model_dir;
  ResourcePaths tr_res;
  MaxentFlags tr_mx;
  auto* cmd_train = app.add_subcommand("train", "train the three stage classifiers");
  cmd_train->add_option("--train", tr_train, "training corpus")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_train->add_option("--subsets", tr_subsets, "feature subset file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_train->add_option("--model-dir", tr_model_dir, "output model directory")->required();
  add_resource_flags(cmd_train, tr_res);
  add_maxent_flags(cmd_train, tr_mx);
  cmd_train->callback([&] {
    cpa::Dataset train = cpa::read_corpus(tr_train);
    cpa::StageSubsets subsets = cpa::read_subsets(tr_subsets);
    cpa::Resources res = load_resources(tr_res);
    cpa::PipelineModel model = cpa::train_pipeline(train, subsets, res, train_options(tr_mx));
    save_model_atomic(model, tr_model_dir);
    for (cpa::Stage st : {cpa::Stage::argid, cpa::Stage::syn, cpa::Stage::sem}) {
      const cpa::MaxentModel& m = model.stage_model(st);
      size_t n_feat = m.weights.empty() ? 0 : m.weights.size();
      std::cout << cpa::to_string(st) << ": " << m.classes.size() << " classes, " << n_feat
                << " features, " << m.info.iterations << " iterations, "
                << (m.info.converged ? "converged" : "iteration cap hit") << "\n";
    }
    std::cout << "model written to " << tr_model_dir << "\n";
  });

  // select
  std::string sel_stage, sel_train, sel_dev, sel_subsets, sel_out, sel_trace;
  std::uint64_t sel_seed = 0;
  bool sel_eval_initial = false, sel_resume = false;
  ResourcePaths sel_res;
  MaxentFlags sel_mx;
  auto* cmd_select =
      app.add_subcommand("select", "greedy forward feature selection for one stage");
  cmd_select->add_option("--stage", sel_stage, "argid, syn or sem")->required();
  cmd_select->add_option("--train", sel_train, "training corpus")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_select->add_option("--dev", sel_dev, "development corpus")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_select->add_option("--subsets", sel_subsets, "subset file holding the initial subset")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_select->add_option("-o,--output", sel_out,
                         "updated subset file (default: overwrite --subsets)");
  cmd_select->add_option("--trace", sel_trace, "candidate trace TSV")->required();
  cmd_select->add_option("--seed", sel_seed, "candidate order shuffle seed")->default_val(0);
  cmd_select->add_flag("--eval-initial", sel_eval_initial,
                       "score the initial subset before trying candidates");
  cmd_select->add_flag("--resume", sel_resume, "continue from an existing trace");
  add_resource_flags(cmd_select, sel_res);
  add_maxent_flags(cmd_select, sel_mx);
  cmd_select->callback([&] {
    auto stage = cpa::stage_from(sel_stage);
    if (!stage) throw CLI::ValidationError("--stage", "unknown stage '" + sel_stage + "'");
    cpa::Dataset train = cpa::read_corpus(sel_train);
    cpa::Dataset dev = cpa::read_corpus(sel_dev);
    cpa::StageSubsets subsets = cpa::read_subsets(sel_subsets);
    cpa::Resources res = load_resources(sel_res);

    cpa::FeatureSet initial = subsets.for_stage(*stage);
    cpa::FeatureSet pool;
    for (cpa::FeatureName f : cpa::all_features())
      if (!initial.count(f)) pool.insert(f);

    cpa::SelectionOptions opts;
    opts.seed = sel_seed;
    opts.eval_initial = sel_eval_initial;
    int step_no = 0;

    if (sel_resume) {
      std::vector<cpa::SelectionStep> done = cpa::read_trace(sel_trace);
      for (const cpa::SelectionStep& s : done) {
        pool.erase(s.feature);
        if (s.accepted) {
          initial.insert(s.feature);
          opts.initial_best = s.fscore;
          opts.eval_initial = false;
        }
      }
      step_no = static_cast<int>(done.size());
    }

    std::ofstream trace(sel_trace, sel_resume ? std::ios::app : std::ios::out);
    if (!trace) throw cpa::IoError("cannot write " + sel_trace);
    if (!sel_resume) trace << cpa::kTraceHeader << "\n";
    opts.on_step = [&](const cpa::SelectionStep& s) {
      trace << cpa::trace_line(++step_no, s) << '\n';
      trace.flush();
      std::cout << "step " << step_no << ": " << cpa::feature_name_string(s.feature) << " "
                << s.fscore << (s.accepted ? " accepted" : "") << "\n";
    };

    cpa::SelectionRun run = cpa::select_features(
        *stage, initial, pool,
        cpa::make_stage_evaluator(*stage, train, dev, res, train_options(sel_mx)), opts);

    subsets.for_stage(*stage) = run.selected;
    std::string dest = sel_out.empty() ? sel_subsets : sel_out;
    atomic_write(dest, [&](std::ostream& o) { cpa::write_subsets(subsets, o); });
    std::cout << "selected " << run.selected.size() << " features, best f-score "
              << run.best_fscore << ", subsets written to " << dest << "\n";
  });

  // predict
  std::string pr_model_dir, pr_input, pr_out;
  int pr_jobs = 1;
  ResourcePaths pr_res;
  auto* cmd_predict = app.add_subcommand("predict", "annotate a corpus with a trained model");
  cmd_predict->add_option("--model-dir", pr_model_dir, "model directory from train")
      ->required()
      ->check(CLI::ExistingDirectory);
  cmd_predict->add_option("--input", pr_input, "corpus to annotate")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_predict->add_option("-o,--output", pr_out, "output corpus (default: stdout)");
  cmd_predict->add_option("--jobs", pr_jobs, "worker threads")
      ->default_val(1)
      ->check(CLI::PositiveNumber);
  add_resource_flags(cmd_predict, pr_res);
  cmd_predict->callback([&] {
    cpa::PipelineModel model = cpa::PipelineModel::load(pr_model_dir);
    cpa::Dataset ds = cpa::read_corpus(pr_input);
    cpa::Resources res = load_resources(pr_res);
    cpa::Predictions pred = cpa::annotate_all(model, ds, res, pr_jobs);
    if (pr_out.empty()) {
      cpa::write_predictions(ds, pred, std::cout);
    } else {
      atomic_write(pr_out, [&](std::ostream& o) { cpa::write_predictions(ds, pred, o); });
      std::cout << "predictions written to " << pr_out << "\n";
    }
  });

  // score
  std::string sc_gold, sc_pred;
  bool sc_verb_row = false;
  auto* cmd_score = app.add_subcommand("score", "score predictions against gold");
  cmd_score->add_option("gold", sc_gold, "gold corpus")->required()->check(CLI::ExistingFile);
  cmd_score->add_option("pred", sc_pred, "predicted corpus")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_score->add_flag("--count-verb-row", sc_verb_row,
                      "count the target verb row in every layer");
  cmd_score->callback([&] {
    cpa::Dataset gold = cpa::read_corpus(sc_gold);
    cpa::Dataset pred = cpa::read_corpus(sc_pred);
    cpa::ScoreOptions opts;
    opts.count_verb_row = sc_verb_row;
    cpa::EvalReport report = cpa::score(gold, cpa::gold_predictions(pred), opts);
    std::cout << cpa::render_report(report);
  });

  // report
  std::string rp_gold, rp_pred, rp_train, rp_plot, rp_out;
  auto* cmd_report = app.add_subcommand("report", "scoring report plus per-class plot data");
  cmd_report->add_option("--gold", rp_gold, "gold corpus")->required()->check(CLI::ExistingFile);
  cmd_report->add_option("--pred", rp_pred, "predicted corpus")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_report->add_option("--train", rp_train, "training corpus for class frequencies")
      ->check(CLI::ExistingFile);
  cmd_report->add_option("--plot-data", rp_plot, "write class/frequency/f1 TSV here");
  cmd_report->add_option("-o,--output", rp_out, "report text output (default: stdout)");
  cmd_report->callback([&] {
    cpa::Dataset gold = cpa::read_corpus(rp_gold);
    cpa::Dataset pred = cpa::read_corpus(rp_pred);
    cpa::Predictions preds = cpa::gold_predictions(pred);
    cpa::EvalReport report = cpa::score(gold, preds);
    cpa::LayerStats ident = cpa::identification_stats(gold, preds);
    char buf[96];
    std::snprintf(buf, sizeof buf, "argument identification: P %.3f R %.3f F1 %.3f\n",
                  ident.precision(), ident.recall(), ident.f1());
    emit(cpa::render_report(report) + "\n" + buf, rp_out);
    if (!rp_plot.empty()) {
      auto breakdown = cpa::per_class_breakdown(gold, preds);
      auto freq = cpa::class_frequencies(rp_train.empty() ? gold : cpa::read_corpus(rp_train));
      atomic_write(rp_plot,
                   [&](std::ostream& o) { o << cpa::render_plot_data(breakdown, freq); });
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const cpa::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
