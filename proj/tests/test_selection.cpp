#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>

#include "support.hpp"

using namespace cpa;
using Catch::Approx;

namespace {

const FeatureSet kPool = {FeatureName::TokenLemma, FeatureName::TokenWord,
                          FeatureName::TokenPos, FeatureName::VerbLemma,
                          FeatureName::VerbPos};

}  // namespace

TEST_CASE("a monotone evaluator accepts every candidate", "[selection]") {
  auto evaluate = [](const FeatureSet& s) {
    return static_cast<double>(s.size()) / 100.0;
  };
  SelectionRun run = select_features(Stage::syn, {}, kPool, evaluate);
  CHECK(run.stage == Stage::syn);
  CHECK(run.order.size() == kPool.size());
  CHECK(run.trace.size() == kPool.size());
  for (const SelectionStep& s : run.trace) CHECK(s.accepted);
  CHECK(run.selected == kPool);
  CHECK(run.best_fscore == Approx(0.05));

  // the order is a permutation of the pool
  FeatureSet seen(run.order.begin(), run.order.end());
  CHECK(seen == kPool);
}

TEST_CASE("only the useful feature is kept", "[selection]") {
  auto evaluate = [](const FeatureSet& s) {
    return s.count(FeatureName::TokenLemma) ? 1.0 : 0.0;
  };
  SelectionRun run = select_features(Stage::argid, {}, kPool, evaluate);
  CHECK(run.selected == FeatureSet{FeatureName::TokenLemma});
  CHECK(run.best_fscore == 1.0);
  int accepted = 0;
  for (const SelectionStep& s : run.trace)
    if (s.accepted) {
      ++accepted;
      CHECK(s.feature == FeatureName::TokenLemma);
      CHECK(s.fscore == 1.0);
    }
  CHECK(accepted == 1);
}

TEST_CASE("acceptance requires strict improvement over the starting score", "[selection]") {
  auto half = [](const FeatureSet&) { return 0.5; };
  FeatureSet initial = {FeatureName::TokenWord};
  FeatureSet pool = {FeatureName::TokenLemma};

  // best starts at zero by default, so a flat 0.5 still gets in once
  SelectionRun fresh = select_features(Stage::sem, initial, pool, half);
  CHECK(fresh.trace.size() == 1);
  CHECK(fresh.trace[0].accepted);
  CHECK(fresh.selected == FeatureSet{FeatureName::TokenLemma, FeatureName::TokenWord});

  // scoring the initial subset first raises the bar
  SelectionOptions opts;
  opts.eval_initial = true;
  SelectionRun held = select_features(Stage::sem, initial, pool, half, opts);
  CHECK_FALSE(held.trace[0].accepted);
  CHECK(held.selected == initial);
  CHECK(held.best_fscore == 0.5);

  // so does an explicit resume score
  SelectionOptions resume;
  resume.initial_best = 0.6;
  SelectionRun carried = select_features(Stage::sem, initial, pool, half, resume);
  CHECK_FALSE(carried.trace[0].accepted);
  CHECK(carried.best_fscore == 0.6);

  // per-step callback sees every candidate in order
  std::vector<SelectionStep> observed;
  SelectionOptions watch;
  watch.on_step = [&](const SelectionStep& s) { observed.push_back(s); };
  SelectionRun watched = select_features(Stage::sem, {}, kPool, half, watch);
  CHECK(observed == watched.trace);
}

TEST_CASE("an empty pool changes nothing", "[selection]") {
  int calls = 0;
  auto evaluate = [&](const FeatureSet&) {
    ++calls;
    return 0.9;
  };
  FeatureSet initial = {FeatureName::TokenPos, FeatureName::VerbLemma};

  SelectionRun run = select_features(Stage::argid, initial, {}, evaluate);
  CHECK(run.selected == initial);
  CHECK(run.trace.empty());
  CHECK(run.best_fscore == 0.0);
  CHECK(calls == 0);

  SelectionOptions opts;
  opts.eval_initial = true;
  SelectionRun scored = select_features(Stage::argid, initial, {}, evaluate, opts);
  CHECK(scored.best_fscore == 0.9);
  CHECK(calls == 1);
}

TEST_CASE("the pool may not overlap the initial subset", "[selection]") {
  auto evaluate = [](const FeatureSet&) { return 0.0; };
  CHECK_THROWS_AS(select_features(Stage::syn, {FeatureName::TokenLemma},
                                  {FeatureName::TokenLemma}, evaluate),
                  InvariantError);
}

TEST_CASE("candidate order is a stable function of the seed", "[selection]") {
  FeatureSet pool;
  for (int i = 0; i < 12; ++i) pool.insert(static_cast<FeatureName>(i));
  auto a = detail::shuffled_pool(pool, 7);
  auto b = detail::shuffled_pool(pool, 7);
  CHECK(a == b);
  CHECK(detail::shuffled_pool(pool, 8) != a);
  CHECK(FeatureSet(a.begin(), a.end()) == pool);

  // identical runs are identical end to end
  auto evaluate = [](const FeatureSet& s) {
    return 1.0 / (1.0 + static_cast<double>(s.size()));
  };
  SelectionOptions opts;
  opts.seed = 31;
  SelectionRun r1 = select_features(Stage::sem, {}, pool, evaluate, opts);
  SelectionRun r2 = select_features(Stage::sem, {}, pool, evaluate, opts);
  CHECK(r1.order == r2.order);
  CHECK(r1.trace == r2.trace);
  CHECK(r1.selected == r2.selected);
}

TEST_CASE("trace files round trip", "[selection]") {
  std::vector<SelectionStep> steps = {
      {FeatureName::TokenLemma, 1.0 / 3.0, true},
      {FeatureName::VerbPreps, 0.0, false},
      {FeatureName::ConPathToVerbLength, 0.7182818284590452, true},
  };
  ts::TempDir dir;
  write_trace(steps, dir.file("trace.tsv"));
  CHECK(read_trace(dir.file("trace.tsv")) == steps);

  std::string text = ts::slurp(dir.file("trace.tsv"));
  CHECK(text.substr(0, text.find('\n')) == "step\tfeature\tfscore\taccepted");
  CHECK(text.find("1\tTokenLemma\t") != std::string::npos);
  CHECK(text.find("\t1\n") != std::string::npos);

  // CRLF is tolerated
  std::string crlf;
  for (char c : text) {
    if (c == '\n') crlf += '\r';
    crlf += c;
  }
  ts::spit(dir.file("crlf.tsv"), crlf);
  CHECK(read_trace(dir.file("crlf.tsv")) == steps);

  auto reject = [&](const std::string& body) {
    ts::spit(dir.file("bad.tsv"), body);
    return dir.file("bad.tsv");
  };
  CHECK_THROWS_AS(read_trace(reject("wrong\theader\n1\tTokenLemma\t0.5\t1\n")), ParseError);
  CHECK_THROWS_AS(read_trace(reject("step\tfeature\tfscore\taccepted\n2\tTokenLemma\t0.5\t1\n")),
                  ParseError);
  CHECK_THROWS_AS(read_trace(reject("step\tfeature\tfscore\taccepted\n1\tTokenLemma\t0.5\n")),
                  ParseError);
  CHECK_THROWS_AS(read_trace(reject("step\tfeature\tfscore\taccepted\n1\tNotAFeature\t0.5\t1\n")),
                  ParseError);
  CHECK_THROWS_AS(read_trace(reject("step\tfeature\tfscore\taccepted\n1\tTokenLemma\t0.5\t2\n")),
                  ParseError);
  CHECK_THROWS_AS(read_trace(dir.file("absent.tsv")), IoError);
}

TEST_CASE("stage evaluators score train/dev splits", "[selection]") {
  Dataset train = ts::demo_corpus(12, "tr");
  Dataset dev = ts::demo_corpus(6, "dv");
  Resources res;
  res.finalize();

  FeatureSet rel = {FeatureName::TokenRelFromVerb};
  CHECK(make_stage_evaluator(Stage::argid, train, dev, res)(rel) == 1.0);
  CHECK(make_stage_evaluator(Stage::syn, train, dev, res)(rel) == 1.0);
  CHECK(make_stage_evaluator(Stage::sem, train, dev, res)(rel) == 1.0);

  // a constant feature leaves only the class priors: argid always answers
  // "argument" (two of three non-verb tokens), syn and sem break their even
  // ties toward the lexicographically smaller class
  FeatureSet verb_only = {FeatureName::VerbLemma};
  CHECK(make_stage_evaluator(Stage::argid, train, dev, res)(verb_only) ==
        Approx(0.8));
  CHECK(make_stage_evaluator(Stage::syn, train, dev, res)(verb_only) ==
        Approx(0.5));
  CHECK(make_stage_evaluator(Stage::sem, train, dev, res)(verb_only) ==
        Approx(0.5));

  // an empty dev set scores zero everywhere
  Dataset empty;
  CHECK(make_stage_evaluator(Stage::argid, train, empty, res)(rel) == 0.0);
  CHECK(make_stage_evaluator(Stage::sem, train, empty, res)(rel) == 0.0);
}
