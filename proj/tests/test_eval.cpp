#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

using namespace cpa;
using Catch::Approx;

namespace {

// Three sentences, two verbs, every kind of mistake once: a wrong semantic
// label, a spurious token, a missed sentence, a wrong syntactic tag.
Dataset eval_corpus() {
  Dataset ds;
  ds.sentences.push_back(ts::make_sentence(
      "e-1", "act",
      "(ROOT (S (NP (NNP Alice)) (VP (VBZ acts) (NP (NNS banks)) (ADVP (RB today)))))",
      {{"Alice", "alice", "NNP", 1, "nsubj", 1, "nsubj", "subj", "Human"},
       {"acts", "act", "VBZ", -1, "root", -1, "root", "v", ""},
       {"banks", "bank", "NNS", 1, "dobj", 1, "dobj", "obj", "Institution"},
       {"today", "today", "RB", 1, "advmod", 1, "advmod", "", ""}}));
  ds.sentences.push_back(ts::make_sentence(
      "e-2", "act", "(ROOT (S (NP (NNP Bob)) (VP (VBZ acts))))",
      {{"Bob", "bob", "NNP", 1, "nsubj", 1, "nsubj", "subj", "Human"},
       {"acts", "act", "VBZ", -1, "root", -1, "root", "v", ""}}));
  ds.sentences.push_back(ts::make_sentence(
      "e-3", "move", "(ROOT (S (NP (NNS cars)) (VP (VBZ moves))))",
      {{"cars", "car", "NNS", 1, "dobj", 1, "dobj", "obj", "Action"},
       {"moves", "move", "VBZ", -1, "root", -1, "root", "v", ""}}));
  return ds;
}

Predictions eval_predictions() {
  Predictions pred;
  pred["e-1"].tags[0] = {SynTag::subj, "Human"};        // fully correct
  pred["e-1"].tags[2] = {SynTag::obj, "Human"};         // semantic label wrong
  pred["e-1"].tags[3] = {SynTag::advprep, "Action"};    // spurious token
  pred["e-3"].tags[0] = {SynTag::subj, "Action"};       // syntactic tag wrong
  return pred;                                          // e-2 missed entirely
}

}  // namespace

TEST_CASE("layer counts turn into precision, recall, f1", "[eval]") {
  LayerStats zero;
  CHECK(zero.precision() == 0.0);
  CHECK(zero.recall() == 0.0);
  CHECK(zero.f1() == 0.0);

  LayerStats s{2, 3, 4};
  CHECK(s.precision() == Approx(2.0 / 3.0));
  CHECK(s.recall() == Approx(0.5));
  CHECK(s.f1() == Approx(4.0 / 7.0));

  LayerStats t{1, 1, 0};
  CHECK(t.recall() == 0.0);
  CHECK(t.f1() == Approx(2.0 * 1.0 * 0.0 + 0.0).margin(1e-12));

  s += LayerStats{1, 2, 3};
  CHECK(s == LayerStats{3, 5, 7});
}

TEST_CASE("the avg layer mixes the other two", "[eval]") {
  VerbScores vs;
  vs.syn = {2, 3, 4};  // P 2/3, R 1/2
  vs.sem = {1, 2, 4};  // P 1/2, R 1/4
  Prf a = vs.avg();
  CHECK(a.precision == Approx(7.0 / 12.0));
  CHECK(a.recall == Approx(3.0 / 8.0));
  CHECK(a.f1 == Approx(21.0 / 46.0));  // harmonic mean of the averages

  VerbScores blank;
  CHECK(blank.avg().f1 == 0.0);
}

TEST_CASE("the AVERAGE row is the arithmetic column mean", "[eval]") {
  std::map<std::string, VerbScores> table;
  table["one"].syn = {2, 2, 2};  // perfect
  table["one"].sem = {0, 2, 2};  // nothing right
  table["two"].syn = {1, 2, 4};  // P 1/2, R 1/4, F 1/3
  table["two"].sem = {2, 2, 2};

  EvalReport r = aggregate(table);
  CHECK(r.syn_average.precision == Approx((1.0 + 0.5) / 2));
  CHECK(r.syn_average.recall == Approx((1.0 + 0.25) / 2));
  CHECK(r.syn_average.f1 == Approx((1.0 + 1.0 / 3.0) / 2));
  CHECK(r.sem_average.precision == Approx(0.5));
  CHECK(r.sem_average.f1 == Approx(0.5));

  double avg_f_one = table["one"].avg().f1;
  double avg_f_two = table["two"].avg().f1;
  CHECK(r.avg_average.f1 == Approx((avg_f_one + avg_f_two) / 2));
  CHECK(r.overall == r.avg_average.f1);

  EvalReport empty = aggregate({});
  CHECK(empty.verbs.empty());
  CHECK(empty.overall == 0.0);
  CHECK(empty.syn_average.precision == 0.0);
}

TEST_CASE("scoring tallies exact token and label matches per verb", "[eval]") {
  Dataset gold = eval_corpus();
  EvalReport r = score(gold, eval_predictions());

  REQUIRE(r.verbs.size() == 2);
  CHECK(r.verbs.at("act").syn == LayerStats{2, 3, 3});
  CHECK(r.verbs.at("act").sem == LayerStats{1, 3, 3});
  CHECK(r.verbs.at("move").syn == LayerStats{0, 1, 1});
  CHECK(r.verbs.at("move").sem == LayerStats{1, 1, 1});

  CHECK(r.verbs.at("act").avg().precision == Approx(0.5));
  CHECK(r.verbs.at("move").avg().f1 == Approx(0.5));
  CHECK(r.syn_average.precision == Approx(1.0 / 3.0));
  CHECK(r.sem_average.precision == Approx(2.0 / 3.0));
  CHECK(r.overall == Approx(0.5));

  // gold against itself is a perfect score
  EvalReport perfect = score(gold, gold_predictions(gold));
  CHECK(perfect.overall == 1.0);
  CHECK(perfect.verbs.at("act").syn == LayerStats{3, 3, 3});

  // empty predictions score zero but keep the reference counts
  EvalReport none = score(gold, {});
  CHECK(none.overall == 0.0);
  CHECK(none.verbs.at("act").syn == LayerStats{0, 0, 3});

  Predictions stray;
  stray["nope"].tags[0] = {SynTag::subj, "Human"};
  CHECK_THROWS_AS(score(gold, stray), InvariantError);
}

TEST_CASE("the verb row can be counted in", "[eval]") {
  ScoreOptions opts;
  opts.count_verb_row = true;
  EvalReport r = score(eval_corpus(), eval_predictions(), opts);
  CHECK(r.verbs.at("act").syn == LayerStats{4, 5, 5});
  CHECK(r.verbs.at("act").sem == LayerStats{3, 5, 5});
  CHECK(r.verbs.at("move").syn == LayerStats{1, 2, 2});
  CHECK(r.verbs.at("move").sem == LayerStats{2, 2, 2});
}

TEST_CASE("identification ignores the labels", "[eval]") {
  LayerStats id = identification_stats(eval_corpus(), eval_predictions());
  CHECK(id == LayerStats{3, 4, 4});
  CHECK(id.precision() == Approx(0.75));

  CHECK(identification_stats(eval_corpus(), {}) == LayerStats{0, 0, 4});
}

TEST_CASE("per-class breakdown covers both layers", "[eval]") {
  auto by_class = per_class_breakdown(eval_corpus(), eval_predictions());
  REQUIRE(by_class.size() == 6);
  CHECK(by_class.at("subj") == LayerStats{1, 2, 2});
  CHECK(by_class.at("obj") == LayerStats{1, 1, 2});
  CHECK(by_class.at("advprep") == LayerStats{0, 1, 0});
  CHECK(by_class.at("Human") == LayerStats{1, 2, 2});
  CHECK(by_class.at("Institution") == LayerStats{0, 0, 1});
  CHECK(by_class.at("Action") == LayerStats{1, 2, 1});
  CHECK_FALSE(by_class.contains("v"));
}

TEST_CASE("class frequencies count gold tags only", "[eval]") {
  auto freq = class_frequencies(eval_corpus());
  REQUIRE(freq.size() == 5);
  CHECK(freq.at("subj") == 2);
  CHECK(freq.at("obj") == 2);
  CHECK(freq.at("Human") == 2);
  CHECK(freq.at("Institution") == 1);
  CHECK(freq.at("Action") == 1);
}

TEST_CASE("reports render as a fixed-width table", "[eval]") {
  std::string text = render_report(score(eval_corpus(), eval_predictions()));
  std::string expected =
      "verb               synP   synR   synF   semP   semR   semF   avgP"
      "   avgR   avgF\n"
      "act               0.667  0.667  0.667  0.333  0.333  0.333  0.500"
      "  0.500  0.500\n"
      "move              0.000  0.000  0.000  1.000  1.000  1.000  0.500"
      "  0.500  0.500\n"
      "AVERAGE           0.333  0.333  0.333  0.667  0.667  0.667  0.500"
      "  0.500  0.500\n"
      "Score: 0.500\n";
  CHECK(text == expected);

  std::string header_only = render_report(aggregate({}));
  CHECK(header_only ==
        "verb               synP   synR   synF   semP   semR   semF   avgP"
        "   avgR   avgF\n");
}

TEST_CASE("plot data lists every class with gold support", "[eval]") {
  Dataset gold = eval_corpus();
  auto breakdown = per_class_breakdown(gold, eval_predictions());
  std::string text = render_plot_data(breakdown, class_frequencies(gold));
  CHECK(text ==
        "class\tfrequency\tf1\n"
        "Action\t1\t0.666667\n"
        "Human\t2\t0.500000\n"
        "Institution\t1\t0.000000\n"
        "obj\t2\t0.666667\n"
        "subj\t2\t0.500000\n");

  // frequencies default to zero when the training corpus never saw the class
  std::map<std::string, long> sparse = {{"Human", 9}};
  std::string with_gaps = render_plot_data(breakdown, sparse);
  CHECK(with_gaps.find("Action\t0\t0.666667\n") != std::string::npos);
  CHECK(with_gaps.find("Human\t9\t0.500000\n") != std::string::npos);
}
