#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "semboot/evaluation.hpp"

using namespace semboot;
using semboot::testing::kTrained;
using semboot::testing::small_svo_model;
using semboot::testing::svo_corpus;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path temp_file(const char* name) { return std::filesystem::temp_directory_path() / name; }

}  // namespace

TEST_CASE("word-order shares are uniform before training and sum to one") {
  Model m;
  WordOrderReport r = word_order_priors(m);
  double sum = 0.0;
  for (double s : r.share) {
    CHECK(s == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    sum += s;
  }
  CHECK(std::abs(sum - 1.0) < 1e-9);
  CHECK(word_order_score(m, WordOrder::SVO) == doctest::Approx(word_order_score(m, WordOrder::OSV)));

  WordOrderReport trained = word_order_priors(small_svo_model());
  sum = 0.0;
  for (double s : trained.share) sum += s;
  CHECK(std::abs(sum - 1.0) < 1e-9);
  CHECK(trained.argmax() == WordOrder::SVO);
}

TEST_CASE("construction labels are a function of the gold LF") {
  auto labels = construction_labels(parse_lf("(neg|not (mod|can (v|see pro:per|it pro:per|you)))"));
  CHECK(labels == ConstructionLabels{"modal", "neg", "trans"});
  CHECK(construction_labels(parse_lf("(Q|Q (mod|will (v|see pro:int|WHAT pro:per|you)))")).count("whq") == 1);
  CHECK(construction_labels(parse_lf("(Q|Q (mod|will (v|see pro:int|WHAT pro:per|you)))")).count("polar_q") == 0);
  CHECK(construction_labels(parse_lf("(Q|Q (mod|will (v|run pro:per|you)))")).count("polar_q") == 1);
  CHECK(construction_labels(parse_lf("(v|run pro:per|you)")) == ConstructionLabels{"intrans"});
  CHECK(construction_labels(parse_lf("(v|give pro:per|it n:prop|adam pro:per|you)")).count("ditrans") == 1);
  CHECK(construction_labels(parse_lf("(v|run_prog pro:per|you)")).count("prog") == 1);
}

TEST_CASE("construction breakdown counts multi-label items under each label") {
  std::vector<ItemResult> items = {
      {0, true, false, true, {"modal", "trans"}},
      {1, false, false, true, {"trans"}},
      {2, true, true, true, {"modal"}},
  };
  auto seen = construction_breakdown(items, true);
  CHECK(seen["trans"].total == 2);
  CHECK(seen["trans"].correct == 1);
  CHECK(seen["modal"].total == 1);
  auto all = construction_breakdown(items, false);
  CHECK(all["modal"].total == 2);
  CHECK(all["modal"].correct == 2);
}

TEST_CASE("extracted lexicon") {
  auto lex = extract_lexicon(small_svo_model(), {"you", "mommy", "zzz"});
  REQUIRE(lex.count("you") == 1);
  CHECK(lf_equivalent(lex.at("you").lf, parse_lf("pro:per|you")));
  CHECK(lex.at("you").category == parse_category("NP"));
  CHECK(lex.count("zzz") == 0);

  GoldLexicon gold;
  gold["you"].push_back({parse_lf("pro:per|you"), parse_category("NP")});
  gold["zzz"].push_back({parse_lf("pro:per|it"), parse_category("NP")});
  Tally t = lexicon_accuracy(lex, gold);
  CHECK(t.total == 2);
  CHECK(t.correct == 1);
  CHECK(Tally{}.rate() == 0.0);
}

TEST_CASE("select accuracy on memorized training items is perfect") {
  const Corpus& c = svo_corpus();
  Tally t = select_accuracy(small_svo_model(), c, TestRange{kTrained - 10, kTrained}, 4);
  CHECK(t.total == 10);
  CHECK(t.correct == 10);
}

TEST_CASE("inferred-meaning accuracy handles unseen words") {
  Corpus c;
  c.examples.push_back(Example{0, {"blick", "wug"}, parse_lf("(v|run pro:per|you)"), "blick wug"});
  c.examples.push_back(Example{1, {"you", "run"}, parse_lf("(v|run pro:per|you)"), "you run"});
  c.split_point = 0;
  MeaningAccuracy strict = inferred_meaning_accuracy(small_svo_model(), c, TestRange{0, 1}, false);
  CHECK(strict.tally.total == 1);
  CHECK(strict.tally.correct == 0);
  MeaningAccuracy lenient = inferred_meaning_accuracy(small_svo_model(), c, TestRange{0, 1}, true);
  CHECK(lenient.tally.total == 0);
  REQUIRE(lenient.items.size() == 1);
  CHECK(lenient.items[0].has_unseen);
}

TEST_CASE("wh accuracies are rates and deterministic") {
  const Corpus& c = svo_corpus();
  TestRange r{400, 440};
  Tally a = wh_category_accuracy(small_svo_model(), c, r, true, default_wh_gold());
  Tally b = wh_category_accuracy(small_svo_model(), c, r, true, default_wh_gold());
  Tally n = wh_category_accuracy(small_svo_model(), c, r, false, default_wh_gold());
  CHECK(a.correct == b.correct);
  CHECK(a.total == b.total);
  CHECK(a.rate() >= 0.0);
  CHECK(a.rate() <= 1.0);
  CHECK(n.rate() >= 0.0);
  CHECK(n.rate() <= 1.0);
}

TEST_CASE("nonce probe is symmetric on an untrained model") {
  Model m;
  ProbeResult r = nonce_probe(m, dax_transitive_probe());
  CHECK(r.seen_words.empty());
  CHECK(std::abs(r.fraction - 0.5) < 0.05);

  Model seen;
  seen.seen_words.insert("daxed");
  CHECK(nonce_probe(seen, dax_transitive_probe()).seen_words == std::vector<std::string>{"daxed"});
  NonceProbe bad = dax_transitive_probe();
  bad.target_word = "blick";
  CHECK_THROWS(nonce_probe(m, bad));
}

TEST_CASE("curve files") {
  const auto path = temp_file("semboot_curves_test.csv");
  emit_curves({{100, "share_SVO", 0.5}, {0, "share_SVO", 0.25}}, path);
  CHECK(slurp(path) == "example_index,metric,value\n0,share_SVO,0.25\n100,share_SVO,0.5\n");
  emit_curves({{200, "share_SVO", 0.75}}, path, true);
  CHECK(slurp(path) == "example_index,metric,value\n0,share_SVO,0.25\n100,share_SVO,0.5\n200,share_SVO,0.75\n");
  const std::string first = slurp(path);
  emit_curves({{100, "share_SVO", 0.5}, {0, "share_SVO", 0.25}}, path);
  emit_curves({{200, "share_SVO", 0.75}}, path, true);
  CHECK(slurp(path) == first);
  std::filesystem::remove(path);
  CHECK_THROWS(emit_curves({}, "/nonexistent-dir/curves.csv"));
}

TEST_CASE("report layout") {
  CHECK(format_report({{"b", "2"}, {"a", "1"}}) == "a: 1\nb: 2\n");
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(1.0 / 3.0) == "0.3333333333");
}
