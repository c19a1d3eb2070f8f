#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "semboot/inference.hpp"

using namespace semboot;
using semboot::testing::small_svo_model;
using semboot::testing::svo_corpus;

TEST_CASE("a trained word's top leaf candidate is its meaning") {
  auto cands = search_leaf_span("you", small_svo_model());
  REQUIRE_FALSE(cands.empty());
  CHECK(cands.front().category == parse_category("NP"));
  CHECK(cands.front().lf == parse_lf("pro:per|you"));
  for (std::size_t k = 1; k < cands.size(); ++k) CHECK(cands[k - 1].log_score >= cands[k].log_score);
}

TEST_CASE("an unseen word has no leaf candidates") {
  CHECK(search_leaf_span("dax", small_svo_model()).empty());
  CHECK_FALSE(parse_utterance({"dax", "blick"}, small_svo_model()));
}

TEST_CASE("parsing a seen transitive clause recovers its meaning") {
  auto r = parse_utterance(tokenize("you like a ball"), small_svo_model());
  REQUIRE(r);
  CHECK(lf_equivalent(r->lf, parse_lf("(v|like (det:art|a n|ball) pro:per|you)")));
  CHECK(lf_equivalent(recombine(r->tree), r->lf));
  CHECK(std::isfinite(r->log_score));
}

TEST_CASE("parser beam bounds do not change a confident parse") {
  Parser narrow(small_svo_model(), ParseConfig{3, 3, 4, 20.0});
  Parser wide(small_svo_model(), ParseConfig{20, 20, 4, 20.0});
  auto a = narrow.parse(tokenize("mommy like you"));
  auto b = wide.parse(tokenize("mommy like you"));
  REQUIRE(a);
  REQUIRE(b);
  CHECK(a->lf == b->lf);
}

TEST_CASE("score_pair prefers the gold order after training") {
  const Model& m = small_svo_model();
  const auto tokens = tokenize("mommy like you");
  const double gold = score_pair(tokens, parse_lf("(v|like pro:per|you n:prop|mommy)"), m);
  const double swapped = score_pair(tokens, parse_lf("(v|like n:prop|mommy pro:per|you)"), m);
  CHECK(gold > swapped);
  CHECK(score_pair(tokens, parse_lf("(v|like pro:per|you n:prop|mommy)"), m) == gold);
  CHECK(score_pair(tokens, parse_lf("lam x.(v|like x x)"), m) == 0.0);
}

TEST_CASE("untrained parser memorizes nothing") {
  Model untrained;
  CHECK_FALSE(parse_utterance(tokenize("you like a ball"), untrained));
  CHECK(svo_corpus().size() == 500);
}
