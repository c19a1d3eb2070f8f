#include <doctest.h>

#include <cmath>

#include "semboot/distributions.hpp"
#include "semboot/model.hpp"

using namespace semboot;

TEST_CASE("base scores") {
  CHECK(base_score(BaseKind::CategoryGeometric, "S") == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(base_score(BaseKind::CategoryGeometric, "S\\NP/NP") == doctest::Approx(0.729).epsilon(1e-12));
  CHECK(base_score(BaseKind::WordGeometric, "you") == doctest::Approx(0.373248).epsilon(1e-12));
  CHECK(count_category_atoms("S\\NP/NP") == 3);
  CHECK(count_word_letters("is it") == 4);
  CHECK(base_kind_name(parse_base_kind(base_kind_name(BaseKind::LfGeometric))) == "lf");
}

TEST_CASE("posterior follows the count-plus-base formula") {
  DirichletProcess dp(BaseKind::WordGeometric, 1.0);
  CHECK(dp.posterior_with_base("m", "w", 0.1) == doctest::Approx(0.1));
  dp.observe("m", "w", 3.0);
  dp.observe("m", "other", 1.0);
  CHECK(std::abs(dp.posterior_with_base("m", "w", 0.1) - 0.62) < 1e-12);
  CHECK(dp.total("m") == doctest::Approx(4.0));
}

TEST_CASE("observe adds fractional counts exactly") {
  DirichletProcess dp(BaseKind::CategoryGeometric, 1.0);
  dp.observe("S", "leaf", 1.0);
  CHECK(dp.count("S", "leaf") == 1.0);
  dp.observe("NP", "leaf", 0.386);
  CHECK(dp.count("NP", "leaf") == 0.386);
  dp.observe("N", "leaf", 0.3);
  dp.observe("N", "leaf", 0.2);
  CHECK(dp.count("N", "leaf") == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS(dp.observe("N", "leaf", -0.1));
  double sum = 0.0;
  for (const auto& [o, n] : dp.contexts().at("N").outcomes) sum += n;
  CHECK(std::abs(sum - dp.total("N")) < 1e-9);
}

TEST_CASE("marginal is the context-weighted average of posteriors") {
  DirichletProcess degenerate(BaseKind::WordGeometric, 1e-12);
  degenerate.observe("c", "o", 1.0);
  CHECK(degenerate.marginal("o") == doctest::Approx(1.0));

  DirichletProcess dp(BaseKind::WordGeometric, 1.0);
  dp.observe("c1", "ab", 1.0);
  dp.observe("c1", "zz", 2.0);
  dp.observe("c2", "ab", 1.0);
  const double expected = (3.0 * dp.posterior("c1", "ab") + 1.0 * dp.posterior("c2", "ab")) / 4.0;
  CHECK(std::abs(dp.marginal("ab") - expected) < 1e-12);

  DirichletProcess empty(BaseKind::WordGeometric, 1.0);
  CHECK_THROWS_AS(empty.marginal("x"), std::logic_error);
  DirichletProcess smooth(BaseKind::WordGeometric, 1.0);
  smooth.observe("c", "seen", 1.0);
  CHECK(smooth.marginal("unseen") > 0.0);
}

TEST_CASE("model serialization round-trips") {
  Model m;
  m.p_t.observe("S", "leaf", 0.25);
  m.p_w.observe("pro:per|you", "you", 1.0);
  m.seen_words.insert("you");
  m.examples_seen = 3;
  Model back = Model::from_json(m.to_json());
  CHECK(back.to_json() == m.to_json());
  CHECK(back.p_t.count("S", "leaf") == 0.25);
  CHECK(back.word_seen("you"));
  CHECK(back.p_w.alpha() == doctest::Approx(0.25));
  CHECK(back.p_t.alpha() == doctest::Approx(10.0));
}
