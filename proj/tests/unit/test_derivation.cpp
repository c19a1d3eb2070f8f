#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "semboot/corpus.hpp"
#include "semboot/derivation.hpp"

using namespace semboot;

namespace {

Term lf(const char* text) { return normalize_lf(parse_lf(text)); }
Category cat(const char* text) { return parse_category(text); }

bool has_split(const std::vector<std::pair<Term, Term>>& splits, const char* f, const char* a) {
  const Term ft = parse_lf(f);
  const Term at = parse_lf(a);
  return std::any_of(splits.begin(), splits.end(),
                     [&](const auto& s) { return lf_equivalent(s.first, ft) && lf_equivalent(s.second, at); });
}

std::set<std::string> keys_of(const std::vector<DerivationTree>& trees) {
  std::set<std::string> out;
  for (const auto& t : trees) out.insert(tree_key(t));
  return out;
}

TrainConfig uncapped() {
  TrainConfig cfg;
  cfg.max_trees = 1000000;
  return cfg;
}

}  // namespace

TEST_CASE("inverse_apply finds the subject and object splits") {
  auto splits = inverse_apply(parse_lf("(v|lost (det:art|a n|shoe) pro:per|you)"));
  CHECK(has_split(splits, "lam y.(v|lost (det:art|a n|shoe) y)", "pro:per|you"));
  CHECK(has_split(splits, "lam x.(v|lost x pro:per|you)", "(det:art|a n|shoe)"));
  const Term parent = parse_lf("(v|lost (det:art|a n|shoe) pro:per|you)");
  for (const auto& [f, a] : splits) CHECK(lf_equivalent(beta_reduce(Term::app(f, a)), parent));
  CHECK(inverse_apply(parse_lf("pro:per|you")).empty());
}

TEST_CASE("inverse_compose recovers the composed pieces") {
  auto q = inverse_compose(parse_lf("lam x.(mod|do (v|lose x pro:per|you))"));
  CHECK(has_split(q, "lam p.(mod|do (p pro:per|you))", "lam x.lam y.(v|lose x y)"));
  for (const auto& [f, g] : q) {
    Term back = beta_reduce(Term::lam(Term::app(shift(f, 1), Term::app(shift(g, 1), Term::var(0)))));
    CHECK(lf_equivalent(back, parse_lf("lam x.(mod|do (v|lose x pro:per|you))")));
  }
  CHECK(inverse_compose(parse_lf("lam x.x")).empty());
}

TEST_CASE("single-token utterance has exactly one tree") {
  auto trees = enumerate_trees({"you"}, parse_lf("pro:per|you"));
  REQUIRE(trees.size() == 1);
  CHECK(trees[0]->is_leaf());
  CHECK(trees[0]->category == cat("NP"));
}

TEST_CASE("applicative and type-raised analyses of a transitive clause") {
  const Term root = parse_lf("(v|lost (det:art|a n|shoe) pro:per|you)");
  auto trees = enumerate_trees(tokenize("you lost a shoe"), root, uncapped());
  REQUIRE_FALSE(trees.empty());
  CHECK(static_cast<double>(trees.size()) == count_trees(tokenize("you lost a shoe"), root, uncapped()));
  const auto keys = keys_of(trees);
  CHECK(keys.size() == trees.size());

  auto you = make_leaf(cat("NP"), lf("pro:per|you"), 0, 1, "you");
  auto lost = make_leaf(cat("S\\NP/NP"), lf("lam x.lam y.(v|lost x y)"), 1, 2, "lost");
  auto a = make_leaf(cat("NP/N"), lf("lam x.(det:art|a x)"), 2, 3, "a");
  auto shoe = make_leaf(cat("N"), lf("n|shoe"), 3, 4, "shoe");
  auto np = make_binary(cat("NP"), lf("(det:art|a n|shoe)"), Rule::FwdApp, a, shoe);
  auto vp = make_binary(cat("S\\NP"), lf("lam y.(v|lost (det:art|a n|shoe) y)"), Rule::FwdApp, lost, np);
  auto applicative = make_binary(cat("S"), root, Rule::BwdApp, you, vp);
  CHECK(keys.count(tree_key(applicative)) == 1);

  auto raised = make_raise(cat("S/(S\\NP)"), you);
  auto snp = make_binary(cat("S/NP"), lf("lam x.(v|lost x pro:per|you)"), Rule::FwdComp, raised, lost);
  auto composed = make_binary(cat("S"), root, Rule::FwdApp, snp, np);
  CHECK(keys.count(tree_key(composed)) == 1);

  for (const auto& t : trees) {
    CHECK(lf_equivalent(recombine(t), root));
    int covered = 0;
    for (const auto* leaf : tree_leaves(t)) covered += leaf->end - leaf->begin;
    CHECK(covered == 4);
  }
}

TEST_CASE("object wh-question through forward composition") {
  const Term root = parse_lf("(mod|do (v|lose pro:int|WHAT pro:per|you))");
  CHECK(*root_category(root) == cat("Swhq"));
  auto trees = enumerate_trees(tokenize("what did you lose"), root, uncapped());
  const auto keys = keys_of(trees);

  auto what = make_leaf(cat("Swhq/(Sq/NP)"), lf("lam p.(p pro:int|WHAT)"), 0, 1, "what");
  auto did = make_leaf(cat("Sq/VP/NP"), lf("lam x.lam p.(mod|do (p x))"), 1, 2, "did");
  auto you = make_leaf(cat("NP"), lf("pro:per|you"), 2, 3, "you");
  auto lose = make_leaf(cat("VP/NP"), lf("lam x.lam y.(v|lose x y)"), 3, 4, "lose");
  auto did_you = make_binary(cat("Sq/VP"), lf("lam p.(mod|do (p pro:per|you))"), Rule::FwdApp, did, you);
  auto gap = make_binary(cat("Sq/NP"), lf("lam x.(mod|do (v|lose x pro:per|you))"), Rule::FwdComp, did_you, lose);
  auto full = make_binary(cat("Swhq"), root, Rule::FwdApp, what, gap);
  CHECK(keys.count(tree_key(full)) == 1);
  CHECK(lf_equivalent(recombine(full), root));
}

TEST_CASE("tree posterior normalizes joints") {
  auto p = tree_posterior(std::vector<double>{std::log(2.736e-20), std::log(7.079e-20 - 2.736e-20)});
  CHECK(p[0] == doctest::Approx(0.3865).epsilon(1e-3));
  CHECK(tree_posterior(std::vector<double>{-3.0}) == std::vector<double>{1.0});
  auto even = tree_posterior(std::vector<double>{-5.0, -5.0});
  CHECK(even[0] == doctest::Approx(0.5));
  CHECK(even[1] == doctest::Approx(0.5));
}

TEST_CASE("untrained joint of a single leaf is the product of base terms") {
  Model m;
  auto tree = make_leaf(cat("NP"), lf("pro:per|you"), 0, 1, "you");
  const double expected = 0.9 * 0.9 * base_score(BaseKind::LfGeometric, tree->shell_text) *
                          base_score(BaseKind::LfGeometric, "pro:per|you") * std::pow(0.72, 3);
  CHECK(std::exp(tree_log_joint(tree, m)) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("training step conserves mass") {
  Model m;
  Corpus c = generate_synthetic(SynthConfig{WordOrder::SVO, 20});
  for (std::size_t i = 0; i < c.size(); ++i) {
    std::vector<Term> cands{c.examples[i].lf};
    for (auto& d : distractors_for(c, i, 2)) cands.push_back(d);
    ExampleReport rep = train_example(m, c.examples[i].tokens, cands);
    REQUIRE_FALSE(rep.skipped);
    CHECK(std::abs(rep.posterior_sum - 1.0) < 1e-9);
    CHECK(std::abs(rep.pw_mass_added - rep.expected_pw_mass) < 1e-9);
    CHECK(rep.leaf_cover_error < 1e-9);
  }
}

TEST_CASE("one tree means every update has weight one") {
  Model m;
  ExampleReport rep = train_example(m, {"you"}, {parse_lf("pro:per|you")});
  CHECK(rep.tree_count == 1.0);
  CHECK(m.p_w.count("pro:per|you", "you") == doctest::Approx(1.0));
  CHECK(m.p_t.count("NP", kLeafOutcome) == doctest::Approx(1.0));
}

TEST_CASE("pruned and exact analyses agree on the MAP tree") {
  Model m;
  Corpus c = generate_synthetic(SynthConfig{WordOrder::SVO, 30});
  for (std::size_t i = 0; i < 25; ++i) train_example(m, c.examples[i].tokens, {c.examples[i].lf});
  TrainConfig exact;
  exact.prune_nats = kNoPruning;
  for (std::size_t i = 25; i < 30; ++i) {
    auto pruned = analyze_example(m, c.examples[i].tokens, {c.examples[i].lf});
    auto full = analyze_example(m, c.examples[i].tokens, {c.examples[i].lf}, exact);
    REQUIRE_FALSE(full.empty());
    CHECK(tree_key(pruned.map_tree) == tree_key(full.map_tree));
    CHECK(full.retained_trees == full.tree_count);
    CHECK(pruned.retained_trees <= full.tree_count);
    CHECK(pruned.map_log_joint == doctest::Approx(full.map_log_joint));
  }
}
