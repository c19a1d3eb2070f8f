#include <doctest.h>

#include <algorithm>

#include "semboot/grammar.hpp"

using namespace semboot;

namespace {

bool has_pair(const std::vector<ChildPair>& pairs, const char* left, const char* right, Rule rule) {
  const Category l = parse_category(left);
  const Category r = parse_category(right);
  return std::any_of(pairs.begin(), pairs.end(),
                     [&](const ChildPair& p) { return p.left == l && p.right == r && p.rule == rule; });
}

}  // namespace

TEST_CASE("parse_category is left-associative and renders canonically") {
  Category tv = parse_category("S\\NP/NP");
  REQUIRE(tv.is_fwd());
  CHECK(tv.argument() == Category::atom(Atom::NP));
  CHECK(tv.result() == Category::bwd(Category::atom(Atom::S), Category::atom(Atom::NP)));
  CHECK(tv == parse_category("(S\\NP)/NP"));
  CHECK(parse_category("NP").is_atom());

  Category wh = parse_category("Swhq/(Sq/NP)");
  CHECK(wh.order() == 2);
  CHECK(wh.argument().is_functor());
  CHECK(parse_category(wh.str()) == wh);
  CHECK_THROWS_AS(parse_category("S/"), CategoryError);
}

TEST_CASE("category bounds") {
  CHECK(parse_category("S\\NP/NP").depth() == 2);
  CHECK(parse_category("S\\NP/NP").atom_count() == 3);
  CHECK(parse_category("Swhq/(Sq/NP)").within_bounds());
  CHECK_FALSE(parse_category("S/(S/(S/NP))").within_bounds());
}

TEST_CASE("combine reproduces the textbook steps") {
  auto np = combine(parse_category("NP/N"), parse_lf("lam x.(det:art|a x)"), parse_category("N"), parse_lf("n|shoe"));
  REQUIRE(np.size() == 1);
  CHECK(np[0].category == parse_category("NP"));
  CHECK(np[0].lf == parse_lf("(det:art|a n|shoe)"));
  CHECK(np[0].rule == Rule::FwdApp);

  auto s = combine(parse_category("NP"), parse_lf("pro:per|you"), parse_category("S\\NP"),
                   parse_lf("lam y.(v|lost (det:art|a n|shoe) y)"));
  REQUIRE(s.size() == 1);
  CHECK(s[0].category == parse_category("S"));
  CHECK(s[0].rule == Rule::BwdApp);
  CHECK(lf_equivalent(s[0].lf, parse_lf("(v|lost (det:art|a n|shoe) pro:per|you)")));

  auto comp = combine(parse_category("Sq/VP"), parse_lf("lam p.(mod|do (p pro:per|you))"), parse_category("VP/NP"),
                      parse_lf("lam x.lam y.(v|lose x y)"));
  auto it = std::find_if(comp.begin(), comp.end(), [](const Combination& c) { return c.rule == Rule::FwdComp; });
  REQUIRE(it != comp.end());
  CHECK(it->category == parse_category("Sq/NP"));
  CHECK(lf_equivalent(it->lf, parse_lf("lam x.(mod|do (v|lose x pro:per|you))")));
}

TEST_CASE("type raising") {
  auto [cat, lf] = type_raise(parse_category("NP"), parse_lf("pro:per|you"), parse_category("S/(S\\NP)"));
  CHECK(cat == parse_category("S/(S\\NP)"));
  CHECK(lf == parse_lf("lam p.(p pro:per|you)"));
  auto mirrored = type_raise(parse_category("NP"), parse_lf("pro:per|you"), parse_category("S\\(S/NP)"));
  CHECK(mirrored.second == parse_lf("lam p.(p pro:per|you)"));
  CHECK_THROWS_AS(type_raise(parse_category("N"), parse_lf("n|shoe"), parse_category("S/(S\\NP)")), CategoryError);
  CHECK(is_raise_target(parse_category("Sq/(Sq\\NP)")));
  CHECK_FALSE(is_raise_target(parse_category("S/NP")));
}

TEST_CASE("semantic types of categories and congruence") {
  CHECK(sem_type_of_category(parse_category("S\\NP/NP")) == parse_sem_type("<e,<e,t>>"));
  CHECK(sem_type_of_category(parse_category("NP")) == SemType::e());
  CHECK(sem_type_of_category(parse_category("VP")) == parse_sem_type("<e,t>"));
  CHECK(congruent(parse_category("S\\NP/NP"), parse_lf("lam x.lam y.(v|lost x y)")));
  CHECK_FALSE(congruent(parse_category("NP"), parse_lf("lam x.lam y.(v|lost x y)")));
  CHECK(congruent(parse_category("Swhq/(Sq/NP)"), parse_lf("lam p.(p pro:int|WHAT)")));
}

TEST_CASE("enumerate_child_categories inverts the rules") {
  auto s = enumerate_child_categories(parse_category("S"));
  CHECK(has_pair(s, "NP", "S\\NP", Rule::BwdApp));
  CHECK(has_pair(s, "S/NP", "NP", Rule::FwdApp));
  auto sq = enumerate_child_categories(parse_category("Sq/NP"));
  CHECK(has_pair(sq, "Sq/VP", "VP/NP", Rule::FwdComp));
  auto n = enumerate_child_categories(parse_category("N"));
  CHECK(has_pair(n, "N/N", "N", Rule::FwdApp));
  CHECK(has_pair(n, "N", "N\\N", Rule::BwdApp));
  for (const auto& p : s) {
    auto back = combine_categories(p.left, p.right, p.rule);
    REQUIRE(back);
    CHECK(*back == parse_category("S"));
  }
}

TEST_CASE("rule labels round-trip") {
  for (Rule r : {Rule::FwdApp, Rule::BwdApp, Rule::FwdComp, Rule::Lex, Rule::TypeRaise}) {
    CHECK(parse_rule_label(rule_label(r)) == r);
  }
}
