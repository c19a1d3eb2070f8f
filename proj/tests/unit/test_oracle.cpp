#include <doctest.h>

#include <set>

#include "../oracle/brute_force.hpp"
#include "semboot/corpus.hpp"

using namespace semboot;

namespace {

std::set<std::string> keys_of(const std::vector<DerivationTree>& trees) {
  std::set<std::string> out;
  for (const auto& t : trees) out.insert(tree_key(t));
  return out;
}

void check_against_oracle(const std::vector<std::string>& tokens, const Term& lf) {
  TrainConfig cfg;
  cfg.max_trees = 10000000;
  cfg.max_split_fanout = 100000;
  auto engine = enumerate_trees(tokens, lf, cfg);
  oracle::BruteForce brute(tokens, oracle::Bounds{cfg.max_leaf_span, cfg.max_lambda_depth});
  auto reference = brute.enumerate(lf);
  const auto engine_keys = keys_of(engine);
  CHECK(engine_keys.size() == engine.size());
  CHECK(engine_keys == keys_of(reference));
}

}  // namespace

TEST_CASE("oracle splits recombine") {
  const Term parent = parse_lf("(mod|can (v|see pro:per|it pro:per|you))");
  for (const auto& s : oracle::application_splits(parent, SemType::t(), {})) {
    CHECK(lf_equivalent(combine_lfs(s.functor, s.argument, Rule::FwdApp), parent));
  }
  const Term fn = parse_lf("lam x.(mod|can (v|see x pro:per|you))");
  auto comps = oracle::composition_splits(fn, parse_sem_type("<e,t>"), {});
  CHECK_FALSE(comps.empty());
  for (const auto& s : comps) CHECK(lf_equivalent(combine_lfs(s.functor, s.argument, Rule::FwdComp), fn));
}

TEST_CASE("forest enumeration matches the brute-force reference on textbook items") {
  check_against_oracle({"you"}, parse_lf("pro:per|you"));
  check_against_oracle(tokenize("you run"), parse_lf("(v|run pro:per|you)"));
  check_against_oracle(tokenize("you lost a shoe"), parse_lf("(v|lost (det:art|a n|shoe) pro:per|you)"));
  check_against_oracle(tokenize("what did you lose"), parse_lf("(mod|do (v|lose pro:int|WHAT pro:per|you))"));
}
