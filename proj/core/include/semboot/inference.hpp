#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "semboot/derivation.hpp"
#include "semboot/grammar.hpp"
#include "semboot/logical_form.hpp"
#include "semboot/model.hpp"

namespace semboot {

struct LeafCandidate {
  int begin = 0;
  int end = 0;
  Category category;
  Term lf;
  // Ranking score: leaf factor times the category prior.
  double log_score = 0.0;
  // p_t(leaf|c) p_h(shell|c) p_l(lf|shell) p_w(words|lf), used inside the chart.
  double log_leaf = 0.0;
};

struct ParseConfig {
  std::size_t beam = 10;
  std::size_t leaf_beam = 10;
  int max_leaf_span = 4;
  double floor_nats = 20.0;
};

struct ParseResult {
  DerivationTree tree;
  Term lf;
  double log_score = 0.0;
};

// Read-only parser over a frozen model. Marginals and per-LF lookups are
// cached, so reuse one instance for many utterances.
class Parser {
 public:
  explicit Parser(const Model& model, ParseConfig cfg = {});

  const ParseConfig& config() const { return cfg_; }

  // Ranked (category, LF) candidates for one span of text.
  std::vector<LeafCandidate> search_leaf_span(const std::string& span_text);
  std::optional<ParseResult> parse(const std::vector<std::string>& tokens);

  // Marginal over shells of p_l(lf | shell).
  double lf_marginal(const std::string& lf_text);
  // Share of shell observations made under category `cat`.
  double category_marginal(const std::string& cat) const;

 private:
  struct LfInfo {
    Term lf;
    std::string shell;
    std::vector<std::size_t> categories;  // indices into categories_
    double marginal = 0.0;
  };
  const LfInfo* lf_info(const std::string& lf_text);

  const Model& model_;
  ParseConfig cfg_;
  std::vector<Category> categories_;
  std::vector<SemType> category_types_;
  std::vector<double> category_prior_;
  double shell_norm_ = 0.0;   // sum over shells of n(sh) / (n(sh) + alpha)
  double shell_total_ = 0.0;  // sum over shells of n(sh)
  std::unordered_map<std::string, std::optional<LfInfo>> lf_cache_;
  std::unordered_map<std::string, std::vector<LeafCandidate>> span_cache_;
};

std::vector<LeafCandidate> search_leaf_span(const std::string& span_text, const Model& model);

std::optional<ParseResult> parse_utterance(const std::vector<std::string>& tokens, const Model& model,
                                           std::size_t beam_k = 10, int max_leaf_span = 4);

// Sum over the derivation set of exp(tree log joint); 0 when it is empty.
double score_pair(const std::vector<std::string>& tokens, const Term& lf, const Model& model,
                  const TrainConfig& cfg = {});
double log_score_pair(const std::vector<std::string>& tokens, const Term& lf, const Model& model,
                      const TrainConfig& cfg = {});

}  // namespace semboot
