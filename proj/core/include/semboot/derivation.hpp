#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "semboot/grammar.hpp"
#include "semboot/logical_form.hpp"
#include "semboot/model.hpp"

namespace semboot {

struct TrainConfig {
  int max_leaf_span = 4;
  std::size_t max_trees = 512;
  std::size_t max_split_fanout = 32;
  int max_lambda_depth = 4;
  // Training keeps only forest alternatives whose best tree lies within this
  // many nats of the MAP tree; infinity keeps every tree.
  double prune_nats = 12.0;
};

inline constexpr double kNoPruning = std::numeric_limits<double>::infinity();

struct DerivationNode {
  Category category;
  Term lf;
  Rule rule = Rule::Lex;
  int begin = 0;
  int end = 0;
  std::shared_ptr<const DerivationNode> left;   // also the child of a raise
  std::shared_ptr<const DerivationNode> right;
  // Model keys; leaves render their LF eta-expanded to the category's type.
  std::string lf_text;
  std::string shell_text;  // leaves only
  std::string words;       // leaves only

  bool is_leaf() const { return rule == Rule::Lex; }
};

using DerivationTree = std::shared_ptr<const DerivationNode>;

DerivationTree make_leaf(const Category& cat, const Term& lf, int begin, int end, std::string words);
DerivationTree make_raise(const Category& target, const DerivationTree& child);
DerivationTree make_binary(const Category& cat, const Term& lf, Rule rule, const DerivationTree& left,
                           const DerivationTree& right);

std::vector<const DerivationNode*> tree_leaves(const DerivationTree& t);
// Rebuilds the root LF bottom-up from the leaves and rule labels.
Term recombine(const DerivationTree& t);
// Bracketed rendering, e.g. "(S < (NP lex 'you' : pro:per|you) ...)".
std::string tree_to_string(const DerivationTree& t);
// Order-independent structural key used for set comparisons.
std::string tree_key(const DerivationTree& t);

// Category of a corpus-root LF: Swhq, Sq or S for type t, NP for type e.
std::optional<Category> root_category(const Term& lf);
// The atom used for every t-typed constituent under a given root.
Atom clause_atom(const Category& root);
// Categories congruent with `type` whose clausal atoms are all `clause`.
const std::vector<Category>& argument_categories(const SemType& type, Atom clause);

// (f, a) with beta_reduce(f a) == parent.
std::vector<std::pair<Term, Term>> inverse_apply(const Term& parent, std::size_t max_fanout = 32);
// (f, g) with beta_reduce(lam z. f (g z)) == parent.
std::vector<std::pair<Term, Term>> inverse_compose(const Term& parent, std::size_t max_fanout = 32);

std::vector<DerivationTree> enumerate_trees(const std::vector<std::string>& tokens, const Term& root_lf,
                                            const TrainConfig& cfg = {});
// Number of trees in the full forest before the max_trees cap.
double count_trees(const std::vector<std::string>& tokens, const Term& root_lf, const TrainConfig& cfg = {});

std::string split_outcome(const Category& left, const Category& right, Rule rule);
std::string raise_outcome(const Category& child);
inline constexpr const char* kLeafOutcome = "leaf";

double tree_log_joint(const DerivationTree& t, const Model& model);
// Softmax of log joints.
std::vector<double> tree_posterior(const std::vector<double>& log_joints);
std::vector<double> tree_posterior(const std::vector<DerivationTree>& trees, const Model& model);

// Packed forest of all derivations for one utterance, shared across candidate
// root LFs. Nodes are (category, LF, span, clause atom) items; children always
// have smaller ids than their parents.
class ParseForest {
 public:
  struct Alt {
    Rule rule = Rule::Lex;
    int left = -1;
    int right = -1;
  };
  struct Node {
    Category cat;
    Term lf;
    int i = 0;
    int j = 0;
    std::vector<Alt> alts;
    double count = 0.0;  // trees rooted here
    int cat_id = -1;     // interned category, shared by nodes with equal categories
    int lf_id = -1;      // interned LF
  };

  ParseForest(std::vector<std::string> tokens, TrainConfig cfg);
  ~ParseForest();
  ParseForest(const ParseForest&) = delete;
  ParseForest& operator=(const ParseForest&) = delete;

  // Builds derivations of `lf` over the whole utterance under its root
  // category. Returns the root node id, or -1 if none exist.
  int add_root(const Term& lf);

  std::size_t size() const;
  const Node& node(int id) const;
  const std::vector<std::string>& tokens() const;
  std::string span_words(int i, int j) const;
  // Model keys for a node used as a leaf: its LF eta-expanded to the
  // category's semantic type. Nodes with equal keys share a leaf key id.
  int leaf_key(int id);
  std::size_t leaf_key_count() const;
  const std::string& lf_text(int id);
  const std::string& shell_text(int id);
  const std::string& span_text(int i, int j) const;
  std::size_t category_count() const;
  std::size_t lf_count() const;

  // Up to cfg.max_trees trees, in alternative order.
  std::vector<DerivationTree> unpack(int id);
  DerivationTree make_tree(int id, const std::vector<int>& choice) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct CandidateMass {
  Term lf;
  int root = -1;
  double trees = 0.0;
  double mass = 0.0;
};

// Inside/outside quantities for the union of candidate LFs under a model.
struct ForestAnalysis {
  std::unique_ptr<ParseForest> forest;
  std::vector<CandidateMass> candidates;
  std::vector<double> local_leaf;       // per node: log leaf factor (-inf if no leaf alt)
  std::vector<std::vector<double>> local;  // per node, per alt: log local factor
  std::vector<double> inside;           // per node
  std::vector<double> outside;          // per node
  std::vector<std::vector<double>> alt_posterior;  // per node, per alt
  std::vector<double> log_root;         // per candidate: log p_r + inside (or -inf)
  double log_z = 0.0;                   // log sum over every retained tree of every candidate
  double tree_count = 0.0;              // trees before pruning
  double retained_trees = 0.0;          // trees whose alternatives all survive pruning
  double posterior_sum = 0.0;           // sum of root-alternative posteriors
  double expected_leaves = 0.0;         // sum over trees of posterior * leaf count
  std::vector<double> viterbi;          // per node: best inside log score
  std::vector<int> viterbi_alt;         // per node: argmax alternative
  DerivationTree map_tree;              // Viterbi tree
  std::size_t map_candidate = 0;
  double map_log_joint = 0.0;
  bool empty() const { return tree_count <= 0.0; }
};

ForestAnalysis analyze_example(const Model& model, const std::vector<std::string>& tokens,
                               const std::vector<Term>& candidates, const TrainConfig& cfg = {});

// Best tree of one candidate (index into analysis.candidates) and its log joint.
std::pair<DerivationTree, double> best_tree(const ForestAnalysis& an, std::size_t candidate);

struct ExampleReport {
  std::size_t index = 0;
  double tree_count = 0.0;
  double retained_trees = 0.0;
  double gold_mass = 0.0;
  std::optional<Term> map_root_lf;
  DerivationTree map_tree;
  bool skipped = false;
  std::string skip_reason;
  std::vector<CandidateMass> candidates;
  double posterior_sum = 0.0;
  double pw_mass_added = 0.0;
  double expected_pw_mass = 0.0;
  // Largest deviation from 1 of the summed posteriors of leaves covering a token.
  double leaf_cover_error = 0.0;
};

// Per token, the total posterior of leaf alternatives whose span covers it.
std::vector<double> leaf_coverage(const ForestAnalysis& an);

// One incremental EM step with expectations over every tree in the union of
// the candidates' derivation sets. candidates[0] is the gold LF.
ExampleReport train_example(Model& model, const std::vector<std::string>& tokens,
                            const std::vector<Term>& candidates, const TrainConfig& cfg = {});

}  // namespace semboot
