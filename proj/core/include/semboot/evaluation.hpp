#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "semboot/corpus.hpp"
#include "semboot/derivation.hpp"
#include "semboot/inference.hpp"
#include "semboot/model.hpp"

namespace semboot {

struct WordOrderReport {
  std::array<double, 6> share{};  // indexed like kAllOrders

  double operator[](WordOrder o) const;
  WordOrder argmax() const;
};

// Unnormalized prior of one order: the sum over its two derivation skeletons.
double word_order_score(const Model& model, WordOrder order);
WordOrderReport word_order_priors(const Model& model);

struct LexiconGuess {
  Term lf;
  Category category;
};

// Words absent from p_w are absent from the result.
std::map<std::string, LexiconGuess> extract_lexicon(const Model& model, const std::vector<std::string>& words);

struct Tally {
  std::size_t correct = 0;
  std::size_t total = 0;
  // 0 when there are no items.
  double rate() const { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }
};

// Fraction of gold words whose extracted (lf, category) matches one of their gold entries.
Tally lexicon_accuracy(const std::map<std::string, LexiconGuess>& extracted, const GoldLexicon& gold);

struct TestRange {
  std::size_t begin = 0;
  std::size_t end = 0;
};

TestRange held_out_range(const Corpus& corpus);

Tally select_accuracy(const Model& model, const Corpus& corpus, TestRange range, std::size_t n_distractors = 4,
                      const TrainConfig& cfg = {});

using ConstructionLabels = std::set<std::string>;

// Pure function of the gold LF.
ConstructionLabels construction_labels(const Term& gold_lf);

struct ItemResult {
  std::size_t index = 0;
  bool correct = false;
  bool has_unseen = false;
  bool parsed = false;
  ConstructionLabels labels;
};

struct MeaningAccuracy {
  Tally tally;
  std::vector<ItemResult> items;
};

MeaningAccuracy inferred_meaning_accuracy(const Model& model, const Corpus& corpus, TestRange range,
                                          bool exclude_unseen, const ParseConfig& cfg = {});

// Multi-label items count under every label. Items dropped by exclude_unseen are skipped.
std::map<std::string, Tally> construction_breakdown(const std::vector<ItemResult>& items, bool exclude_unseen);

// Scores items whose first token has a gold wh entry and whose gold LF has a WH constant.
Tally wh_category_accuracy(const Model& model, const Corpus& corpus, TestRange range, bool with_lf,
                           const GoldLexicon& wh_gold, const TrainConfig& train_cfg = {},
                           const ParseConfig& parse_cfg = {});

struct NonceProbe {
  std::vector<std::string> tokens;
  std::vector<Term> candidates;  // the first one is treated as the gold LF during the update
  std::string target_word;
  Term target_lf;
  Category target_category;
  std::vector<Term> distractors;
};

struct ProbeResult {
  // Posterior mass of nonce-word leaves with the target (lf, category), over
  // the mass of nonce-word leaves with the target category.
  double target_mass = 0.0;
  double category_mass = 0.0;
  double fraction = 0.0;
  // Target words the snapshot has already seen.
  std::vector<std::string> seen_words;
};

ProbeResult nonce_probe(const Model& snapshot, const NonceProbe& probe, const TrainConfig& cfg = {});

// The transitive "jacob daxed jacky" probe with its agent-swapped competitor.
NonceProbe dax_transitive_probe();

struct CurvePoint {
  std::size_t example_index = 0;
  std::string metric;
  double value = 0.0;
};

// Writes "example_index,metric,value" rows sorted by (index, metric). When
// `append` is set and the file exists, rows are added without a new header.
void emit_curves(const std::vector<CurvePoint>& points, const std::filesystem::path& path, bool append = false);

std::string format_number(double v);

// Stable "key: value" report, one entry per line, keys sorted.
std::string format_report(const std::map<std::string, std::string>& entries);

}  // namespace semboot
