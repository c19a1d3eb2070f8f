#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "semboot/grammar.hpp"
#include "semboot/logical_form.hpp"

namespace semboot {

struct Example {
  std::size_t index = 0;
  std::vector<std::string> tokens;
  Term lf;
  std::string raw_text;
};

struct LoadDiagnostic {
  std::size_t line = 0;
  std::string message;
};

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Corpus {
  std::vector<Example> examples;
  std::size_t split_point = 0;  // examples [split_point, size) are held out
  std::vector<LoadDiagnostic> diagnostics;

  std::size_t size() const { return examples.size(); }
  std::size_t token_count() const;
  std::size_t type_count() const;
  void set_test_fraction(double frac);
};

inline constexpr double kDefaultTestFraction = 0.1;

std::size_t split_point_for(std::size_t n, double test_frac);

// Whitespace tokenization. Clitics are expected to be split in the source text.
std::vector<std::string> tokenize(std::string_view utterance);

// Lines are "utterance<TAB>lf"; '#' starts a comment line. Lines whose LF fails
// to parse or type are recorded in diagnostics and skipped.
Corpus parse_corpus(std::istream& in, double test_frac = kDefaultTestFraction);
Corpus load_corpus(const std::filesystem::path& path, double test_frac = kDefaultTestFraction);
std::string serialize_corpus(const Corpus& corpus);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path, const std::string& header = {});

// LFs of floor(n/2) preceding and ceil(n/2) following examples. Missing
// neighbours at either edge are taken from the other side. LFs alpha-equal to
// the target's gold LF are skipped.
std::vector<Term> distractors_for(const Corpus& corpus, std::size_t index, std::size_t n);

enum class WordOrder { SVO, SOV, VSO, VOS, OVS, OSV };

inline constexpr WordOrder kAllOrders[] = {WordOrder::SVO, WordOrder::SOV, WordOrder::VSO,
                                           WordOrder::VOS, WordOrder::OVS, WordOrder::OSV};

std::string_view word_order_name(WordOrder o);
WordOrder parse_word_order(std::string_view name);

struct SynthConfig {
  WordOrder order = WordOrder::SVO;
  std::size_t size = 500;
  std::size_t n_entities = 6;
  std::size_t n_nouns = 8;
  std::size_t n_trans_verbs = 6;
  std::size_t n_intrans_verbs = 4;
  std::size_t n_modals = 3;
  std::uint64_t seed = 7;
};

// Intransitives, transitives (bare or determiner objects), modals, negation,
// polar and object-wh questions. The LF for each example is drawn before the
// surface order is applied, so the same seed gives the same LFs for every order.
Corpus generate_synthetic(const SynthConfig& cfg, double test_frac = kDefaultTestFraction);

struct LexicalEntry {
  Term lf;
  Category category;
};

using GoldLexicon = std::map<std::string, std::vector<LexicalEntry>>;

// Lines "word: lf || category[, lf || category ...]"; lines that start with
// whitespace continue the previous word's entries.
GoldLexicon parse_gold_lexicon(std::istream& in);
GoldLexicon load_gold_lexicon(const std::filesystem::path& path);
std::string serialize_gold_lexicon(const GoldLexicon& lex);

// Gold lexicon entries for the vocabulary of a synthetic corpus.
GoldLexicon synthetic_gold_lexicon(const SynthConfig& cfg);
// Gold categories for fronted wh words.
GoldLexicon default_wh_gold();

}  // namespace semboot
