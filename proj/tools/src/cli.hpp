#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace semboot::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2, kIo = 3, kNoParse = 4 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string subcommand;
  std::string corpus;
  std::vector<std::string> models;  // several snapshots only for `probe`
  std::size_t distractors = 0;
  double alpha = 1.0;
  double alpha_t = 10.0;
  double alpha_w = 0.25;
  std::size_t beam = 10;
  int max_leaf_span = 4;
  std::size_t max_trees = 512;
  std::size_t eval_every = 100;
  double test_frac = 0.1;
  std::uint64_t seed = 7;
  std::string out;
  // gen-corpus
  std::string order = "SVO";
  std::size_t size = 500;
  // eval and gen-corpus
  std::string gold_lexicon;
  std::string wh_gold;
  // train: held-out inferred-meaning accuracy at every checkpoint
  bool eval_meaning = false;
  // parse
  std::string utterance;
  // probe
  std::string probe_file;

  // Throws UsageError on an invalid combination of values.
  void validate() const;
  std::string to_json() const;
  static RunConfig from_json(const std::string& text);
};

int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_parse(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_eval(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_probe(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_gen_corpus(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Parses arguments, validates them and dispatches to a subcommand.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace semboot::cli
