#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "semboot/evaluation.hpp"

namespace fs = std::filesystem;
using semboot::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("semboot_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("gen-corpus is deterministic") {
  const fs::path dir = scratch("gen");
  auto a = invoke({"gen-corpus", "--order", "SVO", "--size", "500", "--seed", "7", "--out", (dir / "a.txt").string()});
  auto b = invoke({"gen-corpus", "--order", "SVO", "--size", "500", "--seed", "7", "--out", (dir / "b.txt").string()});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  const std::string text = slurp(dir / "a.txt");
  CHECK(text == slurp(dir / "b.txt"));
  CHECK(count_lines(text) == 501);  // header comment plus 500 examples
  CHECK(semboot::load_corpus(dir / "a.txt").size() == 500);
  auto bad = invoke({"gen-corpus", "--out", "/nonexistent-dir/x.txt"});
  CHECK(bad.code == semboot::cli::kIo);
}

TEST_CASE("usage errors") {
  CHECK(invoke({}).code == semboot::cli::kUsage);
  CHECK(invoke({"frobnicate"}).code == semboot::cli::kUsage);
  CHECK(invoke({"train"}).code == semboot::cli::kUsage);
  CHECK(invoke({"parse", "--model", "m.json", ""}).code == semboot::cli::kUsage);
  CHECK(invoke({"eval", "--model", "m.json", "--corpus", "c.txt", "--test-frac", "0"}).code == semboot::cli::kUsage);
  CHECK(invoke({"train", "--corpus", "c.txt", "--beam", "0"}).code == semboot::cli::kUsage);
  CHECK(invoke({"gen-corpus", "--out", "x.txt", "--order", "XYZ"}).code == semboot::cli::kUsage);
}

TEST_CASE("missing inputs are i/o errors") {
  CHECK(invoke({"train", "--corpus", "/nonexistent/corpus.txt", "--out", scratch("missing").string()}).code ==
        semboot::cli::kIo);
  CHECK(invoke({"parse", "--model", "/nonexistent/model.json", "you run"}).code == semboot::cli::kIo);
  const fs::path dir = scratch("empty");
  std::ofstream(dir / "empty.txt") << "# nothing\n";
  CHECK(invoke({"train", "--corpus", (dir / "empty.txt").string(), "--out", dir.string()}).code ==
        semboot::cli::kIo);
}

TEST_CASE("train, parse, eval and probe pipeline") {
  const fs::path dir = scratch("pipeline");
  const std::string corpus = (dir / "corpus.txt").string();
  const std::string lexicon = (dir / "gold.txt").string();
  REQUIRE(invoke({"gen-corpus", "--size", "60", "--out", corpus, "--gold-lexicon", lexicon}).code == 0);

  auto trained = invoke({"train", "--corpus", corpus, "--out", (dir / "run").string(), "--eval-every", "20"});
  REQUIRE(trained.code == 0);
  CHECK(trained.out.find("share_SVO") != std::string::npos);
  for (const char* f : {"run_config.json", "model.json", "curves.csv", "train_log.jsonl"}) {
    CHECK(fs::exists(dir / "run" / f));
  }
  auto cfg = semboot::cli::RunConfig::from_json(slurp(dir / "run" / "run_config.json"));
  CHECK(cfg.subcommand == "train");
  CHECK(cfg.eval_every == 20);
  const std::string curves = slurp(dir / "run" / "curves.csv");
  CHECK(curves.rfind("example_index,metric,value\n", 0) == 0);
  CHECK(curves.find("\n54,share_SVO,") != std::string::npos);
  CHECK(count_lines(slurp(dir / "run" / "train_log.jsonl")) == 54);

  const std::string model = (dir / "run" / "model.json").string();
  auto parsed = invoke({"parse", "--model", model, "you like a ball"});
  CHECK(parsed.code == 0);
  CHECK(parsed.out.find("lf: ") != std::string::npos);
  auto unseen = invoke({"parse", "--model", model, "blick wug"});
  CHECK(unseen.code == semboot::cli::kNoParse);

  auto eval = invoke({"eval", "--model", model, "--corpus", corpus, "--gold-lexicon", lexicon, "--out",
                      (dir / "eval").string()});
  REQUIRE(eval.code == 0);
  for (const char* key : {"select_accuracy: ", "meaning_accuracy_seen: ", "wh_accuracy_with_lf: ",
                          "lexicon_accuracy: ", "share_SVO: "}) {
    CHECK(eval.out.find(key) != std::string::npos);
  }
  CHECK(fs::exists(dir / "eval" / "report.txt"));
  CHECK(fs::exists(dir / "eval" / "constructions.csv"));

  const fs::path probe = dir / "probe.json";
  std::ofstream(probe) << R"J({"utterance": "jacob daxed jacky",
    "candidates": ["(v|dax n:prop|jacky n:prop|jacob)", "(v|dax n:prop|jacob n:prop|jacky)"],
    "target_word": "daxed", "target_lf": "lam x.lam y.(v|dax x y)", "target_category": "(S\\NP)/NP",
    "distractor_counts": [4, 6]})J";
  auto probed = invoke({"probe", "--model", model, "--probe", probe.string(), "--corpus", corpus, "--out",
                        (dir / "probe").string()});
  REQUIRE(probed.code == 0);
  CHECK(probed.out.find("distractors=4") != std::string::npos);
  CHECK(probed.out.find("distractors=6") != std::string::npos);
  CHECK(fs::exists(dir / "probe" / "probe.json"));

  std::ofstream(dir / "seen.json") << R"J({"utterance": "you like a ball",
    "candidates": ["(v|like (det:art|a n|ball) pro:per|you)"], "target_word": "like",
    "target_lf": "lam x.lam y.(v|like x y)", "target_category": "(S\\NP)/NP"})J";
  auto warned = invoke({"probe", "--model", model, "--probe", (dir / "seen.json").string()});
  CHECK(warned.code == 0);
  CHECK(warned.err.find("warning") != std::string::npos);

  std::ofstream(dir / "bad.json") << R"J({"utterance": "x"})J";
  CHECK(invoke({"probe", "--model", model, "--probe", (dir / "bad.json").string()}).code == semboot::cli::kIo);
}

TEST_CASE("training twice gives identical files") {
  const fs::path dir = scratch("determinism");
  const std::string corpus = (dir / "corpus.txt").string();
  REQUIRE(invoke({"gen-corpus", "--size", "30", "--out", corpus}).code == 0);
  REQUIRE(invoke({"train", "--corpus", corpus, "--out", (dir / "a").string(), "--distractors", "2"}).code == 0);
  REQUIRE(invoke({"train", "--corpus", corpus, "--out", (dir / "b").string(), "--distractors", "2"}).code == 0);
  CHECK(slurp(dir / "a" / "model.json") == slurp(dir / "b" / "model.json"));
  CHECK(slurp(dir / "a" / "curves.csv") == slurp(dir / "b" / "curves.csv"));
}
