#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "semboot/corpus.hpp"
#include "semboot/derivation.hpp"
#include "semboot/evaluation.hpp"
#include "semboot/inference.hpp"
#include "semboot/model.hpp"

namespace semboot::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kConservationTolerance = 1e-9;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

fs::path ensure_out_dir(const RunConfig& cfg) {
  fs::path dir = cfg.out.empty() ? fs::path(".") : fs::path(cfg.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
  return dir;
}

AlphaConfig alphas_of(const RunConfig& cfg) { return AlphaConfig{cfg.alpha, cfg.alpha_t, cfg.alpha_w}; }

TrainConfig train_config_of(const RunConfig& cfg) {
  TrainConfig t;
  t.max_leaf_span = cfg.max_leaf_span;
  t.max_trees = cfg.max_trees;
  return t;
}

ParseConfig parse_config_of(const RunConfig& cfg) {
  ParseConfig p;
  p.beam = cfg.beam;
  p.leaf_beam = cfg.beam;
  p.max_leaf_span = cfg.max_leaf_span;
  return p;
}

Corpus load_corpus_checked(const RunConfig& cfg, std::ostream& err) {
  if (cfg.corpus.empty()) throw UsageError("--corpus is required");
  Corpus c;
  try {
    c = load_corpus(cfg.corpus, cfg.test_frac);
  } catch (const CorpusError& e) {
    throw IoError(e.what());
  }
  for (const auto& d : c.diagnostics) err << "warning: " << cfg.corpus << ":" << d.line << ": " << d.message << "\n";
  if (c.size() == 0) throw IoError("corpus " + cfg.corpus + " has no usable examples");
  return c;
}

Model load_model_checked(const std::string& path) {
  if (path.empty()) throw UsageError("--model is required");
  if (!fs::exists(path)) throw IoError("model file " + path + " does not exist");
  try {
    return Model::from_json(read_file(path));
  } catch (const IoError&) {
    throw;
  } catch (const std::exception& e) {
    throw IoError("cannot load model " + path + ": " + e.what());
  }
}

GoldLexicon load_lexicon_checked(const std::string& path) {
  try {
    return load_gold_lexicon(path);
  } catch (const std::exception& e) {
    throw IoError("cannot load lexicon " + path + ": " + e.what());
  }
}

std::vector<CurvePoint> word_order_points(const Model& model, std::size_t index) {
  std::vector<CurvePoint> pts;
  WordOrderReport r = word_order_priors(model);
  for (std::size_t k = 0; k < r.share.size(); ++k) {
    pts.push_back({index, "share_" + std::string(word_order_name(kAllOrders[k])), r.share[k]});
  }
  return pts;
}

json example_log(std::size_t index, const ExampleReport& rep) {
  json j;
  j["index"] = index;
  j["skipped"] = rep.skipped;
  if (rep.skipped) j["reason"] = rep.skip_reason;
  j["trees"] = rep.tree_count;
  j["retained_trees"] = rep.retained_trees;
  j["gold_mass"] = rep.gold_mass;
  j["posterior_sum"] = rep.posterior_sum;
  j["pw_mass_added"] = rep.pw_mass_added;
  j["expected_pw_mass"] = rep.expected_pw_mass;
  if (rep.map_root_lf) j["map_lf"] = render_lf(*rep.map_root_lf);
  return j;
}

std::vector<Term> probe_distractors(const Corpus* corpus, const std::vector<Term>& candidates, std::size_t n) {
  std::vector<Term> out;
  if (n == 0) return out;
  if (!corpus) throw UsageError("a distractor count in the probe file needs --corpus");
  auto known = [&](const Term& t) {
    for (const auto& c : candidates) if (lf_equivalent(c, t)) return true;
    for (const auto& d : out) if (lf_equivalent(d, t)) return true;
    return false;
  };
  for (std::size_t k = corpus->split_point; k < corpus->size() && out.size() < n; ++k) {
    if (!known(corpus->examples[k].lf)) out.push_back(corpus->examples[k].lf);
  }
  for (std::size_t k = 0; k < corpus->split_point && out.size() < n; ++k) {
    if (!known(corpus->examples[k].lf)) out.push_back(corpus->examples[k].lf);
  }
  return out;
}

struct ProbeSpec {
  NonceProbe probe = dax_transitive_probe();
  std::vector<std::size_t> distractor_counts;
};

ProbeSpec read_probe_spec(const std::string& path) {
  ProbeSpec loaded;
  if (path.empty()) {
    loaded.distractor_counts = {0};
    return loaded;
  }
  const std::string text = read_file(path);
  try {
    json j = json::parse(text);
    loaded.probe.tokens = tokenize(j.at("utterance").get<std::string>());
    loaded.probe.candidates.clear();
    loaded.probe.distractors.clear();
    for (const auto& c : j.at("candidates")) loaded.probe.candidates.push_back(parse_lf(c.get<std::string>()));
    if (loaded.probe.candidates.empty()) throw std::invalid_argument("no candidates");
    loaded.probe.target_word = j.at("target_word").get<std::string>();
    loaded.probe.target_lf = parse_lf(j.at("target_lf").get<std::string>());
    loaded.probe.target_category = parse_category(j.at("target_category").get<std::string>());
    if (j.contains("distractors")) {
      for (const auto& d : j.at("distractors")) loaded.probe.distractors.push_back(parse_lf(d.get<std::string>()));
    }
    if (j.contains("distractor_counts")) {
      loaded.distractor_counts = j.at("distractor_counts").get<std::vector<std::size_t>>();
    }
    if (loaded.distractor_counts.empty()) loaded.distractor_counts = {0};
    bool in_utterance = false;
    for (const auto& t : loaded.probe.tokens) in_utterance = in_utterance || t == loaded.probe.target_word;
    if (!in_utterance) throw std::invalid_argument("target_word does not occur in the utterance");
  } catch (const std::exception& e) {
    throw IoError("malformed probe file " + path + ": " + e.what());
  }
  return loaded;
}

}  // namespace

void RunConfig::validate() const {
  static const std::vector<std::string> kCommands = {"train", "parse", "eval", "probe", "gen-corpus"};
  if (std::find(kCommands.begin(), kCommands.end(), subcommand) == kCommands.end()) {
    throw UsageError("unknown subcommand '" + subcommand + "'");
  }
  if (!(alpha > 0.0) || !(alpha_t > 0.0) || !(alpha_w > 0.0)) throw UsageError("concentrations must be positive");
  if (beam == 0) throw UsageError("--beam must be positive");
  if (max_leaf_span < 1) throw UsageError("--max-leaf-span must be at least 1");
  if (max_trees == 0) throw UsageError("--max-trees must be positive");
  if (eval_every == 0) throw UsageError("--eval-every must be positive");
  if (!(test_frac >= 0.0 && test_frac < 1.0)) throw UsageError("--test-frac must lie in [0, 1)");
  if (subcommand == "eval" && test_frac <= 0.0) throw UsageError("eval needs a positive --test-frac");
  if (subcommand == "train" && corpus.empty()) throw UsageError("train needs --corpus");
  if (subcommand == "eval" && (corpus.empty() || models.empty())) throw UsageError("eval needs --corpus and --model");
  if ((subcommand == "parse" || subcommand == "probe") && models.empty()) {
    throw UsageError(subcommand + " needs --model");
  }
  if (subcommand != "probe" && models.size() > 1) throw UsageError("only probe accepts several --model values");
  if (subcommand == "parse" && tokenize(utterance).empty()) throw UsageError("parse needs a non-empty utterance");
  if (subcommand == "gen-corpus") {
    if (out.empty()) throw UsageError("gen-corpus needs --out");
    if (size == 0) throw UsageError("--size must be positive");
    try {
      parse_word_order(order);
    } catch (const std::exception&) {
      throw UsageError("unknown word order '" + order + "'");
    }
  }
}

std::string RunConfig::to_json() const {
  json j;
  j["subcommand"] = subcommand;
  j["corpus"] = corpus;
  j["model"] = models;
  j["distractors"] = distractors;
  j["alpha"] = alpha;
  j["alpha_t"] = alpha_t;
  j["alpha_w"] = alpha_w;
  j["beam"] = beam;
  j["max_leaf_span"] = max_leaf_span;
  j["max_trees"] = max_trees;
  j["eval_every"] = eval_every;
  j["test_frac"] = test_frac;
  j["seed"] = seed;
  j["out"] = out;
  j["order"] = order;
  j["size"] = size;
  j["gold_lexicon"] = gold_lexicon;
  j["wh_gold"] = wh_gold;
  j["eval_meaning"] = eval_meaning;
  j["utterance"] = utterance;
  j["probe_file"] = probe_file;
  return j.dump(2) + "\n";
}

RunConfig RunConfig::from_json(const std::string& text) {
  json j = json::parse(text);
  RunConfig c;
  c.subcommand = j.value("subcommand", c.subcommand);
  c.corpus = j.value("corpus", c.corpus);
  c.models = j.value("model", c.models);
  c.distractors = j.value("distractors", c.distractors);
  c.alpha = j.value("alpha", c.alpha);
  c.alpha_t = j.value("alpha_t", c.alpha_t);
  c.alpha_w = j.value("alpha_w", c.alpha_w);
  c.beam = j.value("beam", c.beam);
  c.max_leaf_span = j.value("max_leaf_span", c.max_leaf_span);
  c.max_trees = j.value("max_trees", c.max_trees);
  c.eval_every = j.value("eval_every", c.eval_every);
  c.test_frac = j.value("test_frac", c.test_frac);
  c.seed = j.value("seed", c.seed);
  c.out = j.value("out", c.out);
  c.order = j.value("order", c.order);
  c.size = j.value("size", c.size);
  c.gold_lexicon = j.value("gold_lexicon", c.gold_lexicon);
  c.wh_gold = j.value("wh_gold", c.wh_gold);
  c.eval_meaning = j.value("eval_meaning", c.eval_meaning);
  c.utterance = j.value("utterance", c.utterance);
  c.probe_file = j.value("probe_file", c.probe_file);
  return c;
}

int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Corpus corpus = load_corpus_checked(cfg, err);
  const fs::path dir = ensure_out_dir(cfg);
  write_file(dir / "run_config.json", cfg.to_json());
  const fs::path model_path = cfg.models.empty() ? dir / "model.json" : fs::path(cfg.models.front());
  const fs::path curves_path = dir / "curves.csv";
  std::ofstream log(dir / "train_log.jsonl", std::ios::binary | std::ios::trunc);
  if (!log) throw IoError("cannot write " + (dir / "train_log.jsonl").string());

  Model model(alphas_of(cfg));
  const TrainConfig tcfg = train_config_of(cfg);
  const ParseConfig pcfg = parse_config_of(cfg);
  const TestRange held_out = held_out_range(corpus);
  bool first_checkpoint = true;
  auto checkpoint = [&](std::size_t index) {
    std::vector<CurvePoint> pts = word_order_points(model, index);
    if (cfg.eval_meaning && held_out.end > held_out.begin) {
      MeaningAccuracy ma = inferred_meaning_accuracy(model, corpus, held_out, true, pcfg);
      pts.push_back({index, "meaning_accuracy", ma.tally.rate()});
    }
    emit_curves(pts, curves_path, !first_checkpoint);
    first_checkpoint = false;
  };

  checkpoint(0);
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < corpus.split_point; ++i) {
    const Example& ex = corpus.examples[i];
    std::vector<Term> candidates{ex.lf};
    for (auto& d : distractors_for(corpus, i, cfg.distractors)) candidates.push_back(std::move(d));
    ExampleReport rep = train_example(model, ex.tokens, candidates, tcfg);
    log << example_log(i, rep).dump() << '\n';
    if (rep.skipped) {
      ++skipped;
    } else if (std::abs(rep.posterior_sum - 1.0) > kConservationTolerance ||
               std::abs(rep.pw_mass_added - rep.expected_pw_mass) > kConservationTolerance) {
      err << "error: conservation check failed on example " << i << "\n";
      return kFailure;
    }
    if ((i + 1) % cfg.eval_every == 0 && i + 1 < corpus.split_point) checkpoint(i + 1);
  }
  checkpoint(corpus.split_point);
  if (!log) throw IoError("failed writing training log");
  try {
    model.save(model_path);
  } catch (const std::exception& e) {
    throw IoError(e.what());
  }

  WordOrderReport shares = word_order_priors(model);
  std::map<std::string, std::string> summary;
  summary["examples_trained"] = std::to_string(corpus.split_point);
  summary["examples_skipped"] = std::to_string(skipped);
  summary["model"] = model_path.string();
  summary["word_order_argmax"] = std::string(word_order_name(shares.argmax()));
  for (std::size_t k = 0; k < shares.share.size(); ++k) {
    summary["share_" + std::string(word_order_name(kAllOrders[k]))] = format_number(shares.share[k]);
  }
  out << format_report(summary);
  return kOk;
}

int cmd_parse(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Model model = load_model_checked(cfg.models.front());
  const auto tokens = tokenize(cfg.utterance);
  std::vector<std::string> unseen;
  for (const auto& t : tokens) {
    if (!model.word_seen(t)) unseen.push_back(t);
  }
  Parser parser(model, parse_config_of(cfg));
  auto result = parser.parse(tokens);
  if (!result) {
    err << "no parse for \"" << cfg.utterance << "\"";
    if (!unseen.empty()) err << " (" << unseen.size() << " unseen word" << (unseen.size() == 1 ? "" : "s") << ")";
    err << "\n";
    return kNoParse;
  }
  out << "lf: " << render_lf(result->lf) << "\n";
  out << "log_score: " << format_number(result->log_score) << "\n";
  out << "tree: " << tree_to_string(result->tree) << "\n";
  return kOk;
}

int cmd_eval(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Corpus corpus = load_corpus_checked(cfg, err);
  Model model = load_model_checked(cfg.models.front());
  const TestRange range = held_out_range(corpus);
  if (range.end <= range.begin) throw UsageError("the held-out range is empty");
  const TrainConfig tcfg = train_config_of(cfg);
  const ParseConfig pcfg = parse_config_of(cfg);

  std::map<std::string, std::string> report;
  report["heldout_items"] = std::to_string(range.end - range.begin);
  WordOrderReport shares = word_order_priors(model);
  for (std::size_t k = 0; k < shares.share.size(); ++k) {
    report["share_" + std::string(word_order_name(kAllOrders[k]))] = format_number(shares.share[k]);
  }
  report["word_order_argmax"] = std::string(word_order_name(shares.argmax()));

  Tally select = select_accuracy(model, corpus, range, 4, tcfg);
  report["select_accuracy"] = format_number(select.rate());

  MeaningAccuracy seen = inferred_meaning_accuracy(model, corpus, range, true, pcfg);
  MeaningAccuracy all = inferred_meaning_accuracy(model, corpus, range, false, pcfg);
  report["meaning_accuracy_seen"] = format_number(seen.tally.rate());
  report["meaning_accuracy_seen_items"] = std::to_string(seen.tally.total);
  report["meaning_accuracy_all"] = format_number(all.tally.rate());
  report["meaning_accuracy_all_items"] = std::to_string(all.tally.total);

  std::ostringstream table;
  table << "construction,correct,total,accuracy\n";
  for (const auto& [label, t] : construction_breakdown(seen.items, true)) {
    report["construction." + label] = format_number(t.rate()) + " (" + std::to_string(t.correct) + "/" +
                                      std::to_string(t.total) + ")";
    table << label << ',' << t.correct << ',' << t.total << ',' << format_number(t.rate()) << '\n';
  }

  const GoldLexicon wh_gold = cfg.wh_gold.empty() ? default_wh_gold() : load_lexicon_checked(cfg.wh_gold);
  Tally wh_lf = wh_category_accuracy(model, corpus, range, true, wh_gold, tcfg, pcfg);
  Tally wh_nolf = wh_category_accuracy(model, corpus, range, false, wh_gold, tcfg, pcfg);
  report["wh_accuracy_with_lf"] = format_number(wh_lf.rate());
  report["wh_accuracy_without_lf"] = format_number(wh_nolf.rate());
  report["wh_items"] = std::to_string(wh_lf.total);

  if (!cfg.gold_lexicon.empty()) {
    GoldLexicon gold = load_lexicon_checked(cfg.gold_lexicon);
    std::vector<std::string> words;
    for (const auto& [w, entries] : gold) words.push_back(w);
    Tally lex = lexicon_accuracy(extract_lexicon(model, words), gold);
    report["lexicon_accuracy"] = format_number(lex.rate());
    report["lexicon_words"] = std::to_string(lex.total);
  }

  const std::string text = format_report(report);
  if (!cfg.out.empty()) {
    const fs::path dir = ensure_out_dir(cfg);
    write_file(dir / "run_config.json", cfg.to_json());
    write_file(dir / "report.txt", text);
    write_file(dir / "constructions.csv", table.str());
  }
  out << text;
  return kOk;
}

int cmd_probe(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  ProbeSpec loaded = read_probe_spec(cfg.probe_file);
  std::optional<Corpus> corpus;
  if (!cfg.corpus.empty()) corpus = load_corpus_checked(cfg, err);
  const TrainConfig tcfg = train_config_of(cfg);

  json results = json::array();
  for (const auto& path : cfg.models) {
    Model model = load_model_checked(path);
    for (std::size_t n : loaded.distractor_counts) {
      NonceProbe probe = loaded.probe;
      for (auto& d : probe_distractors(corpus ? &*corpus : nullptr, probe.candidates, n)) {
        probe.distractors.push_back(std::move(d));
      }
      ProbeResult r = nonce_probe(model, probe, tcfg);
      for (const auto& w : r.seen_words) {
        err << "warning: " << path << " has already seen the probe word '" << w << "'\n";
      }
      json j;
      j["model"] = path;
      j["distractors"] = probe.distractors.size();
      j["target_mass"] = r.target_mass;
      j["category_mass"] = r.category_mass;
      j["fraction"] = r.fraction;
      j["seen_words"] = r.seen_words;
      out << path << " distractors=" << probe.distractors.size() << " fraction=" << format_number(r.fraction)
          << "\n";
      results.push_back(std::move(j));
    }
  }
  if (!cfg.out.empty()) {
    const fs::path dir = ensure_out_dir(cfg);
    write_file(dir / "run_config.json", cfg.to_json());
    write_file(dir / "probe.json", results.dump(2) + "\n");
  }
  return kOk;
}

int cmd_gen_corpus(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  SynthConfig sc;
  sc.order = parse_word_order(cfg.order);
  sc.size = cfg.size;
  sc.seed = cfg.seed;
  Corpus c = generate_synthetic(sc, cfg.test_frac);
  try {
    save_corpus(c, cfg.out,
                "synthetic " + cfg.order + " size " + std::to_string(cfg.size) + " seed " + std::to_string(cfg.seed));
    if (!cfg.gold_lexicon.empty()) write_file(cfg.gold_lexicon, serialize_gold_lexicon(synthetic_gold_lexicon(sc)));
  } catch (const CorpusError& e) {
    throw IoError(e.what());
  }
  out << "wrote " << c.size() << " examples to " << cfg.out << "\n";
  return kOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Semantic bootstrapping CCG learner"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--corpus", cfg.corpus, "Corpus file (utterance<TAB>lf per line)");
    sub->add_option("--model", cfg.models, "Model file");
    sub->add_option("--distractors", cfg.distractors, "Distractor LFs per training example");
    sub->add_option("--alpha", cfg.alpha, "Concentration of p_r, p_h and p_l");
    sub->add_option("--alpha-t", cfg.alpha_t, "Concentration of p_t");
    sub->add_option("--alpha-w", cfg.alpha_w, "Concentration of p_w");
    sub->add_option("--beam", cfg.beam, "Parser beam width");
    sub->add_option("--max-leaf-span", cfg.max_leaf_span, "Longest multi-word leaf");
    sub->add_option("--max-trees", cfg.max_trees, "Tree cap for explicit enumeration");
    sub->add_option("--eval-every", cfg.eval_every, "Checkpoint cadence in training examples");
    sub->add_option("--test-frac", cfg.test_frac, "Held-out fraction at the end of the corpus");
    sub->add_option("--seed", cfg.seed, "Random seed");
    sub->add_option("--out", cfg.out, "Output directory (output file for gen-corpus)");
  };

  CLI::App* train = app.add_subcommand("train", "Train a model with one pass over the corpus");
  add_common(train);
  train->add_flag("--eval-meaning", cfg.eval_meaning, "Track held-out meaning accuracy at every checkpoint");

  CLI::App* parse = app.add_subcommand("parse", "Parse an utterance with a trained model");
  add_common(parse);
  parse->add_option("utterance", cfg.utterance, "Utterance text")->required();

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a model on the held-out tail of a corpus");
  add_common(eval);
  eval->add_option("--gold-lexicon", cfg.gold_lexicon, "Gold lexicon for lexicon accuracy");
  eval->add_option("--wh-gold", cfg.wh_gold, "Gold wh-word categories");

  CLI::App* probe = app.add_subcommand("probe", "Nonce-word probe on one or more model snapshots");
  add_common(probe);
  probe->add_option("--probe", cfg.probe_file, "Probe file (JSON); defaults to the dax transitive probe");

  CLI::App* gen = app.add_subcommand("gen-corpus", "Generate a synthetic corpus");
  add_common(gen);
  gen->add_option("--order", cfg.order, "Word order: SVO, SOV, VSO, VOS, OVS or OSV");
  gen->add_option("--size", cfg.size, "Number of examples");
  gen->add_option("--gold-lexicon", cfg.gold_lexicon, "Also write the gold lexicon here");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }
  for (CLI::App* sub : app.get_subcommands()) cfg.subcommand = sub->get_name();

  try {
    cfg.validate();
    if (cfg.subcommand == "train") return cmd_train(cfg, out, err);
    if (cfg.subcommand == "parse") return cmd_parse(cfg, out, err);
    if (cfg.subcommand == "eval") return cmd_eval(cfg, out, err);
    if (cfg.subcommand == "probe") return cmd_probe(cfg, out, err);
    return cmd_gen_corpus(cfg, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace semboot::cli
