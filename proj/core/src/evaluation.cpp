#include "semboot/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <tuple>

namespace semboot {

namespace {

std::size_t order_index(WordOrder o) {
  for (std::size_t k = 0; k < 6; ++k) {
    if (kAllOrders[k] == o) return k;
  }
  throw std::invalid_argument("unknown word order");
}

struct Step {
  std::string context;
  std::string outcome;
};

struct OrderSkeletons {
  Category verb;
  bool subject_inner = false;
  std::vector<Step> applicative;
  std::vector<Step> raised;
};

// Skeletons over "subject verb object" in the given surface order. The
// applicative skeleton combines the verb with its inner argument first; the
// raised skeleton type-raises the outer argument. For SVO that raised subject
// composes with the verb; for the other orders it applies to the verb phrase.
OrderSkeletons skeletons_for(WordOrder order) {
  const Category np = Category::atom(Atom::NP);
  const Category s = Category::atom(Atom::S);
  const Category s_bs_np = parse_category("S\\NP");
  const Category s_fs_np = parse_category("S/NP");
  const Category raise_fwd = parse_category("S/(S\\NP)");
  const Category raise_bwd = parse_category("S\\(S/NP)");
  const std::string raise_step = raise_outcome(np);

  OrderSkeletons sk{np, false, {}, {}};
  switch (order) {
    case WordOrder::SVO: {
      sk.verb = parse_category("(S\\NP)/NP");
      sk.applicative = {{s_bs_np.str(), split_outcome(sk.verb, np, Rule::FwdApp)},
                        {s.str(), split_outcome(np, s_bs_np, Rule::BwdApp)}};
      sk.raised = {{raise_fwd.str(), raise_step},
                   {s_fs_np.str(), split_outcome(raise_fwd, sk.verb, Rule::FwdComp)},
                   {s.str(), split_outcome(s_fs_np, np, Rule::FwdApp)}};
      break;
    }
    case WordOrder::SOV:
    case WordOrder::OSV: {
      sk.verb = parse_category("(S\\NP)\\NP");
      sk.subject_inner = order == WordOrder::OSV;
      sk.applicative = {{s_bs_np.str(), split_outcome(np, sk.verb, Rule::BwdApp)},
                        {s.str(), split_outcome(np, s_bs_np, Rule::BwdApp)}};
      sk.raised = {{s_bs_np.str(), split_outcome(np, sk.verb, Rule::BwdApp)},
                   {raise_fwd.str(), raise_step},
                   {s.str(), split_outcome(raise_fwd, s_bs_np, Rule::FwdApp)}};
      break;
    }
    case WordOrder::VSO:
    case WordOrder::VOS: {
      sk.verb = parse_category("(S/NP)/NP");
      sk.subject_inner = order == WordOrder::VSO;
      sk.applicative = {{s_fs_np.str(), split_outcome(sk.verb, np, Rule::FwdApp)},
                        {s.str(), split_outcome(s_fs_np, np, Rule::FwdApp)}};
      sk.raised = {{s_fs_np.str(), split_outcome(sk.verb, np, Rule::FwdApp)},
                   {raise_bwd.str(), raise_step},
                   {s.str(), split_outcome(s_fs_np, raise_bwd, Rule::BwdApp)}};
      break;
    }
    case WordOrder::OVS: {
      sk.verb = parse_category("(S/NP)\\NP");
      sk.applicative = {{s_fs_np.str(), split_outcome(np, sk.verb, Rule::BwdApp)},
                        {s.str(), split_outcome(s_fs_np, np, Rule::FwdApp)}};
      sk.raised = {{s_fs_np.str(), split_outcome(np, sk.verb, Rule::BwdApp)},
                   {raise_bwd.str(), raise_step},
                   {s.str(), split_outcome(s_fs_np, raise_bwd, Rule::BwdApp)}};
      break;
    }
  }
  return sk;
}

const std::string& verb_shell(bool subject_inner) {
  static const std::string object_inner_shell = render_lf(shellify(parse_lf("lam x.lam y.(v|verb x y)")).term);
  static const std::string subject_inner_shell = render_lf(shellify(parse_lf("lam x.lam y.(v|verb y x)")).term);
  return subject_inner ? subject_inner_shell : object_inner_shell;
}

double product(const Model& model, const std::vector<Step>& steps) {
  double p = 1.0;
  for (const auto& st : steps) p *= model.p_t.posterior(st.context, st.outcome);
  return p;
}

template <typename Map>
const typename Map::key_type* argmax_key(const Map& scores) {
  const typename Map::key_type* best = nullptr;
  double best_v = -std::numeric_limits<double>::infinity();
  for (const auto& [k, v] : scores) {
    if (v > best_v) {  // map order breaks ties toward the smaller key
      best_v = v;
      best = &k;
    }
  }
  return best;
}

void label_verbs(const Term& t, int& main_arity, bool& prog) {
  switch (t.kind()) {
    case Term::Kind::Var: return;
    case Term::Kind::Const:
      if (t.tag() == "v") {
        if (t.symbol().size() >= 5 && t.symbol().compare(t.symbol().size() - 5, 5, "_prog") == 0) prog = true;
        if (main_arity < 0) main_arity = 0;
      }
      return;
    case Term::Kind::Lam: label_verbs(t.body(), main_arity, prog); return;
    case Term::Kind::App: {
      std::vector<const Term*> args;
      const Term* head = &t;
      while (head->is_app()) {
        args.push_back(&head->argument());
        head = &head->function();
      }
      if (head->is_const() && head->tag() == "v" && main_arity < 0) main_arity = static_cast<int>(args.size());
      label_verbs(*head, main_arity, prog);
      for (auto it = args.rbegin(); it != args.rend(); ++it) label_verbs(**it, main_arity, prog);
      return;
    }
  }
}

bool leaf_matches(const DerivationTree& tree, const std::vector<LexicalEntry>& gold) {
  for (const DerivationNode* leaf : tree_leaves(tree)) {
    if (leaf->begin != 0 || leaf->end != 1) continue;
    for (const auto& e : gold) {
      if (leaf->category == e.category && lf_equivalent(leaf->lf, e.lf)) return true;
    }
  }
  return false;
}

}  // namespace

double WordOrderReport::operator[](WordOrder o) const { return share[order_index(o)]; }

WordOrder WordOrderReport::argmax() const {
  std::size_t best = 0;
  for (std::size_t k = 1; k < share.size(); ++k) {
    if (share[k] > share[best]) best = k;
  }
  return kAllOrders[best];
}

double word_order_score(const Model& model, WordOrder order) {
  const OrderSkeletons sk = skeletons_for(order);
  const Category np = Category::atom(Atom::NP);
  const double np_leaf = model.p_t.posterior(np.str(), kLeafOutcome);
  const double verb_leaf = model.p_t.posterior(sk.verb.str(), kLeafOutcome) *
                           model.p_h.posterior(sk.verb.str(), verb_shell(sk.subject_inner));
  const double leaves = np_leaf * np_leaf * verb_leaf;
  return leaves * (product(model, sk.applicative) + product(model, sk.raised));
}

WordOrderReport word_order_priors(const Model& model) {
  WordOrderReport r;
  double total = 0.0;
  for (std::size_t k = 0; k < 6; ++k) {
    r.share[k] = word_order_score(model, kAllOrders[k]);
    total += r.share[k];
  }
  for (double& v : r.share) v /= total;
  return r;
}

std::map<std::string, LexiconGuess> extract_lexicon(const Model& model, const std::vector<std::string>& words) {
  std::map<std::string, LexiconGuess> out;
  for (const auto& w : words) {
    const auto* lfs = model.p_w.contexts_with(w);
    if (!lfs || lfs->empty()) continue;
    std::map<std::string, double> lf_counts;
    std::map<std::string, double> cat_scores;
    for (const auto& m : *lfs) {
      const double n_wm = model.p_w.count(m, w);
      lf_counts[m] += n_wm;
      const auto* shells = model.p_l.contexts_with(m);
      if (!shells) continue;
      for (const auto& e : *shells) {
        const double p_me = model.p_l.count(e, m) / model.p_l.total(e);
        const auto* cats = model.p_h.contexts_with(e);
        if (!cats) continue;
        for (const auto& s : *cats) {
          cat_scores[s] += n_wm * p_me * model.p_h.count(s, e) / model.p_h.total(s);
        }
      }
    }
    const std::string* lf = argmax_key(lf_counts);
    const std::string* cat = argmax_key(cat_scores);
    if (!lf || !cat) continue;
    out.emplace(w, LexiconGuess{parse_lf(*lf), parse_category(*cat)});
  }
  return out;
}

Tally lexicon_accuracy(const std::map<std::string, LexiconGuess>& extracted, const GoldLexicon& gold) {
  Tally t;
  for (const auto& [word, entries] : gold) {
    ++t.total;
    auto it = extracted.find(word);
    if (it == extracted.end()) continue;
    for (const auto& e : entries) {
      if (e.category == it->second.category && lf_equivalent(e.lf, it->second.lf)) {
        ++t.correct;
        break;
      }
    }
  }
  return t;
}

TestRange held_out_range(const Corpus& corpus) { return TestRange{corpus.split_point, corpus.size()}; }

Tally select_accuracy(const Model& model, const Corpus& corpus, TestRange range, std::size_t n_distractors,
                      const TrainConfig& cfg) {
  TrainConfig exact = cfg;
  exact.prune_nats = kNoPruning;
  Tally t;
  for (std::size_t i = range.begin; i < range.end && i < corpus.size(); ++i) {
    const Example& ex = corpus.examples[i];
    std::vector<Term> candidates{ex.lf};
    for (auto& d : distractors_for(corpus, i, n_distractors)) candidates.push_back(std::move(d));
    ++t.total;
    ForestAnalysis an = analyze_example(model, ex.tokens, candidates, exact);
    if (an.empty()) continue;
    const double gold = an.log_root[0];
    if (!std::isfinite(gold)) continue;
    bool wins = true;
    for (std::size_t k = 1; k < an.log_root.size(); ++k) {
      if (!(an.log_root[k] < gold)) wins = false;
    }
    if (wins) ++t.correct;
  }
  return t;
}

ConstructionLabels construction_labels(const Term& gold_lf) {
  ConstructionLabels labels;
  if (gold_lf.mentions_tag("mod")) labels.insert("modal");
  if (gold_lf.mentions_tag("neg")) labels.insert("neg");
  const bool wh = gold_lf.mentions_tag(kWhTag);
  if (wh) labels.insert("whq");
  if (!wh && gold_lf.mentions_tag(kQuestionTag)) labels.insert("polar_q");
  int arity = -1;
  bool prog = false;
  label_verbs(gold_lf, arity, prog);
  if (prog) labels.insert("prog");
  if (arity == 1) labels.insert("intrans");
  if (arity == 2) labels.insert("trans");
  if (arity == 3) labels.insert("ditrans");
  return labels;
}

MeaningAccuracy inferred_meaning_accuracy(const Model& model, const Corpus& corpus, TestRange range,
                                          bool exclude_unseen, const ParseConfig& cfg) {
  MeaningAccuracy out;
  Parser parser(model, cfg);
  for (std::size_t i = range.begin; i < range.end && i < corpus.size(); ++i) {
    const Example& ex = corpus.examples[i];
    ItemResult item;
    item.index = i;
    item.labels = construction_labels(ex.lf);
    item.has_unseen = std::any_of(ex.tokens.begin(), ex.tokens.end(),
                                  [&](const std::string& w) { return !model.word_seen(w); });
    auto parse = parser.parse(ex.tokens);
    item.parsed = parse.has_value();
    item.correct = parse && lf_equivalent(parse->lf, ex.lf);
    if (!(exclude_unseen && item.has_unseen)) {
      ++out.tally.total;
      if (item.correct) ++out.tally.correct;
    }
    out.items.push_back(std::move(item));
  }
  return out;
}

std::map<std::string, Tally> construction_breakdown(const std::vector<ItemResult>& items, bool exclude_unseen) {
  std::map<std::string, Tally> out;
  for (const auto& item : items) {
    if (exclude_unseen && item.has_unseen) continue;
    for (const auto& label : item.labels) {
      auto& t = out[label];
      ++t.total;
      if (item.correct) ++t.correct;
    }
  }
  return out;
}

Tally wh_category_accuracy(const Model& model, const Corpus& corpus, TestRange range, bool with_lf,
                           const GoldLexicon& wh_gold, const TrainConfig& train_cfg,
                           const ParseConfig& parse_cfg) {
  Tally t;
  std::optional<Parser> parser;
  if (!with_lf) parser.emplace(model, parse_cfg);
  for (std::size_t i = range.begin; i < range.end && i < corpus.size(); ++i) {
    const Example& ex = corpus.examples[i];
    if (ex.tokens.empty() || !ex.lf.mentions_tag(kWhTag)) continue;
    auto gold = wh_gold.find(ex.tokens.front());
    if (gold == wh_gold.end()) continue;
    ++t.total;
    DerivationTree tree;
    if (with_lf) {
      ForestAnalysis an = analyze_example(model, ex.tokens, {ex.lf}, train_cfg);
      if (!an.empty()) tree = best_tree(an, 0).first;
    } else if (auto parse = parser->parse(ex.tokens)) {
      tree = parse->tree;
    }
    if (tree && leaf_matches(tree, gold->second)) ++t.correct;
  }
  return t;
}

ProbeResult nonce_probe(const Model& snapshot, const NonceProbe& probe, const TrainConfig& cfg) {
  ProbeResult r;
  if (snapshot.word_seen(probe.target_word)) r.seen_words.push_back(probe.target_word);
  auto pos = std::find(probe.tokens.begin(), probe.tokens.end(), probe.target_word);
  if (pos == probe.tokens.end()) throw std::invalid_argument("probe target word is not in the utterance");
  const int k = static_cast<int>(pos - probe.tokens.begin());

  std::vector<Term> candidates = probe.candidates;
  candidates.insert(candidates.end(), probe.distractors.begin(), probe.distractors.end());
  // The posteriors of the update step, over the unpruned tree set. The
  // snapshot itself is left untouched.
  TrainConfig exact = cfg;
  exact.prune_nats = kNoPruning;
  ForestAnalysis an = analyze_example(snapshot, probe.tokens, candidates, exact);
  if (an.empty()) return r;
  const ParseForest& forest = *an.forest;
  for (std::size_t id = 0; id < forest.size(); ++id) {
    const auto& node = forest.node(static_cast<int>(id));
    if (node.i != k || node.j != k + 1 || node.cat != probe.target_category) continue;
    for (std::size_t a = 0; a < node.alts.size(); ++a) {
      if (node.alts[a].rule != Rule::Lex) continue;
      const double p = an.alt_posterior[id][a];
      r.category_mass += p;
      if (lf_equivalent(node.lf, probe.target_lf)) r.target_mass += p;
    }
  }
  r.fraction = r.category_mass > 0.0 ? r.target_mass / r.category_mass : 0.0;
  return r;
}

NonceProbe dax_transitive_probe() {
  NonceProbe p{tokenize("jacob daxed jacky"),
               {parse_lf("(v|dax n:prop|jacky n:prop|jacob)"), parse_lf("(v|dax n:prop|jacob n:prop|jacky)")},
               "daxed",
               parse_lf("lam x.lam y.(v|dax x y)"),
               parse_category("(S\\NP)/NP"),
               {}};
  return p;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void emit_curves(const std::vector<CurvePoint>& points, const std::filesystem::path& path, bool append) {
  std::vector<CurvePoint> sorted = points;
  std::stable_sort(sorted.begin(), sorted.end(), [](const CurvePoint& a, const CurvePoint& b) {
    return std::tie(a.example_index, a.metric) < std::tie(b.example_index, b.metric);
  });
  std::error_code ec;
  const bool has_header = append && std::filesystem::exists(path, ec) && std::filesystem::file_size(path, ec) > 0;
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write curves to " + path.string());
  if (!has_header) out << "example_index,metric,value\n";
  for (const auto& p : sorted) out << p.example_index << ',' << p.metric << ',' << format_number(p.value) << '\n';
  if (!out) throw std::runtime_error("cannot write curves to " + path.string());
}

std::string format_report(const std::map<std::string, std::string>& entries) {
  std::string out;
  for (const auto& [k, v] : entries) out += k + ": " + v + "\n";
  return out;
}

}  // namespace semboot
