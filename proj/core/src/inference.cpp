#include "semboot/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace semboot {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool is_root_atom(const Category& c) {
  if (!c.is_atom()) return false;
  switch (c.atom_kind()) {
    case Atom::S:
    case Atom::Sq:
    case Atom::Swhq:
    case Atom::NP: return true;
    default: return false;
  }
}

std::string join(const std::vector<std::string>& tokens, int i, int j) {
  std::string out;
  for (int k = i; k < j; ++k) {
    if (k > i) out += ' ';
    out += tokens[k];
  }
  return out;
}

}  // namespace

Parser::Parser(const Model& model, ParseConfig cfg) : model_(model), cfg_(cfg) {
  double grand = model_.p_h.grand_total();
  for (const auto& [ctx, c] : model_.p_h.contexts()) {
    try {
      Category cat = parse_category(ctx);
      categories_.push_back(cat);
      category_types_.push_back(sem_type_of_category(cat));
      category_prior_.push_back(grand > 0.0 ? c.total / grand : 0.0);
    } catch (const CategoryError&) {
    }
  }
  for (const auto& [ctx, c] : model_.p_l.contexts()) {
    shell_norm_ += c.total / (c.total + model_.p_l.alpha());
    shell_total_ += c.total;
  }
}

double Parser::category_marginal(const std::string& cat) const {
  for (std::size_t k = 0; k < categories_.size(); ++k) {
    if (categories_[k].str() == cat) return category_prior_[k];
  }
  return 0.0;
}

double Parser::lf_marginal(const std::string& lf_text) {
  if (shell_total_ <= 0.0) return 0.0;
  double num = model_.p_l.alpha() * base_score(BaseKind::LfGeometric, lf_text) * shell_norm_;
  if (const auto* shells = model_.p_l.contexts_with(lf_text)) {
    for (const auto& sh : *shells) {
      double n_sh = model_.p_l.total(sh);
      num += model_.p_l.count(sh, lf_text) * n_sh / (n_sh + model_.p_l.alpha());
    }
  }
  return num / shell_total_;
}

const Parser::LfInfo* Parser::lf_info(const std::string& lf_text) {
  auto it = lf_cache_.find(lf_text);
  if (it != lf_cache_.end()) return it->second ? &*it->second : nullptr;
  std::optional<LfInfo> info;
  try {
    Term lexical = parse_lf(lf_text);
    LfInfo li{normalize_lf(lexical), {}, {}, 0.0};
    li.shell = render_lf(shellify(lexical).term);
    // A key belongs to the categories whose type expands the LF to exactly this text.
    std::map<std::string, bool> by_type;
    for (std::size_t k = 0; k < categories_.size(); ++k) {
      const SemType& type = category_types_[k];
      const std::string ty = type.str();
      auto bt = by_type.find(ty);
      if (bt == by_type.end()) {
        bool ok = has_type(li.lf, type) && render_lf(eta_expand(li.lf, type)) == lf_text;
        bt = by_type.emplace(ty, ok).first;
      }
      if (bt->second) li.categories.push_back(k);
    }
    li.marginal = lf_marginal(lf_text);
    info = std::move(li);
  } catch (const std::exception&) {
  }
  auto& slot = lf_cache_[lf_text];
  slot = std::move(info);
  return slot ? &*slot : nullptr;
}

std::vector<LeafCandidate> Parser::search_leaf_span(const std::string& span_text) {
  auto cached = span_cache_.find(span_text);
  if (cached != span_cache_.end()) return cached->second;

  std::vector<LeafCandidate> out;
  const auto* contexts = model_.p_w.contexts_with(span_text);
  if (contexts) {
    struct Scored {
      const std::string* lf_text;
      const LfInfo* info;
      double log_p;
    };
    std::vector<Scored> stage1;
    for (const auto& v : *contexts) {
      const LfInfo* info = lf_info(v);
      if (!info || info->marginal <= 0.0) continue;
      double lp = std::log(model_.p_w.posterior(v, span_text)) + std::log(info->marginal);
      stage1.push_back(Scored{&v, info, lp});
    }
    std::sort(stage1.begin(), stage1.end(), [](const Scored& a, const Scored& b) {
      if (a.log_p != b.log_p) return a.log_p > b.log_p;
      return *a.lf_text < *b.lf_text;
    });
    if (stage1.size() > cfg_.leaf_beam) stage1.resize(cfg_.leaf_beam);

    for (const auto& s : stage1) {
      double log_pw = std::log(model_.p_w.posterior(*s.lf_text, span_text));
      double log_pl = std::log(model_.p_l.posterior(s.info->shell, *s.lf_text));
      for (std::size_t k : s.info->categories) {
        const std::string& cat = categories_[k].str();
        double log_ph = std::log(model_.p_h.posterior(cat, s.info->shell));
        double log_leaf = std::log(model_.p_t.posterior(cat, kLeafOutcome));
        double score = s.log_p + log_ph + log_pl + log_leaf + std::log(category_prior_[k]) - std::log(s.info->marginal);
        out.push_back(LeafCandidate{0, 0, categories_[k], s.info->lf, score, log_leaf + log_ph + log_pl + log_pw});
      }
    }
    std::sort(out.begin(), out.end(), [](const LeafCandidate& a, const LeafCandidate& b) {
      if (a.log_score != b.log_score) return a.log_score > b.log_score;
      if (a.category != b.category) return a.category < b.category;
      return a.lf.key() < b.lf.key();
    });
    if (out.size() > cfg_.leaf_beam) out.erase(out.begin() + static_cast<std::ptrdiff_t>(cfg_.leaf_beam), out.end());
  }
  span_cache_.emplace(span_text, out);
  return out;
}

std::optional<ParseResult> Parser::parse(const std::vector<std::string>& tokens) {
  const int n = static_cast<int>(tokens.size());
  if (n == 0) return std::nullopt;

  struct Item {
    Category cat;
    Term lf;
    double score;
    DerivationTree tree;
  };
  std::vector<std::vector<std::vector<Item>>> chart(n, std::vector<std::vector<Item>>(n + 1));

  std::map<std::string, double> split_cache;
  auto log_pt = [&](const Category& parent, const std::string& outcome) {
    std::string key = parent.str() + "\n" + outcome;
    auto it = split_cache.find(key);
    if (it != split_cache.end()) return it->second;
    double v = std::log(model_.p_t.posterior(parent.str(), outcome));
    split_cache.emplace(key, v);
    return v;
  };

  auto prune = [&](std::vector<Item>& items) {
    std::map<std::string, std::size_t> best;
    std::vector<Item> uniq;
    for (auto& it : items) {
      std::string key = it.cat.str() + "\t" + it.lf.key();
      auto f = best.find(key);
      if (f == best.end()) {
        best.emplace(std::move(key), uniq.size());
        uniq.push_back(std::move(it));
      } else if (it.score > uniq[f->second].score) {
        uniq[f->second] = std::move(it);
      }
    }
    std::sort(uniq.begin(), uniq.end(), [](const Item& a, const Item& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.cat != b.cat) return a.cat < b.cat;
      return a.lf.key() < b.lf.key();
    });
    if (!uniq.empty()) {
      double floor = uniq.front().score - cfg_.floor_nats;
      uniq.erase(std::remove_if(uniq.begin(), uniq.end(), [&](const Item& x) { return x.score < floor; }),
                 uniq.end());
    }
    if (uniq.size() > cfg_.beam) uniq.erase(uniq.begin() + static_cast<std::ptrdiff_t>(cfg_.beam), uniq.end());
    items = std::move(uniq);
  };

  const Category np = Category::atom(Atom::NP);
  for (int len = 1; len <= n; ++len) {
    for (int i = 0; i + len <= n; ++i) {
      int j = i + len;
      std::vector<Item> items;
      if (len <= cfg_.max_leaf_span) {
        std::string text = join(tokens, i, j);
        for (auto& c : search_leaf_span(text)) {
          items.push_back(Item{c.category, c.lf, c.log_leaf, make_leaf(c.category, c.lf, i, j, text)});
        }
      }
      for (int k = i + 1; k < j; ++k) {
        for (const auto& l : chart[i][k]) {
          for (const auto& r : chart[k][j]) {
            for (Rule rule : {Rule::FwdApp, Rule::BwdApp, Rule::FwdComp}) {
              auto cat = combine_categories(l.cat, r.cat, rule);
              if (!cat || !cat->within_bounds()) continue;
              Term lf = combine_lfs(l.lf, r.lf, rule);
              double s = l.score + r.score + log_pt(*cat, split_outcome(l.cat, r.cat, rule));
              items.push_back(Item{*cat, lf, s, nullptr});
              items.back().tree = make_binary(*cat, lf, rule, l.tree, r.tree);
            }
          }
        }
      }
      std::vector<Item> raised;
      for (const auto& it : items) {
        if (it.cat != np) continue;
        for (const auto& target : raise_targets()) {
          auto tree = make_raise(target, it.tree);
          raised.push_back(Item{target, tree->lf, it.score + log_pt(target, raise_outcome(np)), tree});
        }
      }
      items.insert(items.end(), std::make_move_iterator(raised.begin()), std::make_move_iterator(raised.end()));
      prune(items);
      chart[i][j] = std::move(items);
    }
  }

  std::optional<ParseResult> best;
  for (const auto& it : chart[0][n]) {
    if (!is_root_atom(it.cat)) continue;
    double s = it.score + std::log(model_.p_r.posterior("", it.cat.str()));
    bool better = !best || s > best->log_score ||
                  (s == best->log_score && (it.cat.str() + it.lf.key()) < (best->tree->category.str() + best->lf.key()));
    if (better) best = ParseResult{it.tree, it.lf, s};
  }
  return best;
}

std::vector<LeafCandidate> search_leaf_span(const std::string& span_text, const Model& model) {
  Parser p(model);
  return p.search_leaf_span(span_text);
}

std::optional<ParseResult> parse_utterance(const std::vector<std::string>& tokens, const Model& model,
                                           std::size_t beam_k, int max_leaf_span) {
  ParseConfig cfg;
  cfg.beam = beam_k;
  cfg.max_leaf_span = max_leaf_span;
  Parser p(model, cfg);
  return p.parse(tokens);
}

double log_score_pair(const std::vector<std::string>& tokens, const Term& lf, const Model& model,
                      const TrainConfig& cfg) {
  TrainConfig exact = cfg;
  exact.prune_nats = kNoPruning;
  ForestAnalysis an = analyze_example(model, tokens, {lf}, exact);
  if (an.empty()) return kNegInf;
  return an.log_z;
}

double score_pair(const std::vector<std::string>& tokens, const Term& lf, const Model& model,
                  const TrainConfig& cfg) {
  return std::exp(log_score_pair(tokens, lf, model, cfg));
}

}  // namespace semboot
