#include "semboot/distributions.hpp"

#include <cctype>
#include <cmath>

namespace semboot {

std::string_view base_kind_name(BaseKind k) {
  switch (k) {
    case BaseKind::CategoryGeometric: return "category";
    case BaseKind::LfGeometric: return "lf";
    case BaseKind::WordGeometric: return "word";
  }
  return "?";
}

BaseKind parse_base_kind(std::string_view name) {
  if (name == "category") return BaseKind::CategoryGeometric;
  if (name == "lf") return BaseKind::LfGeometric;
  if (name == "word") return BaseKind::WordGeometric;
  throw std::invalid_argument("unknown base distribution kind '" + std::string(name) + "'");
}

namespace {

bool is_rule_token(std::string_view tok) {
  return tok == ">" || tok == "<" || tok == ">B" || tok == "T" || tok == "lex";
}

int atoms_in_token(std::string_view tok) {
  int n = 0;
  bool in_word = false;
  for (char c : tok) {
    bool alpha = std::isalpha(static_cast<unsigned char>(c)) != 0;
    if (alpha && !in_word) ++n;
    in_word = alpha;
  }
  return n;
}

}  // namespace

int count_category_atoms(std::string_view key) {
  int n = 0;
  std::size_t pos = 0;
  while (pos < key.size()) {
    while (pos < key.size() && key[pos] == ' ') ++pos;
    std::size_t start = pos;
    while (pos < key.size() && key[pos] != ' ') ++pos;
    std::string_view tok = key.substr(start, pos - start);
    if (tok.empty() || is_rule_token(tok) || tok == "leaf") continue;
    n += atoms_in_token(tok);
  }
  return n;
}

int count_lf_symbols(std::string_view rendered) {
  int n = 0;
  std::size_t pos = 0;
  auto boundary = [](char c) { return std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')'; };
  while (pos < rendered.size()) {
    while (pos < rendered.size() && boundary(rendered[pos])) ++pos;
    std::size_t start = pos;
    while (pos < rendered.size() && !boundary(rendered[pos])) ++pos;
    std::string_view tok = rendered.substr(start, pos - start);
    if (tok.empty() || tok == "lam") continue;
    if (tok.back() == '.') continue;  // binder "x0."
    ++n;
  }
  return n;
}

int count_word_letters(std::string_view words) {
  int n = 0;
  for (char c : words) {
    if (!std::isspace(static_cast<unsigned char>(c))) ++n;
  }
  return n;
}

double base_score(BaseKind kind, std::string_view outcome, std::string_view context) {
  switch (kind) {
    case BaseKind::CategoryGeometric: {
      int atoms = outcome == "leaf" ? count_category_atoms(context) : count_category_atoms(outcome);
      if (atoms <= 0) throw std::invalid_argument("malformed category outcome '" + std::string(outcome) + "'");
      return std::pow(kCategoryBase, atoms);
    }
    case BaseKind::LfGeometric: {
      int n = count_lf_symbols(outcome);
      if (n <= 0) throw std::invalid_argument("malformed LF outcome '" + std::string(outcome) + "'");
      return std::pow(kLfBase, n);
    }
    case BaseKind::WordGeometric: {
      int n = count_word_letters(outcome);
      if (n <= 0) throw std::invalid_argument("empty word outcome");
      return std::pow(kWordBase, n);
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------

DirichletProcess::DirichletProcess(BaseKind base, double alpha) : base_(base) { set_alpha(alpha); }

void DirichletProcess::set_alpha(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("concentration must be positive");
  alpha_ = alpha;
}

const DirichletProcess::Context* DirichletProcess::find_context(std::string_view context) const {
  auto it = contexts_.find(context);
  return it == contexts_.end() ? nullptr : &it->second;
}

double DirichletProcess::posterior_in(const Context* ctx, std::string_view outcome, double h) const {
  if (!ctx) return h;
  double n = 0.0;
  auto jt = ctx->outcomes.find(outcome);
  if (jt != ctx->outcomes.end()) n = jt->second;
  return (n + alpha_ * h) / (ctx->total + alpha_);
}

double DirichletProcess::posterior_with_base(std::string_view context, std::string_view outcome, double h) const {
  return posterior_in(find_context(context), outcome, h);
}

double DirichletProcess::posterior(std::string_view context, std::string_view outcome) const {
  return posterior_with_base(context, outcome, base(context, outcome));
}

double DirichletProcess::log_posterior(std::string_view context, std::string_view outcome) const {
  return std::log(posterior(context, outcome));
}

void DirichletProcess::observe(std::string_view context, std::string_view outcome, double weight) {
  if (weight < 0.0 || std::isnan(weight)) throw std::invalid_argument("observation weight must be nonnegative");
  if (weight == 0.0) return;
  auto it = contexts_.find(context);
  if (it == contexts_.end()) it = contexts_.emplace(std::string(context), Context{}).first;
  auto jt = it->second.outcomes.find(outcome);
  if (jt == it->second.outcomes.end()) {
    jt = it->second.outcomes.emplace(std::string(outcome), 0.0).first;
    auto ot = by_outcome_.find(outcome);
    if (ot == by_outcome_.end()) ot = by_outcome_.emplace(std::string(outcome), std::set<std::string>{}).first;
    ot->second.insert(it->first);
  }
  jt->second += weight;
  it->second.total += weight;
  grand_total_ += weight;
}

double DirichletProcess::count(std::string_view context, std::string_view outcome) const {
  auto it = contexts_.find(context);
  if (it == contexts_.end()) return 0.0;
  auto jt = it->second.outcomes.find(outcome);
  return jt == it->second.outcomes.end() ? 0.0 : jt->second;
}

double DirichletProcess::total(std::string_view context) const {
  auto it = contexts_.find(context);
  return it == contexts_.end() ? 0.0 : it->second.total;
}

double DirichletProcess::marginal(std::string_view outcome) const {
  if (empty()) throw std::logic_error("marginal of a distribution with no observations");
  double num = 0.0;
  double den = 0.0;
  for (const auto& [ctx, c] : contexts_) {
    if (c.total <= 0.0) continue;
    auto jt = c.outcomes.find(outcome);
    double n = jt == c.outcomes.end() ? 0.0 : jt->second;
    double p = (n + alpha_ * base(ctx, outcome)) / (c.total + alpha_);
    num += p * c.total;
    den += c.total;
  }
  return num / den;
}

const std::set<std::string>* DirichletProcess::contexts_with(std::string_view outcome) const {
  auto it = by_outcome_.find(outcome);
  return it == by_outcome_.end() ? nullptr : &it->second;
}

void DirichletProcess::restore_context(std::string context, double total, OutcomeMap outcomes) {
  for (const auto& [o, n] : outcomes) {
    if (n < 0.0) throw std::invalid_argument("negative count in restored distribution");
    if (n > 0.0) by_outcome_[o].insert(context);
  }
  grand_total_ += total;
  contexts_[std::move(context)] = Context{total, std::move(outcomes)};
}

}  // namespace semboot
