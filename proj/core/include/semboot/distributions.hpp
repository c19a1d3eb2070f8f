#pragma once

#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

namespace semboot {

// Unnormalized base measures. Outcomes are the canonical string keys used by
// the model: category renderings, p_t outcomes ("leaf", "L R rule", "T NP"),
// rendered LFs or shells, and space-joined word strings.
enum class BaseKind { CategoryGeometric, LfGeometric, WordGeometric };

std::string_view base_kind_name(BaseKind k);
BaseKind parse_base_kind(std::string_view name);

inline constexpr double kCategoryBase = 0.9;
inline constexpr double kLfBase = 0.25;
inline constexpr double kWordBase = 0.72;

// Number of atomic categories mentioned in a category key or p_t outcome key.
int count_category_atoms(std::string_view key);
// Variables plus constants in a rendered LF or shell.
int count_lf_symbols(std::string_view rendered);
// Letters in a word string, spaces excluded.
int count_word_letters(std::string_view words);

// H(outcome | context). The context only matters for the p_t "leaf" outcome,
// whose base is taken from the atoms of the conditioning category.
double base_score(BaseKind kind, std::string_view outcome, std::string_view context = {});

class DirichletProcess {
 public:
  using OutcomeMap = std::map<std::string, double, std::less<>>;
  struct Context {
    double total = 0.0;
    OutcomeMap outcomes;
  };
  using ContextMap = std::map<std::string, Context, std::less<>>;

  DirichletProcess() = default;
  DirichletProcess(BaseKind base, double alpha);

  BaseKind base_kind() const { return base_; }
  double alpha() const { return alpha_; }
  void set_alpha(double alpha);

  double base(std::string_view context, std::string_view outcome) const {
    return base_score(base_, outcome, context);
  }
  // (n(c,o) + alpha * H(o|c)) / (n(c) + alpha)
  double posterior(std::string_view context, std::string_view outcome) const;
  // Same, with a caller-supplied base value.
  double posterior_with_base(std::string_view context, std::string_view outcome, double h) const;
  double log_posterior(std::string_view context, std::string_view outcome) const;
  // Context lookup for callers that query one context many times; null when unseen.
  const Context* find_context(std::string_view context) const;
  // posterior_with_base against a context found earlier (null means unseen).
  double posterior_in(const Context* ctx, std::string_view outcome, double h) const;

  // Adds `weight` to n(c,o) and n(c). Negative weights throw.
  void observe(std::string_view context, std::string_view outcome, double weight);

  double count(std::string_view context, std::string_view outcome) const;
  double total(std::string_view context) const;
  double grand_total() const { return grand_total_; }
  bool empty() const { return grand_total_ <= 0.0; }

  // Sum over contexts of posterior(o|c) * n(c), divided by the sum of n(c).
  // Throws std::logic_error when nothing has been observed.
  double marginal(std::string_view outcome) const;

  const ContextMap& contexts() const { return contexts_; }
  // Contexts in which `outcome` has a positive count.
  const std::set<std::string>* contexts_with(std::string_view outcome) const;

  // Restores a context exactly as serialized.
  void restore_context(std::string context, double total, OutcomeMap outcomes);

 private:
  BaseKind base_ = BaseKind::CategoryGeometric;
  double alpha_ = 1.0;
  double grand_total_ = 0.0;
  ContextMap contexts_;
  std::map<std::string, std::set<std::string>, std::less<>> by_outcome_;
};

}  // namespace semboot
