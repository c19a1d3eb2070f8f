#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "semboot/logical_form.hpp"

namespace semboot {

enum class Atom : std::uint8_t { S, Sq, Swhq, N, NP, VP };
enum class Slash : std::uint8_t { Fwd, Bwd };

std::string_view atom_name(Atom a);

class CategoryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kMaxCategoryDepth = 4;
inline constexpr int kMaxCategoryOrder = 2;

class Category {
 public:
  static Category atom(Atom a);
  static Category functor(Category result, Slash slash, Category argument);
  static Category fwd(Category result, Category argument) { return functor(std::move(result), Slash::Fwd, std::move(argument)); }
  static Category bwd(Category result, Category argument) { return functor(std::move(result), Slash::Bwd, std::move(argument)); }

  bool is_atom() const;
  bool is_functor() const { return !is_atom(); }
  Atom atom_kind() const;
  Slash slash() const;
  const Category& result() const;
  const Category& argument() const;
  bool is_fwd() const { return is_functor() && slash() == Slash::Fwd; }
  bool is_bwd() const { return is_functor() && slash() == Slash::Bwd; }

  // Slash nesting: 0 for atoms, 1 + max over both sides for functors.
  int depth() const;
  // 0 for atoms; a functor's order is max(order(result), order(argument) + 1).
  int order() const;
  int atom_count() const;
  bool within_bounds() const { return depth() <= kMaxCategoryDepth && order() <= kMaxCategoryOrder; }

  const std::string& str() const;

  bool operator==(const Category& o) const { return node_ == o.node_ || str() == o.str(); }
  bool operator!=(const Category& o) const { return !(*this == o); }
  bool operator<(const Category& o) const { return str() < o.str(); }

 private:
  struct Node;
  explicit Category(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

Category parse_category(std::string_view text);

enum class Rule : std::uint8_t { FwdApp, BwdApp, FwdComp, Lex, TypeRaise };

std::string_view rule_label(Rule r);
Rule parse_rule_label(std::string_view text);

SemType sem_type_of_category(const Category& c);
bool congruent(const Category& c, const Term& t);

struct Combination {
  Category category;
  Term lf;
  Rule rule;
};

// Category-level result of one binary rule, if it applies.
std::optional<Category> combine_categories(const Category& left, const Category& right, Rule rule);
// Semantic side of one binary rule, in beta-eta normal form.
Term combine_lfs(const Term& left, const Term& right, Rule rule);

std::vector<Combination> combine(const Category& left_cat, const Term& left_lf, const Category& right_cat,
                                 const Term& right_lf);

// NP raised to X/(X\NP) or X\(X/NP), X in {S, Sq}.
std::pair<Category, Term> type_raise(const Category& cat, const Term& lf, const Category& target);
// The raise targets the derivation engine and chart parser use.
const std::vector<Category>& raise_targets();
bool is_raise_target(const Category& c);
Term raised_lf(const Term& lf);

struct ChildPair {
  Category left;
  Category right;
  Rule rule;
};

// All categories with depth <= max_depth and order <= kMaxCategoryOrder, ordered
// by depth and then by rendering.
const std::vector<Category>& bounded_categories(int max_depth);

// Every (left, right, rule) whose combination yields `parent`, with both
// children inside the category bounds. Argument categories are drawn from the
// depth-2 space.
std::vector<ChildPair> enumerate_child_categories(const Category& parent);

}  // namespace semboot
