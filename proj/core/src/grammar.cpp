#include "semboot/grammar.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <mutex>

namespace semboot {

namespace {

constexpr std::array<Atom, 6> kAtoms = {Atom::S, Atom::Sq, Atom::Swhq, Atom::N, Atom::NP, Atom::VP};

}  // namespace

std::string_view atom_name(Atom a) {
  switch (a) {
    case Atom::S: return "S";
    case Atom::Sq: return "Sq";
    case Atom::Swhq: return "Swhq";
    case Atom::N: return "N";
    case Atom::NP: return "NP";
    case Atom::VP: return "VP";
  }
  return "?";
}

struct Category::Node {
  bool atomic = true;
  Atom atom = Atom::S;
  Slash slash = Slash::Fwd;
  std::optional<Category> result;
  std::optional<Category> argument;
  int depth = 0;
  int order = 0;
  int atoms = 1;
  std::string text;
};

Category Category::atom(Atom a) {
  static const std::array<Category, 6> cache = [] {
    auto make = [](Atom x) {
      auto n = std::make_shared<Node>();
      n->atom = x;
      n->text = std::string(atom_name(x));
      return Category(std::move(n));
    };
    return std::array<Category, 6>{make(Atom::S), make(Atom::Sq), make(Atom::Swhq),
                                   make(Atom::N), make(Atom::NP), make(Atom::VP)};
  }();
  return cache[static_cast<std::size_t>(a)];
}

Category Category::functor(Category result, Slash slash, Category argument) {
  auto n = std::make_shared<Node>();
  n->atomic = false;
  n->slash = slash;
  n->depth = 1 + std::max(result.depth(), argument.depth());
  n->order = std::max(result.order(), argument.order() + 1);
  n->atoms = result.atom_count() + argument.atom_count();
  n->text = result.str();
  n->text += slash == Slash::Fwd ? '/' : '\\';
  if (argument.is_functor()) {
    n->text += '(';
    n->text += argument.str();
    n->text += ')';
  } else {
    n->text += argument.str();
  }
  n->result = std::move(result);
  n->argument = std::move(argument);
  return Category(std::move(n));
}

bool Category::is_atom() const { return node_->atomic; }
Atom Category::atom_kind() const {
  if (!node_->atomic) throw CategoryError("atom_kind on functor category " + str());
  return node_->atom;
}
Slash Category::slash() const { return node_->slash; }
const Category& Category::result() const {
  if (node_->atomic) throw CategoryError("result of atomic category " + str());
  return *node_->result;
}
const Category& Category::argument() const {
  if (node_->atomic) throw CategoryError("argument of atomic category " + str());
  return *node_->argument;
}
int Category::depth() const { return node_->depth; }
int Category::order() const { return node_->order; }
int Category::atom_count() const { return node_->atoms; }
const std::string& Category::str() const { return node_->text; }

// ---------------------------------------------------------------------------

namespace {

class CategoryParser {
 public:
  explicit CategoryParser(std::string_view text) : text_(text) {}

  Category parse() {
    Category c = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) throw CategoryError("trailing input in category '" + std::string(text_) + "'");
    return c;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  Category parse_expr() {
    Category left = parse_primary();
    while (true) {
      skip_ws();
      if (pos_ >= text_.size()) break;
      char c = text_[pos_];
      if (c != '/' && c != '\\') break;
      ++pos_;
      Category right = parse_primary();
      left = Category::functor(std::move(left), c == '/' ? Slash::Fwd : Slash::Bwd, std::move(right));
    }
    return left;
  }

  Category parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw CategoryError("unexpected end of category '" + std::string(text_) + "'");
    if (text_[pos_] == '(') {
      ++pos_;
      Category inner = parse_expr();
      skip_ws();
      if (pos_ >= text_.size() || text_[pos_] != ')')
        throw CategoryError("unbalanced parentheses in category '" + std::string(text_) + "'");
      ++pos_;
      return inner;
    }
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    std::string_view name = text_.substr(start, pos_ - start);
    for (Atom a : kAtoms) {
      if (atom_name(a) == name) return Category::atom(a);
    }
    if (name.empty()) throw CategoryError("syntax error in category '" + std::string(text_) + "'");
    throw CategoryError("unknown atomic category '" + std::string(name) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Category parse_category(std::string_view text) { return CategoryParser(text).parse(); }

std::string_view rule_label(Rule r) {
  switch (r) {
    case Rule::FwdApp: return ">";
    case Rule::BwdApp: return "<";
    case Rule::FwdComp: return ">B";
    case Rule::Lex: return "lex";
    case Rule::TypeRaise: return "T";
  }
  return "?";
}

Rule parse_rule_label(std::string_view text) {
  if (text == ">") return Rule::FwdApp;
  if (text == "<") return Rule::BwdApp;
  if (text == ">B") return Rule::FwdComp;
  if (text == "lex") return Rule::Lex;
  if (text == "T") return Rule::TypeRaise;
  throw CategoryError("unknown rule label '" + std::string(text) + "'");
}

SemType sem_type_of_category(const Category& c) {
  if (c.is_functor()) return SemType::fn(sem_type_of_category(c.argument()), sem_type_of_category(c.result()));
  switch (c.atom_kind()) {
    case Atom::S:
    case Atom::Sq:
    case Atom::Swhq: return SemType::t();
    case Atom::NP: return SemType::e();
    case Atom::N:
    case Atom::VP: return SemType::fn(SemType::e(), SemType::t());
  }
  return SemType::t();
}

bool congruent(const Category& c, const Term& t) { return has_type(t, sem_type_of_category(c)); }

// ---------------------------------------------------------------------------

std::optional<Category> combine_categories(const Category& left, const Category& right, Rule rule) {
  switch (rule) {
    case Rule::FwdApp:
      if (left.is_fwd() && left.argument() == right) return left.result();
      return std::nullopt;
    case Rule::BwdApp:
      if (right.is_bwd() && right.argument() == left) return right.result();
      return std::nullopt;
    case Rule::FwdComp:
      if (left.is_fwd() && right.is_fwd() && left.argument() == right.result())
        return Category::fwd(left.result(), right.argument());
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

Term combine_lfs(const Term& left, const Term& right, Rule rule) {
  switch (rule) {
    case Rule::FwdApp: return normalize_lf(Term::app(left, right));
    case Rule::BwdApp: return normalize_lf(Term::app(right, left));
    case Rule::FwdComp:
      return normalize_lf(Term::lam(Term::app(shift(left, 1), Term::app(shift(right, 1), Term::var(0)))));
    default: throw CategoryError("combine_lfs called with a non-binary rule");
  }
}

std::vector<Combination> combine(const Category& left_cat, const Term& left_lf, const Category& right_cat,
                                 const Term& right_lf) {
  std::vector<Combination> out;
  for (Rule rule : {Rule::FwdApp, Rule::BwdApp, Rule::FwdComp}) {
    if (auto cat = combine_categories(left_cat, right_cat, rule)) {
      out.push_back(Combination{*cat, combine_lfs(left_lf, right_lf, rule), rule});
    }
  }
  return out;
}

Term raised_lf(const Term& lf) { return Term::lam(Term::app(Term::var(0), shift(lf, 1))); }

std::pair<Category, Term> type_raise(const Category& cat, const Term& lf, const Category& target) {
  const Category np = Category::atom(Atom::NP);
  if (cat != np) throw CategoryError("only NP can be type-raised, got " + cat.str());
  bool ok = false;
  if (target.is_functor() && target.result().is_atom() && target.argument().is_functor()) {
    const Category& x = target.result();
    const Category& inner = target.argument();
    bool clause = x.atom_kind() == Atom::S || x.atom_kind() == Atom::Sq;
    bool mirrored = inner.result() == x && inner.argument() == np && inner.slash() != target.slash();
    ok = clause && mirrored;
  }
  if (!ok) throw CategoryError("malformed raise target " + target.str());
  return {target, raised_lf(lf)};
}

const std::vector<Category>& raise_targets() {
  static const std::vector<Category> targets = {
      parse_category("S/(S\\NP)"),
      parse_category("Sq/(Sq\\NP)"),
      parse_category("S\\(S/NP)"),
  };
  return targets;
}

bool is_raise_target(const Category& c) {
  const auto& ts = raise_targets();
  return std::find(ts.begin(), ts.end(), c) != ts.end();
}

// ---------------------------------------------------------------------------

const std::vector<Category>& bounded_categories(int max_depth) {
  static std::mutex mu;
  static std::map<int, std::vector<Category>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(max_depth);
  if (it != cache.end()) return it->second;

  std::vector<std::vector<Category>> by_depth(static_cast<std::size_t>(std::max(0, max_depth)) + 1);
  for (Atom a : kAtoms) by_depth[0].push_back(Category::atom(a));
  for (int d = 1; d <= max_depth; ++d) {
    // functors of exactly depth d: at least one side has depth d-1
    for (int dl = 0; dl < d; ++dl) {
      for (int dr = 0; dr < d; ++dr) {
        if (dl != d - 1 && dr != d - 1) continue;
        for (const auto& l : by_depth[dl]) {
          for (const auto& r : by_depth[dr]) {
            for (Slash s : {Slash::Fwd, Slash::Bwd}) {
              Category c = Category::functor(l, s, r);
              if (c.order() <= kMaxCategoryOrder) by_depth[d].push_back(std::move(c));
            }
          }
        }
      }
    }
    std::sort(by_depth[d].begin(), by_depth[d].end());
  }
  std::vector<Category> all;
  for (auto& v : by_depth) all.insert(all.end(), v.begin(), v.end());
  return cache.emplace(max_depth, std::move(all)).first->second;
}

std::vector<ChildPair> enumerate_child_categories(const Category& parent) {
  std::vector<ChildPair> out;
  const auto& space = bounded_categories(2);
  for (const auto& y : space) {
    Category left = Category::fwd(parent, y);
    if (left.within_bounds()) out.push_back(ChildPair{left, y, Rule::FwdApp});
  }
  for (const auto& y : space) {
    Category right = Category::bwd(parent, y);
    if (right.within_bounds()) out.push_back(ChildPair{y, right, Rule::BwdApp});
  }
  if (parent.is_fwd()) {
    for (const auto& y : space) {
      Category left = Category::fwd(parent.result(), y);
      Category right = Category::fwd(y, parent.argument());
      if (left.within_bounds() && right.within_bounds()) out.push_back(ChildPair{left, right, Rule::FwdComp});
    }
  }
  return out;
}

}  // namespace semboot
