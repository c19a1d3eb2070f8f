#pragma once

// Reference derivation enumerator for small inputs. It expands every
// (category, LF, span) top-down straight from the combinator definitions,
// with no memo table, no interning, no split cache and no tree cap, and it
// checks that every split it proposes recombines to its parent.

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "semboot/derivation.hpp"
#include "semboot/grammar.hpp"
#include "semboot/logical_form.hpp"

namespace semboot::oracle {

struct Bounds {
  int max_leaf_span = 4;
  int max_lambda_depth = 4;
};

struct LfSplit {
  Term functor;   // f in (f a) or in lam z. f (g z)
  Term argument;  // a or g
  SemType arg_type;  // type of a, or the middle type of a composition
  bool raise_only = false;
};

namespace detail {

inline Term put_at(const Term& t, const TermPath& path, std::size_t pos, const Term& repl) {
  if (pos == path.size()) return repl;
  if (path[pos] == 0) return Term::app(put_at(t.function(), path, pos + 1, repl), t.argument());
  if (path[pos] == 1) return Term::app(t.function(), put_at(t.argument(), path, pos + 1, repl));
  return Term::lam(put_at(t.body(), path, pos + 1, repl));
}

inline int occurrences_of(const Term& t, int index) {
  switch (t.kind()) {
    case Term::Kind::Var: return t.index() == index ? 1 : 0;
    case Term::Kind::Const: return 0;
    case Term::Kind::App: return occurrences_of(t.function(), index) + occurrences_of(t.argument(), index);
    case Term::Kind::Lam: return occurrences_of(t.body(), index + 1);
  }
  return 0;
}

inline void free_vars(const Term& t, int depth, std::set<int>& out) {
  switch (t.kind()) {
    case Term::Kind::Var:
      if (t.index() >= depth) out.insert(t.index() - depth);
      return;
    case Term::Kind::Const: return;
    case Term::Kind::App:
      free_vars(t.function(), depth, out);
      free_vars(t.argument(), depth, out);
      return;
    case Term::Kind::Lam: free_vars(t.body(), depth + 1, out); return;
  }
}

inline void all_paths(const Term& t, TermPath& path, std::vector<TermPath>& out) {
  out.push_back(path);
  if (t.is_app()) {
    path.push_back(0);
    all_paths(t.function(), path, out);
    path.back() = 1;
    all_paths(t.argument(), path, out);
    path.pop_back();
  } else if (t.is_lam()) {
    path.push_back(2);
    all_paths(t.body(), path, out);
    path.pop_back();
  }
}

// lam p.(p x) with x not mentioning p.
inline bool raised_shape(const Term& f) {
  return f.is_lam() && f.body().is_app() && f.body().function().is_var() && f.body().function().index() == 0 &&
         occurrences_of(f.body().argument(), 0) == 0;
}

inline bool entity_raise(const Term& f, const SemType& arg_type) {
  if (!raised_shape(f) || !arg_type.is_fn() || arg_type.argument() != SemType::e()) return false;
  const Term& x = f.body().argument();
  return !(x.is_const() && x.tag() == kWhTag);
}

inline Term raise_over(const Term& x) { return Term::lam(Term::app(Term::var(0), shift(x, 1))); }

inline void check_recombines(const Term& left, const Term& right, Rule rule, const Term& parent) {
  if (!lf_equivalent(combine_lfs(left, right, rule), parent)) {
    throw std::logic_error("oracle split does not recombine to " + render_lf(parent));
  }
}

}  // namespace detail

// Every (f, a) with f a == parent: abstract all occurrences of a closed
// subterm, or one occurrence of a repeated subterm, or raise an entity
// subterm over the rest.
inline std::vector<LfSplit> application_splits(const Term& parent, const SemType& ty, const Bounds& b) {
  std::vector<LfSplit> out;
  auto types = node_types(parent, ty);
  if (!types) return out;
  const Term reduced = eta_reduce(parent);
  for (const auto& group : enumerate_subterms(parent)) {
    const Term& x = group.subterm;
    if (x == parent || x == reduced) continue;
    const SemType x_type = (*types)[preorder_index(parent, group.occurrences.front())];
    std::vector<std::vector<TermPath>> choices{group.occurrences};
    if (group.occurrences.size() > 1) {
      for (const auto& p : group.occurrences) choices.push_back({p});
    }
    auto consider = [&](const Term& f, const Term& a, const SemType& arg_type) {
      if (lambda_depth(f) > b.max_lambda_depth || lambda_depth(a) > b.max_lambda_depth) return;
      if (!has_type(f, SemType::fn(arg_type, ty)) || !has_type(a, arg_type)) return;
      detail::check_recombines(f, a, Rule::FwdApp, parent);
      out.push_back({normalize_lf(f), normalize_lf(a), arg_type, detail::entity_raise(f, arg_type)});
    };
    std::optional<Term> abstract_all;
    for (const auto& occ : choices) {
      Term body = parent;
      for (const auto& p : occ) body = detail::put_at(body, p, 0, Term::var(binder_depth(parent, p)));
      Term f = Term::lam(body);
      if (!abstract_all) abstract_all = f;
      consider(f, x, (*types)[preorder_index(parent, occ.front())]);
    }
    if (x_type == SemType::e()) consider(detail::raise_over(x), *abstract_all, SemType::fn(SemType::e(), ty));
  }
  return out;
}

// Every (f, g) with lam z. f (g z) == parent, for a parent of function type.
inline std::vector<LfSplit> composition_splits(const Term& parent, const SemType& ty, const Bounds& b) {
  std::vector<LfSplit> out;
  if (!ty.is_fn()) return out;
  const Term lam_form = parent.is_lam() ? parent : Term::lam(Term::app(shift(parent, 1), Term::var(0)));
  auto types = node_types(lam_form, ty);
  if (!types) return out;
  auto consider = [&](const Term& f, const Term& g, const SemType& mid) {
    if (lambda_depth(f) > b.max_lambda_depth || lambda_depth(g) > b.max_lambda_depth) return;
    if (!has_type(f, SemType::fn(mid, ty.result())) || !has_type(g, SemType::fn(ty.argument(), mid))) return;
    detail::check_recombines(f, g, Rule::FwdComp, parent);
    out.push_back({normalize_lf(f), normalize_lf(g), mid, detail::entity_raise(f, mid)});
  };

  // g is a subterm of the body holding every occurrence of the bound variable.
  const Term& body = lam_form.body();
  const int z_total = detail::occurrences_of(body, 0);
  if (z_total > 0) {
    std::vector<TermPath> paths;
    TermPath scratch;
    detail::all_paths(body, scratch, paths);
    for (const auto& p : paths) {
      if (p.empty()) continue;
      const Term& t = subterm_at(body, p);
      if (t.is_var()) continue;
      const int d = binder_depth(body, p);
      std::set<int> fv;
      detail::free_vars(t, 0, fv);
      if (fv != std::set<int>{d} || detail::occurrences_of(t, d) != z_total) continue;
      TermPath full{2};
      full.insert(full.end(), p.begin(), p.end());
      const SemType mid = (*types)[preorder_index(lam_form, full)];
      int extra = 0;
      for (const SemType* s = &mid; s->is_fn(); s = &s->result()) ++extra;
      Term g_body = shift(shift(t, -d, 0), extra, 0);
      for (int k = extra - 1; k >= 0; --k) g_body = Term::app(g_body, Term::var(k));
      for (int k = 0; k < extra; ++k) g_body = Term::lam(g_body);
      const Term g = beta_reduce(Term::lam(g_body));
      const Term f = Term::lam(detail::put_at(body, p, 0, Term::var(d)));
      consider(f, g, mid);
    }
  }

  // f raises an entity subterm x of the body, g abstracts x after z.
  const Term reduced = eta_reduce(lam_form);
  for (const auto& group : enumerate_subterms(lam_form)) {
    const Term& x = group.subterm;
    if (x == lam_form || x == reduced) continue;
    if ((*types)[preorder_index(lam_form, group.occurrences.front())] != SemType::e()) continue;
    Term rest = lam_form;
    for (const auto& p : group.occurrences) rest = detail::put_at(rest, p, 0, Term::var(binder_depth(lam_form, p)));
    const Term a = Term::lam(rest);
    const Term g = beta_reduce(
        Term::lam(Term::lam(Term::app(Term::app(shift(a, 2), Term::var(0)), Term::var(1)))));
    consider(detail::raise_over(x), g, SemType::fn(SemType::e(), ty.result()));
  }
  return out;
}

class BruteForce {
 public:
  BruteForce(std::vector<std::string> tokens, Bounds bounds) : tokens_(std::move(tokens)), bounds_(bounds) {}

  std::vector<DerivationTree> enumerate(const Term& root_lf) const {
    auto root = root_category(root_lf);
    if (!root || tokens_.empty()) return {};
    return expand(*root, normalize_lf(root_lf), 0, static_cast<int>(tokens_.size()), clause_atom(*root));
  }

 private:
  std::string words(int i, int j) const {
    std::string w;
    for (int k = i; k < j; ++k) w += (k > i ? " " : "") + tokens_[k];
    return w;
  }

  static std::optional<Category> make(const Category& result, Slash slash, const Category& argument) {
    Category c = Category::functor(result, slash, argument);
    if (!c.within_bounds()) return std::nullopt;
    return c;
  }

  std::vector<DerivationTree> expand(const Category& cat, const Term& lf, int i, int j, Atom clause) const {
    std::vector<DerivationTree> out;
    if (j - i <= bounds_.max_leaf_span) out.push_back(make_leaf(cat, lf, i, j, words(i, j)));

    if (is_raise_target(cat) && detail::raised_shape(lf)) {
      for (auto& child : expand(Category::atom(Atom::NP), shift(lf.body().argument(), -1), i, j, clause)) {
        out.push_back(make_raise(cat, child));
      }
    }
    if (j - i < 2) return out;

    const SemType ty = sem_type_of_category(cat);
    auto binary = [&](Rule rule, const Category& lc, const Term& llf, const Category& rc, const Term& rlf) {
      for (int k = i + 1; k < j; ++k) {
        auto lefts = expand(lc, llf, i, k, clause);
        if (lefts.empty()) continue;
        auto rights = expand(rc, rlf, k, j, clause);
        for (const auto& l : lefts) {
          for (const auto& r : rights) out.push_back(make_binary(cat, lf, rule, l, r));
        }
      }
    };

    for (const auto& s : application_splits(lf, ty, bounds_)) {
      for (const auto& y : argument_categories(s.arg_type, clause)) {
        if (auto fwd = make(cat, Slash::Fwd, y); fwd && (!s.raise_only || is_raise_target(*fwd))) {
          binary(Rule::FwdApp, *fwd, s.functor, y, s.argument);
        }
        if (auto bwd = make(cat, Slash::Bwd, y); bwd && (!s.raise_only || is_raise_target(*bwd))) {
          binary(Rule::BwdApp, y, s.argument, *bwd, s.functor);
        }
      }
    }
    if (cat.is_fwd()) {
      for (const auto& s : composition_splits(lf, ty, bounds_)) {
        for (const auto& y : argument_categories(s.arg_type, clause)) {
          auto fc = make(cat.result(), Slash::Fwd, y);
          auto gc = make(y, Slash::Fwd, cat.argument());
          if (!fc || !gc || (s.raise_only && !is_raise_target(*fc))) continue;
          binary(Rule::FwdComp, *fc, s.functor, *gc, s.argument);
        }
      }
    }
    return out;
  }

  std::vector<std::string> tokens_;
  Bounds bounds_;
};

}  // namespace semboot::oracle
