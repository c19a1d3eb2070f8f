#include "semboot/derivation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <tuple>
#include <unordered_map>

namespace semboot {

// ---------------------------------------------------------------------------
// Trees

DerivationTree make_leaf(const Category& cat, const Term& lf, int begin, int end, std::string words) {
  Term lexical = eta_expand(lf, sem_type_of_category(cat));
  return std::make_shared<DerivationNode>(DerivationNode{cat, lf, Rule::Lex, begin, end, nullptr, nullptr,
                                                         render_lf(lexical), render_lf(shellify(lexical).term),
                                                         std::move(words)});
}

DerivationTree make_raise(const Category& target, const DerivationTree& child) {
  return std::make_shared<DerivationNode>(DerivationNode{target, raised_lf(child->lf), Rule::TypeRaise,
                                                         child->begin, child->end, child, nullptr, {}, {}, {}});
}

DerivationTree make_binary(const Category& cat, const Term& lf, Rule rule, const DerivationTree& left,
                           const DerivationTree& right) {
  return std::make_shared<DerivationNode>(
      DerivationNode{cat, lf, rule, left->begin, right->end, left, right, {}, {}, {}});
}

namespace {

void collect_leaves(const DerivationNode* n, std::vector<const DerivationNode*>& out) {
  if (n->is_leaf()) {
    out.push_back(n);
    return;
  }
  collect_leaves(n->left.get(), out);
  if (n->right) collect_leaves(n->right.get(), out);
}

}  // namespace

std::vector<const DerivationNode*> tree_leaves(const DerivationTree& t) {
  std::vector<const DerivationNode*> out;
  collect_leaves(t.get(), out);
  return out;
}

Term recombine(const DerivationTree& t) {
  switch (t->rule) {
    case Rule::Lex: return t->lf;
    case Rule::TypeRaise: return raised_lf(recombine(t->left));
    default: return combine_lfs(recombine(t->left), recombine(t->right), t->rule);
  }
}

std::string tree_to_string(const DerivationTree& t) {
  if (t->is_leaf()) {
    return "[\"" + t->words + "\" := " + t->category.str() + " : " + render_lf(t->lf) + "]";
  }
  std::string out = "(" + t->category.str() + " : " + render_lf(t->lf) + " " + std::string(rule_label(t->rule)) +
                    " " + tree_to_string(t->left);
  if (t->right) out += " " + tree_to_string(t->right);
  out += ")";
  return out;
}

std::string tree_key(const DerivationTree& t) {
  if (t->is_leaf()) {
    return "[" + std::to_string(t->begin) + "," + std::to_string(t->end) + " " + t->category.str() + " " +
           t->lf.key() + "]";
  }
  std::string out = "(" + t->category.str() + " " + std::string(rule_label(t->rule)) + " " + tree_key(t->left);
  if (t->right) out += " " + tree_key(t->right);
  out += ")";
  return out;
}

// ---------------------------------------------------------------------------
// Root and argument categories

std::optional<Category> root_category(const Term& lf) {
  SemType ty = sem_type_of(lf);
  if (ty == SemType::e()) return Category::atom(Atom::NP);
  if (ty != SemType::t()) return std::nullopt;
  if (lf.mentions_tag(kWhTag)) return Category::atom(Atom::Swhq);
  const Term* head = &lf;
  while (head->is_app()) head = &head->function();
  if (head->is_const() && head->tag() == kQuestionTag) return Category::atom(Atom::Sq);
  return Category::atom(Atom::S);
}

Atom clause_atom(const Category& root) {
  if (root.is_atom() && (root.atom_kind() == Atom::Sq || root.atom_kind() == Atom::Swhq)) return Atom::Sq;
  return Atom::S;
}

namespace {

std::vector<Category> build_argument_categories(const SemType& type, Atom clause) {
  if (type == SemType::e()) return {Category::atom(Atom::NP)};
  if (type == SemType::t()) return {Category::atom(clause)};
  std::vector<Category> out;
  if (type == SemType::fn(SemType::e(), SemType::t())) {
    out.push_back(Category::atom(Atom::N));
    out.push_back(Category::atom(Atom::VP));
  }
  auto results = build_argument_categories(type.result(), clause);
  auto args = build_argument_categories(type.argument(), clause);
  for (const auto& r : results) {
    for (const auto& a : args) {
      for (Slash s : {Slash::Fwd, Slash::Bwd}) {
        Category c = Category::functor(r, s, a);
        if (c.within_bounds()) out.push_back(std::move(c));
      }
    }
  }
  return out;
}

}  // namespace

const std::vector<Category>& argument_categories(const SemType& type, Atom clause) {
  static std::mutex mu;
  static std::map<std::string, std::vector<Category>> cache;
  std::string key = type.str() + "/" + std::string(atom_name(clause));
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  return cache.emplace(key, build_argument_categories(type, clause)).first->second;
}

// ---------------------------------------------------------------------------
// Inverse combinators

namespace {

Term replace_at(const Term& t, const TermPath& path, std::size_t pos, const Term& repl) {
  if (pos == path.size()) return repl;
  switch (path[pos]) {
    case 0: return Term::app(replace_at(t.function(), path, pos + 1, repl), t.argument());
    case 1: return Term::app(t.function(), replace_at(t.argument(), path, pos + 1, repl));
    default: return Term::lam(replace_at(t.body(), path, pos + 1, repl), t.hint());
  }
}

// Free variable indices of `t` (relative to t's own root).
void free_indices(const Term& t, int depth, std::set<int>& out) {
  if (t.open_depth() <= depth) return;
  switch (t.kind()) {
    case Term::Kind::Var:
      if (t.index() >= depth) out.insert(t.index() - depth);
      return;
    case Term::Kind::Const: return;
    case Term::Kind::App:
      free_indices(t.function(), depth, out);
      free_indices(t.argument(), depth, out);
      return;
    case Term::Kind::Lam: free_indices(t.body(), depth + 1, out); return;
  }
}

int count_var(const Term& t, int index) {
  if (t.open_depth() <= index) return 0;
  switch (t.kind()) {
    case Term::Kind::Var: return t.index() == index ? 1 : 0;
    case Term::Kind::Const: return 0;
    case Term::Kind::App: return count_var(t.function(), index) + count_var(t.argument(), index);
    case Term::Kind::Lam: return count_var(t.body(), index + 1);
  }
  return 0;
}

Term eta_reduce_head(Term t) {
  while (t.is_lam() && t.body().is_app() && t.body().argument().is_var() && t.body().argument().index() == 0 &&
         count_var(t.body().function(), 0) == 0) {
    t = shift(t.body().function(), -1);
  }
  return t;
}

struct ApplySplit {
  Term f;
  Term a;
  TermPath path;  // first abstracted occurrence
  // Raised split: f is lam p.(p x) for the subterm x at `path`, and a is the
  // parent with x abstracted.
  bool raised = false;
};

std::vector<ApplySplit> inverse_apply_impl(const Term& parent, std::size_t max_fanout) {
  std::vector<ApplySplit> out;
  Term eta = eta_reduce_head(parent);
  auto groups = enumerate_subterms(parent);
  for (const auto& g : groups) {
    if (out.size() >= max_fanout) break;
    const Term& a = g.subterm;
    if (a == parent || a == eta) continue;
    std::vector<std::vector<const TermPath*>> occurrence_sets;
    std::vector<const TermPath*> all;
    for (const auto& p : g.occurrences) all.push_back(&p);
    occurrence_sets.push_back(all);
    if (all.size() > 1) {
      for (const auto* p : all) occurrence_sets.push_back({p});
    }
    std::optional<Term> f_all;
    for (const auto& occ : occurrence_sets) {
      if (out.size() >= max_fanout) break;
      Term body = parent;
      for (const auto* p : occ) body = replace_at(body, *p, 0, Term::var(binder_depth(parent, *p)));
      Term f = Term::lam(body);
      if (!f_all) f_all = f;
      out.push_back(ApplySplit{f, a, *occ.front()});
    }
    if (f_all && out.size() < max_fanout) {
      // The subterm as a raised functor over the rest, as for a fronted wh
      // item or a type-raised subject. Callers keep it only for type e.
      out.push_back(ApplySplit{Term::lam(Term::app(Term::var(0), shift(a, 1))), *f_all, g.occurrences.front(), true});
    }
  }
  return out;
}

struct ComposeSplit {
  Term f;
  Term g;
  TermPath path;  // path of the abstracted subterm within the parent
  int eta = 0;    // arguments added when eta-expanding g
};

std::vector<ComposeSplit> inverse_compose_impl(const Term& parent, std::size_t max_fanout,
                                               const std::vector<SemType>* types) {
  std::vector<ComposeSplit> out;
  if (!parent.is_lam()) return out;
  const Term& body = parent.body();
  int z_total = count_var(body, 0);
  if (z_total == 0) return out;

  std::vector<std::pair<TermPath, const Term*>> stack;
  // Pre-order traversal of the body.
  std::vector<std::pair<TermPath, const Term*>> order;
  stack.push_back({TermPath{}, &body});
  while (!stack.empty()) {
    auto [path, node] = stack.back();
    stack.pop_back();
    order.push_back({path, node});
    if (node->is_app()) {
      TermPath r = path;
      r.push_back(1);
      stack.push_back({r, &node->argument()});
      TermPath l = path;
      l.push_back(0);
      stack.push_back({l, &node->function()});
    } else if (node->is_lam()) {
      TermPath b = path;
      b.push_back(2);
      stack.push_back({b, &node->body()});
    }
  }

  for (const auto& [path, node] : order) {
    if (out.size() >= max_fanout) break;
    if (path.empty()) continue;  // f would be the identity
    const Term& t = *node;
    int d = binder_depth(body, path);
    std::set<int> fv;
    free_indices(t, 0, fv);
    if (fv.size() != 1 || *fv.begin() != d) continue;
    if (t.is_var()) continue;  // g would be the identity
    if (count_var(t, d) != z_total) continue;

    Term g_body = shift(t, -d, 0);
    int eta = 0;
    if (types) {
      TermPath full{2};
      full.insert(full.end(), path.begin(), path.end());
      std::size_t pre = preorder_index(parent, full);
      if (pre < types->size()) {
        const SemType* ty = &(*types)[pre];
        while (ty->is_fn()) {
          ++eta;
          ty = &ty->result();
        }
      }
    }
    Term expanded = shift(g_body, eta, 0);
    for (int k = eta - 1; k >= 0; --k) expanded = Term::app(expanded, Term::var(k));
    for (int k = 0; k < eta; ++k) expanded = Term::lam(expanded);
    Term g = beta_reduce(Term::lam(expanded));
    Term f = Term::lam(replace_at(body, path, 0, Term::var(d)));
    TermPath full{2};
    full.insert(full.end(), path.begin(), path.end());
    out.push_back(ComposeSplit{f, g, full, eta});
  }
  return out;
}

}  // namespace

std::vector<std::pair<Term, Term>> inverse_apply(const Term& parent, std::size_t max_fanout) {
  std::vector<std::pair<Term, Term>> out;
  for (auto& s : inverse_apply_impl(parent, max_fanout)) out.emplace_back(std::move(s.f), std::move(s.a));
  return out;
}

std::vector<std::pair<Term, Term>> inverse_compose(const Term& parent, std::size_t max_fanout) {
  std::optional<std::vector<SemType>> types;
  if (parent.is_lam()) {
    try {
      SemType ty = sem_type_of(parent);
      types = node_types(parent, ty);
    } catch (const std::exception&) {
    }
  }
  std::vector<std::pair<Term, Term>> out;
  for (auto& s : inverse_compose_impl(parent, max_fanout, types ? &*types : nullptr))
    out.emplace_back(std::move(s.f), std::move(s.g));
  return out;
}

// ---------------------------------------------------------------------------
// Forest

namespace {

// A functor LF lam p.(p x) over a non-wh entity x only takes raise-target
// categories, the ones type-raising itself produces.
struct TypedApply {
  int f = -1;  // interned LF ids
  int a = -1;
  int arg_list = -1;  // interned list of categories congruent with the argument type
  bool raise_only = false;
};

struct TypedCompose {
  int f = -1;
  int g = -1;
  int mid_list = -1;
  bool raise_only = false;
};

struct ChildTemplate {
  Rule rule;
  int left_cat;
  int left_lf;
  int right_cat;
  int right_lf;
};

struct SplitSet {
  std::vector<TypedApply> apply;
  std::vector<TypedCompose> compose;
};

bool is_raised_form(const Term& lf) {
  return lf.is_lam() && lf.body().is_app() && lf.body().function().is_var() && lf.body().function().index() == 0 &&
         count_var(lf.body().argument(), 0) == 0;
}

// lam p.(p x) taking an argument of type <e, _>, with x not a wh constant.
bool raised_entity(const Term& f, const SemType& arg_type) {
  if (!is_raised_form(f) || !arg_type.is_fn() || arg_type.argument() != SemType::e()) return false;
  const Term& x = f.body().argument();
  return !(x.is_const() && x.tag() == kWhTag);
}

// Open-addressing map from a pair of 64-bit keys to an int, used for the
// forest memo and functor tables where std::unordered_map dominated run time.
class FlatIntMap {
 public:
  FlatIntMap() { slots_.resize(1024); }

  int* find(std::uint64_t a, std::uint64_t b) {
    std::size_t mask = slots_.size() - 1;
    for (std::size_t h = hash(a, b) & mask;; h = (h + 1) & mask) {
      Slot& s = slots_[h];
      if (!s.used) return nullptr;
      if (s.a == a && s.b == b) return &s.value;
    }
  }

  void insert(std::uint64_t a, std::uint64_t b, int value) {
    if ((size_ + 1) * 2 > slots_.size()) grow();
    place(a, b, value);
    ++size_;
  }

 private:
  struct Slot {
    std::uint64_t a = 0;
    std::uint64_t b = 0;
    int value = 0;
    bool used = false;
  };

  static std::size_t hash(std::uint64_t a, std::uint64_t b) {
    std::uint64_t h = a * 0x9E3779B97F4A7C15ULL ^ (b + 0xC2B2AE3D27D4EB4FULL);
    h ^= h >> 29;
    h *= 0xBF58476D1CE4E5B9ULL;
    h ^= h >> 32;
    return static_cast<std::size_t>(h);
  }

  void place(std::uint64_t a, std::uint64_t b, int value) {
    std::size_t mask = slots_.size() - 1;
    std::size_t h = hash(a, b) & mask;
    while (slots_[h].used) h = (h + 1) & mask;
    slots_[h] = Slot{a, b, value, true};
  }

  void grow() {
    std::vector<Slot> old(slots_.size() * 2);
    old.swap(slots_);
    for (const Slot& s : old)
      if (s.used) place(s.a, s.b, s.value);
  }

  std::vector<Slot> slots_;
  std::size_t size_ = 0;
};

}  // namespace

struct ParseForest::Impl {
  static std::uint64_t pack(int hi, int lo) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(hi)) << 32) | static_cast<std::uint32_t>(lo);
  }

  std::vector<std::string> tokens;
  TrainConfig cfg;
  std::vector<Node> nodes;
  FlatIntMap memo;  // (cat, lf), (i, j, clause) -> node id or -1

  std::vector<Category> cats;
  std::unordered_map<std::string, int> cat_ids;
  std::vector<int> cat_depth;
  std::vector<int> cat_order;
  std::vector<char> cat_raise_target;
  std::vector<std::pair<int, int>> cat_parts;  // (result, argument) of forward functors, else (-1, -1)
  FlatIntMap functor_ids;  // (result, argument), slash -> id, -1 if out of bounds

  std::vector<Term> lfs;
  std::unordered_map<std::string, int> lf_ids;
  // Leaf keys: the LF eta-expanded to the category's type, then rendered.
  std::unordered_map<std::uint64_t, int> leaf_key_ids;  // (lf, type)
  std::vector<std::string> leaf_lf_texts;
  std::vector<std::string> leaf_shell_texts;
  std::vector<std::optional<int>> raised_child;  // per lf id: the NP argument of a raised form
  std::unordered_map<std::uint64_t, SplitSet> split_sets;  // (lf, type, clause)
  std::unordered_map<std::uint64_t, std::vector<ChildTemplate>> templates;  // (cat, lf, clause)
  std::vector<std::vector<int>> arg_lists;
  std::unordered_map<std::string, int> arg_list_ids;  // (type, clause)
  std::unordered_map<std::uint64_t, std::vector<int>> functor_rows;  // (cat, list, kind)

  std::vector<SemType> types;
  std::unordered_map<std::string, int> type_ids;
  std::vector<int> cat_type;
  std::vector<std::string> span_texts;
  std::vector<std::optional<std::vector<DerivationTree>>> unpacked;
  int np_id = -1;

  int leaf_key(int lf, int cat) {
    const int ty = cat_type[cat];
    const std::uint64_t key = (static_cast<std::uint64_t>(lf) << 32) | static_cast<std::uint64_t>(ty);
    auto [it, fresh] = leaf_key_ids.emplace(key, static_cast<int>(leaf_lf_texts.size()));
    if (fresh) {
      Term lexical = eta_expand(lfs[lf], types[ty]);
      leaf_lf_texts.push_back(render_lf(lexical));
      leaf_shell_texts.push_back(render_lf(shellify(lexical).term));
    }
    return it->second;
  }

  int intern_cat(const Category& c) {
    auto found = cat_ids.find(c.str());
    if (found != cat_ids.end()) return found->second;
    auto [it, fresh] = cat_ids.emplace(c.str(), static_cast<int>(cats.size()));
    if (fresh) {
      cats.push_back(c);
      cat_depth.push_back(c.depth());
      cat_order.push_back(c.order());
      cat_raise_target.push_back(is_raise_target(c) ? 1 : 0);
      cat_parts.emplace_back(-1, -1);
      SemType ty = sem_type_of_category(c);
      auto [t, new_type] = type_ids.emplace(ty.str(), static_cast<int>(types.size()));
      if (new_type) types.push_back(ty);
      cat_type.push_back(t->second);
    }
    return it->second;
  }

  int functor(int result, Slash slash, int argument) {
    const std::uint64_t key = pack(result, argument);
    const std::uint64_t dir = slash == Slash::Fwd ? 1U : 0U;
    if (const int* found = functor_ids.find(key, dir)) return *found;
    int depth = 1 + std::max(cat_depth[result], cat_depth[argument]);
    int order = std::max(cat_order[result], cat_order[argument] + 1);
    int id = -1;
    if (depth <= kMaxCategoryDepth && order <= kMaxCategoryOrder) {
      id = intern_cat(Category::functor(cats[result], slash, cats[argument]));
      if (slash == Slash::Fwd) cat_parts[id] = {result, argument};
    }
    functor_ids.insert(key, dir, id);
    return id;
  }

  // Eta variants share one id; lf_ids maps both the raw and the reduced key.
  int intern_lf(const Term& raw) {
    if (auto found = lf_ids.find(raw.key()); found != lf_ids.end()) return found->second;
    Term t = eta_reduce(raw);
    auto [it, fresh] = lf_ids.emplace(t.key(), static_cast<int>(lfs.size()));
    if (fresh) {
      lfs.push_back(t);
      raised_child.emplace_back();
    }
    const int id = it->second;
    if (t.key() != raw.key()) lf_ids.emplace(raw.key(), id);
    return id;
  }

  void init() {
    np_id = intern_cat(Category::atom(Atom::NP));
    const int n = static_cast<int>(tokens.size());
    span_texts.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(n + 1));
    for (int i = 0; i < n; ++i) {
      std::string w;
      for (int j = i + 1; j <= n; ++j) {
        if (j > i + 1) w += ' ';
        w += tokens[j - 1];
        span_texts[span_index(i, j)] = w;
      }
    }
  }

  std::size_t span_index(int i, int j) const { return static_cast<std::size_t>(i) * (tokens.size() + 1) + j; }

  int build(int cat, int lf, int i, int j, Atom clause) {
    const std::uint64_t key_a = pack(cat, lf);
    const std::uint64_t key_b = (static_cast<std::uint64_t>(i) << 40) | (static_cast<std::uint64_t>(j) << 8) |
                                static_cast<std::uint64_t>(clause);
    if (const int* found = memo.find(key_a, key_b)) return *found;

    std::vector<Alt> alts;
    if (j - i <= cfg.max_leaf_span) alts.push_back(Alt{Rule::Lex});

    if (cat_raise_target[cat]) {
      if (!raised_child[lf]) {
        int arg = is_raised_form(lfs[lf]) ? intern_lf(shift(lfs[lf].body().argument(), -1)) : -1;
        raised_child[lf] = arg;
      }
      if (int arg = *raised_child[lf]; arg >= 0) {
        int child = build(np_id, arg, i, j, clause);
        if (child >= 0) alts.push_back(Alt{Rule::TypeRaise, child});
      }
    }

    if (j - i >= 2) {
      const std::vector<ChildTemplate>& templates = child_templates(cat, lf, clause);
      for (int k = i + 1; k < j; ++k) {
        for (const auto& t : templates) {
          int l = build(t.left_cat, t.left_lf, i, k, clause);
          if (l < 0) continue;
          int r = build(t.right_cat, t.right_lf, k, j, clause);
          if (r >= 0) alts.push_back(Alt{t.rule, l, r});
        }
      }
    }

    int idx = -1;
    if (!alts.empty()) {
      double count = 0.0;
      for (const auto& alt : alts) {
        if (alt.rule == Rule::Lex) count += 1.0;
        else if (alt.rule == Rule::TypeRaise) count += nodes[alt.left].count;
        else count += nodes[alt.left].count * nodes[alt.right].count;
      }
      idx = static_cast<int>(nodes.size());
      nodes.push_back(Node{cats[cat], lfs[lf], i, j, std::move(alts), count, cat, lf});
      unpacked.emplace_back();
    }
    memo.insert(key_a, key_b, idx);
    return idx;
  }

  // Binary child (category, LF) pairs of a node; they do not depend on the span.
  const std::vector<ChildTemplate>& child_templates(int cat, int lf, Atom clause) {
    const std::uint64_t key = (static_cast<std::uint64_t>(cat) << 32) | (static_cast<std::uint64_t>(lf) << 4) |
                              static_cast<std::uint64_t>(clause);
    auto found = templates.find(key);
    if (found != templates.end()) return found->second;
    std::vector<ChildTemplate> out;
    const SplitSet& ss = splits(lf, cat, clause);
    const bool fwd_parent = cats[cat].is_fwd();
    if (fwd_parent && cat_parts[cat].first < 0) {
      int result = intern_cat(cats[cat].result());
      int argument = intern_cat(cats[cat].argument());
      cat_parts[cat] = {result, argument};
    }
    const auto [cat_result, cat_arg] = cat_parts[cat];
    for (const auto& s : ss.apply) {
      const std::vector<int>& ys = arg_lists[s.arg_list];
      const std::vector<int>& fwds = functor_row(cat, s.arg_list, 0);
      const std::vector<int>& bwds = functor_row(cat, s.arg_list, 1);
      for (std::size_t n = 0; n < ys.size(); ++n) {
        const int y = ys[n];
        const int fwd = fwds[n];
        if (fwd >= 0 && (!s.raise_only || cat_raise_target[fwd])) out.push_back({Rule::FwdApp, fwd, s.f, y, s.a});
        const int bwd = bwds[n];
        if (bwd >= 0 && (!s.raise_only || cat_raise_target[bwd])) out.push_back({Rule::BwdApp, y, s.a, bwd, s.f});
      }
    }
    if (fwd_parent) {
      for (const auto& s : ss.compose) {
        const std::vector<int>& fcs = functor_row(cat_result, s.mid_list, 0);
        const std::vector<int>& gcs = functor_row(cat_arg, s.mid_list, 2);
        for (std::size_t n = 0; n < fcs.size(); ++n) {
          const int fc = fcs[n];
          const int gc = gcs[n];
          if (fc < 0 || gc < 0 || (s.raise_only && !cat_raise_target[fc])) continue;
          out.push_back({Rule::FwdComp, fc, s.f, gc, s.g});
        }
      }
    }
    return templates.emplace(key, std::move(out)).first->second;
  }

  int intern_list(const SemType& type, Atom clause) {
    const std::string key = type.str() + "|" + std::string(atom_name(clause));
    auto found = arg_list_ids.find(key);
    if (found != arg_list_ids.end()) return found->second;
    std::vector<int> ids;
    for (const auto& c : argument_categories(type, clause)) ids.push_back(intern_cat(c));
    arg_lists.push_back(std::move(ids));
    return arg_list_ids.emplace(key, static_cast<int>(arg_lists.size()) - 1).first->second;
  }

  // For each entry y of a category list: kind 0 gives cat/y, 1 gives cat\y
  // and 2 gives y/cat, or -1 when out of bounds.
  const std::vector<int>& functor_row(int cat, int list, int kind) {
    const std::uint64_t key = (static_cast<std::uint64_t>(cat) << 32) | (static_cast<std::uint64_t>(list) << 2) |
                              static_cast<std::uint64_t>(kind);
    auto found = functor_rows.find(key);
    if (found != functor_rows.end()) return found->second;
    std::vector<int> row;
    for (int y : arg_lists[list]) {
      if (kind == 0) row.push_back(functor(cat, Slash::Fwd, y));
      else if (kind == 1) row.push_back(functor(cat, Slash::Bwd, y));
      else row.push_back(functor(y, Slash::Fwd, cat));
    }
    return functor_rows.emplace(key, std::move(row)).first->second;
  }

  SplitSet compute_splits(Term lf, SemType ty, Atom clause) {  // by value: interning grows lfs
    SplitSet ss;
    auto types = node_types(lf, ty);
    if (!types) return ss;
    std::set<std::pair<int, int>> seen;
    for (auto& s : inverse_apply_impl(lf, cfg.max_split_fanout)) {
      const SemType& sub_type = (*types)[preorder_index(lf, s.path)];
      if (s.raised && sub_type != SemType::e()) continue;
      SemType arg_type = s.raised ? SemType::fn(SemType::e(), ty) : sub_type;
      if (lambda_depth(s.f) > cfg.max_lambda_depth || lambda_depth(s.a) > cfg.max_lambda_depth) continue;
      if (!has_type(s.f, SemType::fn(arg_type, ty))) continue;
      if (!has_type(s.a, arg_type)) continue;
      const int f = intern_lf(s.f);
      const int a = intern_lf(s.a);
      // Eta-equal splits (a raised split and its subterm counterpart) count once.
      if (!seen.emplace(f, a).second) continue;
      const bool raise_only = raised_entity(s.f, arg_type);
      ss.apply.push_back(TypedApply{f, a, intern_list(arg_type, clause), raise_only});
    }
    if (!ty.is_fn()) return ss;
    // Composition needs the parent as lam z.B; eta-reduced parents are expanded once.
    Term lam_form = lf.is_lam() ? lf : Term::lam(Term::app(shift(lf, 1), Term::var(0)));
    auto lam_types = lf.is_lam() ? types : node_types(lam_form, ty);
    if (!lam_types) return ss;
    seen.clear();
    auto add_compose = [&](const Term& f_term, const Term& g_term, const SemType& mid) {
      if (lambda_depth(f_term) > cfg.max_lambda_depth || lambda_depth(g_term) > cfg.max_lambda_depth) return;
      if (!has_type(f_term, SemType::fn(mid, ty.result()))) return;
      if (!has_type(g_term, SemType::fn(ty.argument(), mid))) return;
      const int f = intern_lf(f_term);
      const int g = intern_lf(g_term);
      if (!seen.emplace(f, g).second) return;
      const bool raise_only = raised_entity(f_term, mid);
      ss.compose.push_back(TypedCompose{f, g, intern_list(mid, clause), raise_only});
    };
    for (auto& s : inverse_compose_impl(lam_form, cfg.max_split_fanout, &*lam_types)) {
      add_compose(s.f, s.g, (*lam_types)[preorder_index(lam_form, s.path)]);
    }
    // Raised composition: f = lam p.(p x) for a type-e subterm x of B, and
    // g = lam z.lam y.B[x:=y], so that lam z.f (g z) is the parent.
    for (auto& s : inverse_apply_impl(lam_form, cfg.max_split_fanout)) {
      if (!s.raised || (*lam_types)[preorder_index(lam_form, s.path)] != SemType::e()) continue;
      Term g = beta_reduce(Term::lam(Term::lam(Term::app(Term::app(shift(s.a, 2), Term::var(0)), Term::var(1)))));
      add_compose(s.f, g, SemType::fn(SemType::e(), ty.result()));
    }
    return ss;
  }

  const SplitSet& splits(int lf, int cat, Atom clause) {
    std::uint64_t key = (static_cast<std::uint64_t>(lf) << 24) | (static_cast<std::uint64_t>(cat_type[cat]) << 4) |
                        static_cast<std::uint64_t>(clause);
    auto it = split_sets.find(key);
    if (it != split_sets.end()) return it->second;
    SplitSet ss = compute_splits(lfs[lf], types[cat_type[cat]], clause);
    return split_sets.emplace(key, std::move(ss)).first->second;
  }
};

ParseForest::ParseForest(std::vector<std::string> tokens, TrainConfig cfg) : impl_(std::make_unique<Impl>()) {
  impl_->tokens = std::move(tokens);
  impl_->cfg = cfg;
  impl_->init();
}

ParseForest::~ParseForest() = default;

int ParseForest::add_root(const Term& lf) {
  if (impl_->tokens.empty()) return -1;
  std::optional<Category> root;
  try {
    root = root_category(lf);
  } catch (const std::exception&) {
    return -1;
  }
  if (!root) return -1;
  return impl_->build(impl_->intern_cat(*root), impl_->intern_lf(lf), 0, static_cast<int>(impl_->tokens.size()),
                      clause_atom(*root));
}

std::size_t ParseForest::size() const { return impl_->nodes.size(); }
const ParseForest::Node& ParseForest::node(int id) const { return impl_->nodes.at(id); }
const std::vector<std::string>& ParseForest::tokens() const { return impl_->tokens; }
std::string ParseForest::span_words(int i, int j) const { return span_text(i, j); }
const std::string& ParseForest::span_text(int i, int j) const { return impl_->span_texts.at(impl_->span_index(i, j)); }
std::size_t ParseForest::category_count() const { return impl_->cats.size(); }
std::size_t ParseForest::lf_count() const { return impl_->lfs.size(); }

int ParseForest::leaf_key(int id) {
  const Node& n = impl_->nodes.at(id);
  return impl_->leaf_key(n.lf_id, n.cat_id);
}

std::size_t ParseForest::leaf_key_count() const { return impl_->leaf_lf_texts.size(); }

const std::string& ParseForest::lf_text(int id) { return impl_->leaf_lf_texts[leaf_key(id)]; }

const std::string& ParseForest::shell_text(int id) { return impl_->leaf_shell_texts[leaf_key(id)]; }

std::vector<DerivationTree> ParseForest::unpack(int id) {
  if (impl_->unpacked.at(id)) return *impl_->unpacked[id];
  std::vector<DerivationTree> out;
  const std::size_t limit = impl_->cfg.max_trees;
  const Node node = impl_->nodes[id];
  for (const auto& alt : node.alts) {
    if (out.size() >= limit) break;
    if (alt.rule == Rule::Lex) {
      out.push_back(make_leaf(node.cat, node.lf, node.i, node.j, span_words(node.i, node.j)));
    } else if (alt.rule == Rule::TypeRaise) {
      for (const auto& c : unpack(alt.left)) {
        if (out.size() >= limit) break;
        out.push_back(make_raise(node.cat, c));
      }
    } else {
      auto ls = unpack(alt.left);
      auto rs = unpack(alt.right);
      for (const auto& l : ls) {
        if (out.size() >= limit) break;
        for (const auto& r : rs) {
          if (out.size() >= limit) break;
          out.push_back(make_binary(node.cat, node.lf, alt.rule, l, r));
        }
      }
    }
  }
  impl_->unpacked[id] = out;
  return out;
}

DerivationTree ParseForest::make_tree(int id, const std::vector<int>& choice) const {
  const Node& node = impl_->nodes.at(id);
  const Alt& alt = node.alts.at(choice.at(id));
  switch (alt.rule) {
    case Rule::Lex: return make_leaf(node.cat, node.lf, node.i, node.j, span_words(node.i, node.j));
    case Rule::TypeRaise: return make_raise(node.cat, make_tree(alt.left, choice));
    default: return make_binary(node.cat, node.lf, alt.rule, make_tree(alt.left, choice), make_tree(alt.right, choice));
  }
}

std::vector<DerivationTree> enumerate_trees(const std::vector<std::string>& tokens, const Term& root_lf,
                                            const TrainConfig& cfg) {
  ParseForest forest(tokens, cfg);
  int root = forest.add_root(root_lf);
  if (root < 0) return {};
  return forest.unpack(root);
}

double count_trees(const std::vector<std::string>& tokens, const Term& root_lf, const TrainConfig& cfg) {
  ParseForest forest(tokens, cfg);
  int root = forest.add_root(root_lf);
  return root < 0 ? 0.0 : forest.node(root).count;
}

// ---------------------------------------------------------------------------
// Scoring

std::string split_outcome(const Category& left, const Category& right, Rule rule) {
  std::string s = left.str();
  s += ' ';
  s += right.str();
  s += ' ';
  s += rule_label(rule);
  return s;
}

std::string raise_outcome(const Category& child) { return "T " + child.str(); }

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

std::uint64_t pair_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

// Category ids stay far below 2^20 for the bounded category space.
std::uint64_t split_key(int parent, int left, int right, Rule rule) {
  return (static_cast<std::uint64_t>(parent) << 43) | (static_cast<std::uint64_t>(left) << 23) |
         (static_cast<std::uint64_t>(right) << 3) | static_cast<std::uint64_t>(rule);
}

double leaf_log_score(const Model& m, const std::string& cat, const std::string& shell, const std::string& lf,
                      const std::string& words) {
  return std::log(m.p_t.posterior(cat, kLeafOutcome)) + std::log(m.p_h.posterior(cat, shell)) +
         std::log(m.p_l.posterior(shell, lf)) + std::log(m.p_w.posterior(lf, words));
}

using ScoreCache = std::unordered_map<const DerivationNode*, double>;

double node_log_score(const DerivationNode* n, const Model& m, ScoreCache& cache) {
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  const std::string& ctx = n->category.str();
  double s = 0.0;
  if (n->is_leaf()) {
    s = leaf_log_score(m, ctx, n->shell_text, n->lf_text, n->words);
  } else if (n->rule == Rule::TypeRaise) {
    s = std::log(m.p_t.posterior(ctx, raise_outcome(n->left->category))) + node_log_score(n->left.get(), m, cache);
  } else {
    s = std::log(m.p_t.posterior(ctx, split_outcome(n->left->category, n->right->category, n->rule))) +
        node_log_score(n->left.get(), m, cache) + node_log_score(n->right.get(), m, cache);
  }
  cache.emplace(n, s);
  return s;
}

double log_sum_exp(const std::vector<double>& xs) {
  double mx = kNegInf;
  for (double x : xs) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - mx);
  return mx + std::log(s);
}

}  // namespace

double tree_log_joint(const DerivationTree& t, const Model& model) {
  ScoreCache cache;
  return std::log(model.p_r.posterior("", t->category.str())) + node_log_score(t.get(), model, cache);
}

std::vector<double> tree_posterior(const std::vector<double>& log_joints) {
  if (log_joints.empty()) throw std::invalid_argument("tree_posterior over an empty tree set");
  double z = log_sum_exp(log_joints);
  std::vector<double> out;
  out.reserve(log_joints.size());
  for (double x : log_joints) out.push_back(std::exp(x - z));
  return out;
}

std::vector<double> tree_posterior(const std::vector<DerivationTree>& trees, const Model& model) {
  std::vector<double> lj;
  ScoreCache cache;
  for (const auto& t : trees)
    lj.push_back(std::log(model.p_r.posterior("", t->category.str())) + node_log_score(t.get(), model, cache));
  return tree_posterior(lj);
}

// ---------------------------------------------------------------------------
// Forest analysis

ForestAnalysis analyze_example(const Model& model, const std::vector<std::string>& tokens,
                               const std::vector<Term>& candidates, const TrainConfig& cfg) {
  ForestAnalysis an;
  an.forest = std::make_unique<ParseForest>(tokens, cfg);
  ParseForest& forest = *an.forest;
  std::set<std::string> seen;
  for (const auto& lf : candidates) {
    CandidateMass cm{lf, -1, 0.0, 0.0};
    if (seen.insert(lf.key()).second) cm.root = forest.add_root(lf);
    if (cm.root >= 0) cm.trees = forest.node(cm.root).count;
    an.tree_count += cm.trees;
    an.candidates.push_back(std::move(cm));
  }
  const std::size_t n = forest.size();
  an.local_leaf.assign(n, kNegInf);
  an.local.resize(n);
  an.inside.assign(n, kNegInf);
  an.outside.assign(n, kNegInf);
  an.alt_posterior.resize(n);
  an.viterbi.assign(n, kNegInf);
  an.viterbi_alt.assign(n, -1);
  an.log_root.assign(an.candidates.size(), kNegInf);
  if (an.empty()) return an;

  // Local factors. Leaf factors split into per-category, per-LF and per-span
  // parts so that each model lookup happens once per distinct key.
  std::vector<double> cat_leaf(forest.category_count(), std::numeric_limits<double>::quiet_NaN());
  std::vector<const DirichletProcess::Context*> cat_ph(forest.category_count(), nullptr);
  struct LfFactors {
    bool ready = false;
    double log_pl = 0.0;
    double log_h_shell = 0.0;
  };
  std::vector<LfFactors> lf_factors;
  std::unordered_map<std::uint64_t, double> ph_cache;
  std::unordered_map<std::uint64_t, double> pw_cache;
  std::unordered_map<std::uint64_t, double> split_cache;
  const std::size_t width = tokens.size() + 1;

  auto leaf_factor = [&](int id) {
    const auto& node = forest.node(id);
    double& pt = cat_leaf[node.cat_id];
    if (std::isnan(pt)) {
      pt = std::log(model.p_t.posterior(node.cat.str(), kLeafOutcome));
      cat_ph[node.cat_id] = model.p_h.find_context(node.cat.str());
    }
    const int leaf_key = forest.leaf_key(id);
    if (static_cast<std::size_t>(leaf_key) >= lf_factors.size()) lf_factors.resize(leaf_key + 1);
    LfFactors& lf = lf_factors[leaf_key];
    if (!lf.ready) {
      const std::string& shell = forest.shell_text(id);
      lf.log_pl = std::log(model.p_l.posterior(shell, forest.lf_text(id)));
      lf.log_h_shell = std::log(model.p_h.base({}, shell));
      lf.ready = true;
    }
    double ph = lf.log_h_shell;  // unseen category: the posterior is the base value
    if (const auto* ctx = cat_ph[node.cat_id]) {
      auto key = pair_key(node.cat_id, node.lf_id);
      auto it = ph_cache.find(key);
      if (it == ph_cache.end()) {
        const std::string& shell = forest.shell_text(id);
        it = ph_cache.emplace(key, std::log(model.p_h.posterior_in(ctx, shell, model.p_h.base({}, shell)))).first;
      }
      ph = it->second;
    }
    auto span = static_cast<int>(static_cast<std::size_t>(node.i) * width + static_cast<std::size_t>(node.j));
    auto key = pair_key(leaf_key, span);
    auto it = pw_cache.find(key);
    if (it == pw_cache.end())
      it = pw_cache.emplace(key, std::log(model.p_w.posterior(forest.lf_text(id), forest.span_text(node.i, node.j))))
               .first;
    return pt + ph + lf.log_pl + it->second;
  };
  auto split_factor = [&](const ParseForest::Node& node, const ParseForest::Alt& alt) {
    std::uint64_t key = split_key(node.cat_id, forest.node(alt.left).cat_id,
                                  alt.rule == Rule::TypeRaise ? 0 : forest.node(alt.right).cat_id, alt.rule);
    auto it = split_cache.find(key);
    if (it != split_cache.end()) return it->second;
    const std::string outcome = alt.rule == Rule::TypeRaise
                                    ? raise_outcome(forest.node(alt.left).cat)
                                    : split_outcome(forest.node(alt.left).cat, forest.node(alt.right).cat, alt.rule);
    double v = std::log(model.p_t.posterior(node.cat.str(), outcome));
    split_cache.emplace(key, v);
    return v;
  };
  auto children = [&](const ParseForest::Alt& alt, const std::vector<double>& v) {
    if (alt.rule == Rule::Lex) return 0.0;
    if (alt.rule == Rule::TypeRaise) return v[alt.left];
    return v[alt.left] + v[alt.right];
  };

  // Pass 1: local factors and Viterbi inside scores.
  for (std::size_t id = 0; id < n; ++id) {
    const auto& node = forest.node(static_cast<int>(id));
    auto& local = an.local[id];
    local.resize(node.alts.size());
    for (std::size_t a = 0; a < node.alts.size(); ++a) {
      const auto& alt = node.alts[a];
      if (alt.rule == Rule::Lex) {
        local[a] = leaf_factor(static_cast<int>(id));
        an.local_leaf[id] = local[a];
      } else {
        local[a] = split_factor(node, alt);
      }
      double vit = local[a] + children(alt, an.viterbi);
      if (vit > an.viterbi[id]) {
        an.viterbi[id] = vit;
        an.viterbi_alt[id] = static_cast<int>(a);
      }
    }
  }

  std::vector<double> log_pr(an.candidates.size(), kNegInf);
  double best = kNegInf;
  for (std::size_t c = 0; c < an.candidates.size(); ++c) {
    int root = an.candidates[c].root;
    if (root < 0) continue;
    log_pr[c] = std::log(model.p_r.posterior("", forest.node(root).cat.str()));
    double vit = log_pr[c] + an.viterbi[root];
    if (vit > best) {
      best = vit;
      an.map_candidate = c;
    }
  }

  // Pass 2: Viterbi outside scores; alternatives whose best completion falls
  // more than prune_nats below the MAP tree are dropped.
  if (std::isfinite(cfg.prune_nats)) {
    std::vector<double> vout(n, kNegInf);
    for (std::size_t c = 0; c < an.candidates.size(); ++c) {
      int root = an.candidates[c].root;
      if (root >= 0) vout[root] = std::max(vout[root], log_pr[c]);
    }
    const double floor = best - cfg.prune_nats;
    for (std::size_t id = n; id-- > 0;) {
      const auto& node = forest.node(static_cast<int>(id));
      for (std::size_t a = 0; a < node.alts.size(); ++a) {
        const auto& alt = node.alts[a];
        double through = vout[id] + an.local[id][a];
        if (through + children(alt, an.viterbi) < floor) {
          an.local[id][a] = kNegInf;
          continue;
        }
        if (alt.rule == Rule::TypeRaise) {
          vout[alt.left] = std::max(vout[alt.left], through);
        } else if (alt.rule != Rule::Lex) {
          vout[alt.left] = std::max(vout[alt.left], through + an.viterbi[alt.right]);
          vout[alt.right] = std::max(vout[alt.right], through + an.viterbi[alt.left]);
        }
      }
      // The leaf alternative, when present, is always the first one.
      if (!node.alts.empty() && node.alts[0].rule == Rule::Lex) an.local_leaf[id] = an.local[id][0];
    }
  }

  // Pass 3: inside sums, retained tree counts and expected leaf counts.
  std::vector<double> log_leaves(n, kNegInf);  // log of sum over trees of weight * leaf count
  std::vector<double> kept_count(n, 0.0);
  for (std::size_t id = 0; id < n; ++id) {
    const auto& node = forest.node(static_cast<int>(id));
    double in = kNegInf;
    double lv = kNegInf;
    double cnt = 0.0;
    for (std::size_t a = 0; a < node.alts.size(); ++a) {
      const double local = an.local[id][a];
      if (local == kNegInf) continue;
      const auto& alt = node.alts[a];
      double leaves = 0.0;
      if (alt.rule == Rule::Lex) {
        cnt += 1.0;
      } else if (alt.rule == Rule::TypeRaise) {
        leaves = log_leaves[alt.left];
        cnt += kept_count[alt.left];
      } else {
        leaves = log_add(log_leaves[alt.left] + an.inside[alt.right], an.inside[alt.left] + log_leaves[alt.right]);
        cnt += kept_count[alt.left] * kept_count[alt.right];
      }
      in = log_add(in, local + children(alt, an.inside));
      lv = log_add(lv, local + leaves);
    }
    an.inside[id] = in;
    log_leaves[id] = lv;
    kept_count[id] = cnt;
  }

  double log_z = kNegInf;
  for (std::size_t c = 0; c < an.candidates.size(); ++c) {
    int root = an.candidates[c].root;
    if (root < 0) continue;
    an.log_root[c] = log_pr[c] + an.inside[root];
    log_z = log_add(log_z, an.log_root[c]);
    an.retained_trees += kept_count[root];
  }
  an.log_z = log_z;
  if (!std::isfinite(log_z)) return an;

  // Pass 4: outside sums and alternative posteriors.
  for (std::size_t c = 0; c < an.candidates.size(); ++c) {
    int root = an.candidates[c].root;
    if (root < 0) continue;
    an.outside[root] = log_add(an.outside[root], log_pr[c]);
  }
  for (std::size_t id = n; id-- > 0;) {
    const auto& node = forest.node(static_cast<int>(id));
    auto& post = an.alt_posterior[id];
    post.assign(node.alts.size(), 0.0);
    if (an.outside[id] == kNegInf) continue;
    for (std::size_t a = 0; a < node.alts.size(); ++a) {
      const auto& alt = node.alts[a];
      if (an.local[id][a] == kNegInf) continue;
      double base = an.outside[id] + an.local[id][a];
      post[a] = std::exp(base + children(alt, an.inside) - log_z);
      if (alt.rule == Rule::TypeRaise) {
        an.outside[alt.left] = log_add(an.outside[alt.left], base);
      } else if (alt.rule != Rule::Lex) {
        an.outside[alt.left] = log_add(an.outside[alt.left], base + an.inside[alt.right]);
        an.outside[alt.right] = log_add(an.outside[alt.right], base + an.inside[alt.left]);
      }
    }
  }

  for (std::size_t c = 0; c < an.candidates.size(); ++c) {
    int root = an.candidates[c].root;
    if (root < 0) continue;
    an.candidates[c].mass = std::exp(an.log_root[c] - log_z);
    double share = 0.0;
    for (double p : an.alt_posterior[root]) share += p;
    an.posterior_sum += share;
    an.expected_leaves += std::exp(log_pr[c] + log_leaves[root] - log_z);
  }

  int root = an.candidates[an.map_candidate].root;
  an.map_tree = forest.make_tree(root, an.viterbi_alt);
  an.map_log_joint = best;
  return an;
}

std::pair<DerivationTree, double> best_tree(const ForestAnalysis& an, std::size_t candidate) {
  int root = an.candidates.at(candidate).root;
  if (root < 0) return {nullptr, kNegInf};
  double lr = an.log_root[candidate] - an.inside[root];
  return {an.forest->make_tree(root, an.viterbi_alt), lr + an.viterbi[root]};
}

std::vector<double> leaf_coverage(const ForestAnalysis& an) {
  std::vector<double> cover(an.forest->tokens().size(), 0.0);
  for (std::size_t id = 0; id < an.forest->size(); ++id) {
    const auto& node = an.forest->node(static_cast<int>(id));
    for (std::size_t a = 0; a < node.alts.size(); ++a) {
      if (node.alts[a].rule != Rule::Lex || an.alt_posterior[id].empty()) continue;
      for (int k = node.i; k < node.j; ++k) cover[k] += an.alt_posterior[id][a];
    }
  }
  return cover;
}

ExampleReport train_example(Model& model, const std::vector<std::string>& tokens,
                            const std::vector<Term>& candidates, const TrainConfig& cfg) {
  ExampleReport rep;
  ForestAnalysis an = analyze_example(model, tokens, candidates, cfg);
  rep.tree_count = an.tree_count;
  rep.retained_trees = an.retained_trees;
  rep.candidates = an.candidates;
  if (an.empty()) {
    rep.skipped = true;
    rep.skip_reason = candidates.empty() ? "no candidate logical forms" : "no derivation for any candidate";
    return rep;
  }
  rep.gold_mass = an.candidates.front().mass;
  rep.map_tree = an.map_tree;
  rep.map_root_lf = an.map_tree->lf;
  rep.posterior_sum = an.posterior_sum;
  rep.expected_pw_mass = an.expected_leaves;
  for (double c : leaf_coverage(an)) rep.leaf_cover_error = std::max(rep.leaf_cover_error, std::abs(c - 1.0));

  // Collect expected counts first so updates never feed back into this example.
  // Weights are summed under interned ids, then mapped to model keys.
  ParseForest& forest = *an.forest;
  std::unordered_map<std::uint64_t, std::pair<int, double>> entries;  // (cat, lf) -> (node, weight)
  std::unordered_map<std::uint64_t, std::pair<int, double>> spans;    // (lf, span) -> (node, weight)
  std::unordered_map<std::uint64_t, std::tuple<int, std::size_t, double>> splits;  // -> (node, alt, weight)
  const std::size_t width = tokens.size() + 1;
  for (std::size_t id = 0; id < forest.size(); ++id) {
    const auto& node = forest.node(static_cast<int>(id));
    for (std::size_t a = 0; a < node.alts.size(); ++a) {
      double w = an.alt_posterior[id][a];
      if (!(w > 0.0)) continue;
      const auto& alt = node.alts[a];
      if (alt.rule == Rule::Lex) {
        auto& e = entries.try_emplace(pair_key(node.cat_id, node.lf_id), static_cast<int>(id), 0.0).first->second;
        e.second += w;
        auto span = static_cast<int>(static_cast<std::size_t>(node.i) * width + static_cast<std::size_t>(node.j));
        auto& sp = spans.try_emplace(pair_key(forest.leaf_key(static_cast<int>(id)), span), static_cast<int>(id), 0.0)
                       .first->second;
        sp.second += w;
      } else {
        std::uint64_t key = split_key(node.cat_id, forest.node(alt.left).cat_id,
                                      alt.rule == Rule::TypeRaise ? 0 : forest.node(alt.right).cat_id, alt.rule);
        auto& sp = splits.try_emplace(key, static_cast<int>(id), a, 0.0).first->second;
        std::get<2>(sp) += w;
      }
    }
  }

  enum Dist : int { kPr = 0, kPt, kPh, kPl, kPw };
  std::map<std::tuple<int, std::string, std::string>, double> ex;
  auto sorted = [](const auto& m) {
    std::vector<std::uint64_t> keys;
    keys.reserve(m.size());
    for (const auto& kv : m) keys.push_back(kv.first);
    std::sort(keys.begin(), keys.end());
    return keys;
  };
  for (auto k : sorted(entries)) {
    const auto& [id, w] = entries.at(k);
    const std::string& cat = forest.node(id).cat.str();
    const std::string& shell = forest.shell_text(id);
    ex[{kPt, cat, kLeafOutcome}] += w;
    ex[{kPh, cat, shell}] += w;
    ex[{kPl, shell, forest.lf_text(id)}] += w;
  }
  for (auto k : sorted(spans)) {
    const auto& [id, w] = spans.at(k);
    const auto& node = forest.node(id);
    ex[{kPw, forest.lf_text(id), forest.span_text(node.i, node.j)}] += w;
  }
  for (auto k : sorted(splits)) {
    const auto& [id, a, w] = splits.at(k);
    const auto& node = forest.node(id);
    const auto& alt = node.alts[a];
    const std::string outcome = alt.rule == Rule::TypeRaise
                                    ? raise_outcome(forest.node(alt.left).cat)
                                    : split_outcome(forest.node(alt.left).cat, forest.node(alt.right).cat, alt.rule);
    ex[{kPt, node.cat.str(), outcome}] += w;
  }
  for (const auto& c : an.candidates) {
    if (c.root < 0 || !(c.mass > 0.0)) continue;
    ex[{kPr, "", forest.node(c.root).cat.str()}] += c.mass;
  }

  const double pw_before = model.p_w.grand_total();
  DirichletProcess* dists[] = {&model.p_r, &model.p_t, &model.p_h, &model.p_l, &model.p_w};
  for (const auto& [k, w] : ex) dists[std::get<0>(k)]->observe(std::get<1>(k), std::get<2>(k), w);
  rep.pw_mass_added = model.p_w.grand_total() - pw_before;

  for (const auto& t : tokens) model.seen_words.insert(t);
  ++model.examples_seen;
  return rep;
}

}  // namespace semboot
